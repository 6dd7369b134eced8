#include "voluma/distributions.hpp"

#include <algorithm>
#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "voluma/error.hpp"
#include "voluma/random.hpp"

namespace voluma {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kMaxCutoffCandidates = 500;
const double kLogSqrt2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_probability(double p) {
  if (!(p > 0.0 && p < 1.0)) raise(ErrorKind::DomainError, "probability must lie in (0, 1)");
}

void require_size(std::span<const double> samples, const FitOptions& options) {
  if (samples.size() < options.min_samples) {
    raise(ErrorKind::InsufficientData, "fitting needs at least " + std::to_string(options.min_samples) +
                                           " samples, got " + std::to_string(samples.size()));
  }
}

void require_positive(std::span<const double> samples, Kind kind) {
  for (double x : samples) {
    if (!(x > 0.0) || !std::isfinite(x)) {
      raise(ErrorKind::DomainError, std::string(kind_name(kind)) + " fit requires positive finite samples");
    }
  }
}

struct MeanSd {
  double mean;
  double sd;
};

// Population (1/n) moments, two-pass.
MeanSd population_moments(std::span<const double> v) {
  const auto n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / n)};
}

bool all_equal(std::span<const double> v) {
  return std::adjacent_find(v.begin(), v.end(), std::not_equal_to<>()) == v.end();
}

MeanSd normal_fit(std::span<const double> v, Kind kind) {
  const auto m = population_moments(v);
  if (all_equal(v) || !(m.sd > 0.0)) {
    raise(ErrorKind::DegenerateData, std::string(kind_name(kind)) + " fit: all samples are equal");
  }
  return m;
}

Weibull fit_weibull(std::span<const double> samples) {
  if (all_equal(samples)) raise(ErrorKind::DegenerateData, "weibull fit: all samples are equal");

  // The shape estimate is scale free, so work with y = x / max(x) ∈ (0, 1]:
  // y^k never overflows and the largest term keeps Σ y^k ≥ 1.
  const double xmax = *std::max_element(samples.begin(), samples.end());
  std::vector<double> log_y(samples.size());
  std::transform(samples.begin(), samples.end(), log_y.begin(), [xmax](double x) { return std::log(x / xmax); });
  const double mean_log_y = std::accumulate(log_y.begin(), log_y.end(), 0.0) / static_cast<double>(log_y.size());

  auto score = [&](double k) {
    double sum_w = 0.0;
    double sum_wl = 0.0;
    for (double ly : log_y) {
      const double w = std::exp(k * ly);
      sum_w += w;
      sum_wl += w * ly;
    }
    return sum_wl / sum_w - 1.0 / k - mean_log_y;
  };

  double lo = 1e-3;
  double hi = 1e3;
  double g_lo = score(lo);
  const double g_hi = score(hi);
  if (std::signbit(g_lo) == std::signbit(g_hi)) {
    raise(ErrorKind::FitFailure, "weibull shape score has no sign change on [1e-3, 1e3]");
  }

  double k = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    k = 0.5 * (lo + hi);
    const double g = score(k);
    if (std::abs(g) <= 1e-10 || k == lo || k == hi) break;
    if (std::signbit(g) == std::signbit(g_lo)) {
      lo = k;
      g_lo = g;
    } else {
      hi = k;
    }
  }

  double mean_yk = 0.0;
  for (double ly : log_y) mean_yk += std::exp(k * ly);
  mean_yk /= static_cast<double>(log_y.size());
  return {k, xmax * std::pow(mean_yk, 1.0 / k)};
}

}  // namespace

std::string_view kind_name(Kind kind) {
  switch (kind) {
    case Kind::LogNormal: return "lognormal";
    case Kind::Gaussian: return "gaussian";
    case Kind::Weibull: return "weibull";
    case Kind::Exponential: return "exponential";
    case Kind::PowerLaw: return "powerlaw";
  }
  return "unknown";
}

std::optional<Kind> parse_kind(std::string_view name) {
  for (Kind k : kAllKinds) {
    if (kind_name(k) == name) return k;
  }
  if (name == "normal") return Kind::Gaussian;
  if (name == "power_law" || name == "power-law") return Kind::PowerLaw;
  return std::nullopt;
}

Kind kind_of(const Model& model) {
  return std::visit(Overloaded{
                        [](const LogNormal&) { return Kind::LogNormal; },
                        [](const Gaussian&) { return Kind::Gaussian; },
                        [](const Weibull&) { return Kind::Weibull; },
                        [](const Exponential&) { return Kind::Exponential; },
                        [](const PowerLaw&) { return Kind::PowerLaw; },
                    },
                    model);
}

void check_parameters(const Model& model) {
  auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
  const bool ok = std::visit(Overloaded{
                                 [&](const LogNormal& m) { return std::isfinite(m.mu) && positive(m.sigma); },
                                 [&](const Gaussian& m) { return std::isfinite(m.mean) && positive(m.sd); },
                                 [&](const Weibull& m) { return positive(m.shape) && positive(m.scale); },
                                 [&](const Exponential& m) { return positive(m.rate); },
                                 [&](const PowerLaw& m) { return m.alpha > 1.0 && std::isfinite(m.alpha) && positive(m.xmin); },
                             },
                             model);
  if (!ok) raise(ErrorKind::DomainError, std::string(kind_name(kind_of(model))) + " parameters out of range");
}

double log_pdf(const Model& model, double x) {
  return std::visit(
      Overloaded{
          [x](const LogNormal& m) {
            if (!(x > 0.0)) return -kInf;
            const double lx = std::log(x);
            const double z = (lx - m.mu) / m.sigma;
            return -lx - std::log(m.sigma) - kLogSqrt2Pi - 0.5 * z * z;
          },
          [x](const Gaussian& m) {
            const double z = (x - m.mean) / m.sd;
            return -std::log(m.sd) - kLogSqrt2Pi - 0.5 * z * z;
          },
          [x](const Weibull& m) {
            if (x < 0.0) return -kInf;
            if (x == 0.0) {
              if (m.shape == 1.0) return -std::log(m.scale);
              return m.shape < 1.0 ? kInf : -kInf;
            }
            const double lr = std::log(x / m.scale);
            return std::log(m.shape / m.scale) + (m.shape - 1.0) * lr - std::exp(m.shape * lr);
          },
          [x](const Exponential& m) { return x < 0.0 ? -kInf : std::log(m.rate) - m.rate * x; },
          [x](const PowerLaw& m) {
            if (x < m.xmin) return -kInf;
            return std::log((m.alpha - 1.0) / m.xmin) - m.alpha * std::log(x / m.xmin);
          },
      },
      model);
}

double pdf(const Model& model, double x) { return std::exp(log_pdf(model, x)); }

double cdf(const Model& model, double x) {
  return std::visit(Overloaded{
                        [x](const LogNormal& m) {
                          if (!(x > 0.0)) return 0.0;
                          return 0.5 * std::erfc(-(std::log(x) - m.mu) / (m.sigma * std::numbers::sqrt2));
                        },
                        [x](const Gaussian& m) { return 0.5 * std::erfc(-(x - m.mean) / (m.sd * std::numbers::sqrt2)); },
                        [x](const Weibull& m) { return x <= 0.0 ? 0.0 : -std::expm1(-std::pow(x / m.scale, m.shape)); },
                        [x](const Exponential& m) { return x <= 0.0 ? 0.0 : -std::expm1(-m.rate * x); },
                        [x](const PowerLaw& m) {
                          if (x < m.xmin) return 0.0;
                          return -std::expm1((1.0 - m.alpha) * std::log(x / m.xmin));
                        },
                    },
                    model);
}

double normal_quantile(double p) {
  require_probability(p);
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

double quantile(const Model& model, double p) {
  require_probability(p);
  return std::visit(Overloaded{
                        [p](const LogNormal& m) { return std::exp(m.mu + m.sigma * normal_quantile(p)); },
                        [p](const Gaussian& m) { return m.mean + m.sd * normal_quantile(p); },
                        [p](const Weibull& m) { return m.scale * std::pow(-std::log1p(-p), 1.0 / m.shape); },
                        [p](const Exponential& m) { return -std::log1p(-p) / m.rate; },
                        [p](const PowerLaw& m) { return m.xmin * std::exp(-std::log1p(-p) / (m.alpha - 1.0)); },
                    },
                    model);
}

Model fit_mle(Kind kind, std::span<const double> samples, const FitOptions& options) {
  require_size(samples, options);
  switch (kind) {
    case Kind::LogNormal: {
      require_positive(samples, kind);
      std::vector<double> logs(samples.size());
      std::transform(samples.begin(), samples.end(), logs.begin(), [](double x) { return std::log(x); });
      const auto m = normal_fit(logs, kind);
      return LogNormal{m.mean, m.sd};
    }
    case Kind::Gaussian: {
      for (double x : samples) {
        if (!std::isfinite(x)) raise(ErrorKind::DomainError, "gaussian fit requires finite samples");
      }
      const auto m = normal_fit(samples, kind);
      return Gaussian{m.mean, m.sd};
    }
    case Kind::Weibull:
      require_positive(samples, kind);
      return fit_weibull(samples);
    case Kind::Exponential: {
      require_positive(samples, kind);
      const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(samples.size());
      return Exponential{1.0 / mean};
    }
    case Kind::PowerLaw:
      return fit_powerlaw(samples, options).model;
  }
  raise(ErrorKind::DomainError, "unknown distribution kind");
}

PowerLaw fit_powerlaw_alpha(std::span<const double> samples, double xmin) {
  if (!(xmin > 0.0)) raise(ErrorKind::DomainError, "power-law cutoff must be positive");
  std::size_t n_tail = 0;
  double sum_log = 0.0;
  for (double x : samples) {
    if (x >= xmin) {
      ++n_tail;
      sum_log += std::log(x / xmin);
    }
  }
  if (n_tail == 0 || !(sum_log > 0.0)) raise(ErrorKind::FitFailure, "power-law tail is empty or degenerate");
  return {1.0 + static_cast<double>(n_tail) / sum_log, xmin};
}

PowerLawFit fit_powerlaw_sorted(std::span<const double> x, const FitOptions& options) {
  require_size(x, options);
  if (!(x.front() > 0.0) || !std::isfinite(x.back())) {
    raise(ErrorKind::DomainError, "powerlaw fit requires positive finite samples");
  }
  const std::size_t n = x.size();
  const std::size_t min_tail = std::max<std::size_t>(options.min_samples, 1);

  // Start index of each distinct value; those are the candidate cutoffs.
  std::vector<std::size_t> starts;
  for (std::size_t i = 0; i < n; ++i) {
    if (i == 0 || x[i] != x[i - 1]) starts.push_back(i);
  }
  if (starts.size() > kMaxCutoffCandidates) {
    std::vector<std::size_t> thinned;
    thinned.reserve(kMaxCutoffCandidates);
    const double step = static_cast<double>(starts.size() - 1) / static_cast<double>(kMaxCutoffCandidates - 1);
    for (std::size_t j = 0; j < kMaxCutoffCandidates; ++j) {
      const auto idx = static_cast<std::size_t>(std::llround(step * static_cast<double>(j)));
      if (thinned.empty() || starts[idx] != thinned.back()) thinned.push_back(starts[idx]);
    }
    starts = std::move(thinned);
  }

  std::vector<double> log_x(n);
  std::transform(x.begin(), x.end(), log_x.begin(), [](double v) { return std::log(v); });
  std::vector<long double> suffix(n + 1, 0.0L);
  for (std::size_t i = n; i-- > 0;) suffix[i] = suffix[i + 1] + log_x[i];

  // Cutoffs are visited from the largest down: short tails are cheap and give
  // a tight incumbent early, so most long tails are rejected after a few
  // points. Ties go to the smaller cutoff, hence the non-strict comparisons.
  PowerLawFit best;
  bool found = false;
  for (auto it = starts.rbegin(); it != starts.rend(); ++it) {
    const std::size_t start = *it;
    const std::size_t n_tail = n - start;
    if (n_tail < min_tail) continue;
    const double log_xmin = log_x[start];
    const auto sum_log = static_cast<double>(suffix[start] - static_cast<long double>(n_tail) * log_xmin);
    if (!(sum_log > 0.0)) continue;
    const double alpha = 1.0 + static_cast<double>(n_tail) / sum_log;

    const double inv_n = 1.0 / static_cast<double>(n_tail);
    auto deviation = [&](std::size_t i) {
      const double f = -std::expm1((1.0 - alpha) * (log_x[start + i] - log_xmin));
      return std::max(static_cast<double>(i + 1) * inv_n - f, f - static_cast<double>(i) * inv_n);
    };

    // Any subset of points bounds the KS distance from below.
    bool beaten = false;
    if (found) {
      const std::size_t stride = std::max<std::size_t>(1, n_tail / 64);
      for (std::size_t i = 0; i < n_tail && !beaten; i += stride) beaten = deviation(i) > best.ks;
    }
    if (beaten) continue;

    double d = 0.0;
    for (std::size_t i = 0; i < n_tail; ++i) {
      d = std::max(d, deviation(i));
      if (found && d > best.ks) break;
    }
    if (!found || d <= best.ks) {
      best = {PowerLaw{alpha, x[start]}, d, n_tail};
      found = true;
    }
  }
  if (!found) {
    raise(ErrorKind::FitFailure, "no power-law cutoff leaves " + std::to_string(min_tail) + " distinct-tail samples");
  }
  return best;
}

PowerLawFit fit_powerlaw(std::span<const double> samples, const FitOptions& options) {
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  return fit_powerlaw_sorted(sorted, options);
}

std::vector<double> sample(const Model& model, std::size_t n, std::uint64_t seed) {
  check_parameters(model);
  CounterRng rng(seed);
  std::vector<double> out(n);
  std::visit(Overloaded{
                 [&](const LogNormal& m) {
                   for (auto& v : out) v = std::exp(m.mu + m.sigma * rng.normal());
                 },
                 [&](const Gaussian& m) {
                   for (auto& v : out) v = m.mean + m.sd * rng.normal();
                 },
                 [&](const Weibull& m) {
                   for (auto& v : out) v = m.scale * std::pow(-std::log(rng.uniform()), 1.0 / m.shape);
                 },
                 [&](const Exponential& m) {
                   for (auto& v : out) v = -std::log(rng.uniform()) / m.rate;
                 },
                 [&](const PowerLaw& m) {
                   for (auto& v : out) v = m.xmin * std::pow(rng.uniform(), -1.0 / (m.alpha - 1.0));
                 },
             },
             model);
  return out;
}

}  // namespace voluma
