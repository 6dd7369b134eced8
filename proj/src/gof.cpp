#include "voluma/gof.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "voluma/error.hpp"
#include "voluma/parallel.hpp"
#include "voluma/random.hpp"

namespace voluma {

namespace {

double ks_sorted(std::span<const double> sorted, const Model& model) {
  const auto n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(model, sorted[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double log_density_or_throw(const Model& model, double x) {
  const double l = log_pdf(model, x);
  if (!std::isfinite(l)) {
    raise(ErrorKind::EvaluationError, std::string(kind_name(kind_of(model))) +
                                          " density is zero or unbounded at sample " + std::to_string(x));
  }
  return l;
}

}  // namespace

double ks_statistic(std::span<const double> samples, const Model& model) {
  std::vector<double> sorted;
  if (const auto* pl = std::get_if<PowerLaw>(&model)) {
    std::copy_if(samples.begin(), samples.end(), std::back_inserter(sorted),
                 [xmin = pl->xmin](double x) { return x >= xmin; });
  } else {
    sorted.assign(samples.begin(), samples.end());
  }
  if (sorted.empty()) raise(ErrorKind::InsufficientData, "KS statistic needs at least one sample in the support");
  std::sort(sorted.begin(), sorted.end());
  return ks_sorted(sorted, model);
}

BootstrapResult bootstrap_pvalue(std::span<const double> samples, std::size_t reps, std::uint64_t seed,
                                 const FitOptions& options, std::size_t workers) {
  return bootstrap_pvalue(samples, fit_powerlaw(samples, options), reps, seed, options, workers);
}

BootstrapResult bootstrap_pvalue(std::span<const double> samples, const PowerLawFit& fit, std::size_t reps,
                                 std::uint64_t seed, const FitOptions& options, std::size_t workers) {
  if (reps == 0) raise(ErrorKind::DomainError, "bootstrap needs at least one replicate");

  std::vector<double> body;  // empirical values below the cutoff
  std::copy_if(samples.begin(), samples.end(), std::back_inserter(body),
               [xmin = fit.model.xmin](double x) { return x < xmin; });
  std::sort(body.begin(), body.end());
  const std::size_t n = samples.size();
  const double tail_prob = static_cast<double>(fit.n_tail) / static_cast<double>(n);
  const double inv_exponent = -1.0 / (fit.model.alpha - 1.0);

  BootstrapResult result;
  result.observed_ks = fit.ks;
  result.reps = reps;
  result.fit = fit;
  result.replicate_ks.assign(reps, 0.0);

  parallel_for(
      reps,
      [&](std::size_t r) {
        CounterRng rng(derive_seed(seed, r));
        std::vector<double> synthetic(n);
        for (auto& v : synthetic) {
          if (body.empty() || rng.uniform() < tail_prob) {
            v = fit.model.xmin * std::pow(rng.uniform(), inv_exponent);
          } else {
            const auto idx = static_cast<std::size_t>(rng.uniform() * static_cast<double>(body.size()));
            v = body[std::min(idx, body.size() - 1)];
          }
        }
        std::sort(synthetic.begin(), synthetic.end());
        result.replicate_ks[r] = fit_powerlaw_sorted(synthetic, options).ks;
      },
      workers);

  const auto at_least = std::count_if(result.replicate_ks.begin(), result.replicate_ks.end(),
                                      [obs = fit.ks](double d) { return d >= obs; });
  result.p_value = static_cast<double>(at_least) / static_cast<double>(reps);
  return result;
}

LlrResult llr_compare(std::span<const double> samples, const Model& a, const Model& b) {
  if (samples.empty()) raise(ErrorKind::InsufficientData, "likelihood ratio needs samples");
  std::vector<double> d(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    d[i] = log_density_or_throw(a, samples[i]) - log_density_or_throw(b, samples[i]);
  }
  const auto n = static_cast<double>(d.size());
  const double sum = std::accumulate(d.begin(), d.end(), 0.0);
  const double mean = sum / n;
  double ss = 0.0;
  for (double v : d) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / n);

  LlrResult r;
  r.n = d.size();
  r.log_ratio = sum;
  if (std::all_of(d.begin(), d.end(), [](double v) { return v == 0.0; })) return r;
  if (!(sd > 0.0)) {
    // Constant non-zero log ratio: the decision is certain.
    r.normalized = std::copysign(std::numeric_limits<double>::infinity(), sum);
    r.p_value = 0.0;
    return r;
  }
  r.normalized = sum / (sd * std::sqrt(n));
  r.p_value = std::erfc(std::abs(sum) / (sd * std::sqrt(2.0 * n)));
  return r;
}

double ppcc(std::span<const double> samples, const Model& model) {
  const std::size_t n = samples.size();
  if (n < 3) raise(ErrorKind::InsufficientData, "PPCC needs at least 3 samples");
  std::vector<double> s(samples.begin(), samples.end());
  std::sort(s.begin(), s.end());
  std::vector<double> q(n);
  for (std::size_t i = 0; i < n; ++i) {
    q[i] = quantile(model, static_cast<double>(i + 1) / static_cast<double>(n + 1));
    if (!std::isfinite(q[i])) raise(ErrorKind::DomainError, "reference quantile is not finite");
  }
  const double mean_s = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(n);
  const double mean_q = std::accumulate(q.begin(), q.end(), 0.0) / static_cast<double>(n);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ds = s[i] - mean_s;
    const double dq = q[i] - mean_q;
    sxy += ds * dq;
    sxx += ds * ds;
    syy += dq * dq;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) raise(ErrorKind::DegenerateData, "PPCC: zero variance in samples or quantiles");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double gamma_variation(std::span<const double> gammas) {
  if (gammas.size() < 2) raise(ErrorKind::InsufficientData, "gamma variation needs at least 2 timescales");
  // Sorting first makes the result independent of input order bit for bit.
  std::vector<double> g(gammas.begin(), gammas.end());
  std::sort(g.begin(), g.end());
  const auto n = static_cast<double>(g.size());
  // Deviations from the smallest value; equal inputs give exactly zero.
  double shift_sum = 0.0;
  for (double v : g) shift_sum += v - g.front();
  const double mean = shift_sum / n;
  double ss = 0.0;
  for (double v : g) ss += (v - g.front() - mean) * (v - g.front() - mean);
  return std::sqrt(ss / n);
}

std::vector<std::pair<double, double>> qq_points(std::span<const double> samples, const Model& model) {
  const std::size_t n = samples.size();
  if (n < 2) raise(ErrorKind::InsufficientData, "Q-Q plot needs at least 2 samples");
  std::vector<double> s(samples.begin(), samples.end());
  std::sort(s.begin(), s.end());
  std::vector<std::pair<double, double>> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = {quantile(model, static_cast<double>(i + 1) / static_cast<double>(n + 1)), s[i]};
  }
  return out;
}

AnomalyReport anomaly_screen(const VolumeSeries& vs, double capacity, const AnomalyThresholds& th) {
  if (!(capacity > 0.0) || !std::isfinite(capacity)) raise(ErrorKind::DomainError, "capacity must be positive");
  if (!(th.outage >= 0.0 && th.outage < th.saturation && th.saturation <= 1.0)) {
    raise(ErrorKind::DomainError, "anomaly thresholds must satisfy 0 ≤ outage < saturation ≤ 1");
  }
  validate(vs);
  const double full = capacity * vs.timescale;
  std::size_t outage = 0;
  std::size_t saturated = 0;
  for (double v : vs.volumes) {
    if (v <= th.outage * full) ++outage;
    else if (v >= th.saturation * full) ++saturated;
  }
  const auto n = static_cast<double>(vs.size());
  AnomalyReport r;
  r.outage_fraction = static_cast<double>(outage) / n;
  r.saturation_fraction = static_cast<double>(saturated) / n;
  r.flagged = r.outage_fraction > th.flag_fraction || r.saturation_fraction > th.flag_fraction;
  r.capacity_used = capacity;
  return r;
}

double peak_rate(const VolumeSeries& vs) {
  validate(vs);
  return *std::max_element(vs.volumes.begin(), vs.volumes.end()) / vs.timescale;
}

}  // namespace voluma
