#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "support.hpp"
#include "voluma/gof.hpp"
#include "voluma/synthgen.hpp"

using namespace voluma;
using testing::error_kind_of;

namespace {

// Supremum of |F_n - F| by counting, over the samples (both step sides) and a
// dense grid; no sorting-index arithmetic shared with the library.
double brute_force_ks(const std::vector<double>& xs, const Model& m) {
  const auto n = static_cast<double>(xs.size());
  auto count = [&](double x, bool inclusive) {
    return static_cast<double>(std::count_if(xs.begin(), xs.end(), [&](double v) { return inclusive ? v <= x : v < x; }));
  };
  double d = 0.0;
  for (double x : xs) {
    const double f = cdf(m, x);
    d = std::max({d, std::abs(count(x, true) / n - f), std::abs(count(x, false) / n - f)});
  }
  const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  const double span = *hi - *lo;
  for (int g = 0; g <= 2000; ++g) {
    const double x = *lo - 0.1 * span + 1.2 * span * g / 2000.0;
    d = std::max(d, std::abs(count(x, true) / n - cdf(m, x)));
  }
  return d;
}

}  // namespace

TEST_SUITE("gof") {
  TEST_CASE("KS special cases") {
    const Model m = Gaussian{3.0, 2.0};
    const std::vector<double> median{3.0};
    CHECK(ks_statistic(median, m) == doctest::Approx(0.5).epsilon(1e-15));

    const std::size_t n = 40;
    std::vector<double> mid(n);
    for (std::size_t i = 0; i < n; ++i) mid[i] = quantile(m, (static_cast<double>(i) + 0.5) / static_cast<double>(n));
    CHECK(std::abs(ks_statistic(mid, m) - 0.5 / static_cast<double>(n)) <= 1e-12);
  }

  TEST_CASE("KS equals brute force") {
    auto rng = testing::reference_rng(41);
    for (int c = 0; c < 100; ++c) {
      Model m;
      switch (c % 4) {
        case 0: m = LogNormal{1.0, 0.6}; break;
        case 1: m = Gaussian{0.0, 1.5}; break;
        case 2: m = Weibull{0.8 + 0.01 * c, 3.0}; break;
        default: m = Exponential{0.5}; break;
      }
      // Samples from a nearby model so D is not trivially small; a few ties.
      auto xs = sample(m, 20 + c, rng());
      for (auto& v : xs) v *= 1.1;
      if (c % 3 == 0) xs.push_back(xs.front());
      CHECK(std::abs(ks_statistic(xs, m) - brute_force_ks(xs, m)) <= 1e-12);
    }
  }

  TEST_CASE("power-law KS uses the tail only") {
    const PowerLaw pl{2.5, 2.0};
    const auto xs = sample(pl, 200, 5);
    auto with_body = xs;
    with_body.insert(with_body.end(), {0.1, 0.5, 1.9});
    CHECK(ks_statistic(with_body, pl) == ks_statistic(xs, pl));
  }

  TEST_CASE("KS log-transform invariance is exact") {
    const auto x = sample(LogNormal{2, 0.5}, 3000, 8);
    std::vector<double> logs(x.size());
    std::transform(x.begin(), x.end(), logs.begin(), [](double v) { return std::log(v); });
    const auto ln = fit_mle(Kind::LogNormal, x);
    const auto g = fit_mle(Kind::Gaussian, logs);
    CHECK(ks_statistic(x, ln) == ks_statistic(logs, g));
  }

  TEST_CASE("bootstrap extremes") {
    // Exact power-law quantiles: the observed distance is smaller than any
    // random replicate.
    std::vector<double> exact;
    for (int i = 0; i < 500; ++i) exact.push_back(quantile(PowerLaw{2.5, 1.0}, (i + 0.5) / 500.0));
    CHECK(bootstrap_pvalue(exact, 100, 1).p_value == 1.0);

    // Uniform data is nothing like a power law.
    std::vector<double> flat;
    for (int i = 0; i < 3000; ++i) flat.push_back(1.0 + i / 3000.0);
    CHECK(bootstrap_pvalue(flat, 100, 1).p_value == 0.0);
  }

  TEST_CASE("bootstrap is deterministic across worker counts") {
    const auto x = sample(LogNormal{2, 1.0}, 2000, 12);
    const auto a = bootstrap_pvalue(x, 100, 77, {}, 1);
    const auto b = bootstrap_pvalue(x, 100, 77, {}, 3);
    const auto c = bootstrap_pvalue(x, 100, 77, {}, 8);
    CHECK(a.replicate_ks == b.replicate_ks);
    CHECK(a.replicate_ks == c.replicate_ks);
    CHECK(a.p_value == b.p_value);
    CHECK(bootstrap_pvalue(x, 100, 78, {}, 1).replicate_ks != a.replicate_ks);
  }

  TEST_CASE("bootstrap p counts replicates at or above the observed distance") {
    const auto x = sample(Weibull{1.2, 5.0}, 1500, 4);
    const auto r = bootstrap_pvalue(x, 120, 9);
    const auto ge = std::count_if(r.replicate_ks.begin(), r.replicate_ks.end(), [&](double d) { return d >= r.observed_ks; });
    CHECK(r.p_value == static_cast<double>(ge) / 120.0);
    CHECK(r.observed_ks == fit_powerlaw(x).ks);
  }

  TEST_CASE("likelihood ratio basics") {
    const auto x = sample(LogNormal{0, 1}, 1000, 3);
    const Model m = LogNormal{0, 1};
    const auto same = llr_compare(x, m, m);
    CHECK(same.normalized == 0.0);
    CHECK(same.p_value == 1.0);

    const Model a = fit_mle(Kind::LogNormal, x);
    const Model b = fit_mle(Kind::Weibull, x);
    const auto ab = llr_compare(x, a, b);
    const auto ba = llr_compare(x, b, a);
    CHECK(ab.normalized == -ba.normalized);
    CHECK(ab.p_value == ba.p_value);
    CHECK(ab.log_ratio == -ba.log_ratio);
    CHECK(ab.p_value >= 0.0);
    CHECK(ab.p_value <= 1.0);
  }

  TEST_CASE("likelihood ratio by hand") {
    // d_i = ln f_a - ln f_b for two Gaussians with unit sd: (x-1)^2/2 - x^2/2 ... computed directly.
    const std::vector<double> x{0.0, 1.0, 2.0, 4.0};
    const Model a = Gaussian{0.0, 1.0};
    const Model b = Gaussian{1.0, 1.0};
    std::vector<double> d;
    for (double v : x) d.push_back(0.5 * ((v - 1.0) * (v - 1.0) - v * v));
    double sum = 0.0;
    for (double v : d) sum += v;
    const double mean = sum / 4.0;
    double ss = 0.0;
    for (double v : d) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / 4.0);
    const auto r = llr_compare(x, a, b);
    CHECK(r.log_ratio == doctest::Approx(sum).epsilon(1e-14));
    CHECK(r.normalized == doctest::Approx(sum / (sd * 2.0)).epsilon(1e-14));
    CHECK(r.p_value == doctest::Approx(std::erfc(std::abs(sum) / (sd * std::sqrt(8.0)))).epsilon(1e-14));
  }

  TEST_CASE("log-normal data beats the power law") {
    const auto x = sample(LogNormal{0, 1}, 10000, 21);
    // Full-support comparison.
    const auto pl = fit_powerlaw_alpha(x, *std::min_element(x.begin(), x.end()));
    const auto r = llr_compare(x, pl, fit_mle(Kind::LogNormal, x));
    CHECK(r.normalized < 0.0);
    CHECK(r.p_value < 0.1);
  }

  TEST_CASE("zero density is an evaluation error naming the model") {
    const std::vector<double> x{0.5, 2.0, 3.0};
    try {
      llr_compare(x, PowerLaw{2.0, 1.0}, Exponential{1.0});
      FAIL("expected EvaluationError");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::EvaluationError);
      CHECK(std::string(e.what()).find("powerlaw") != std::string::npos);
    }
  }

  TEST_CASE("ppcc") {
    const Model m = LogNormal{1, 0.5};
    const std::size_t n = 200;
    std::vector<double> exact(n);
    std::vector<double> affine(n);
    for (std::size_t i = 0; i < n; ++i) {
      exact[i] = quantile(m, static_cast<double>(i + 1) / static_cast<double>(n + 1));
      affine[i] = 2.0 * exact[i] + 7.0;
    }
    CHECK(ppcc(exact, m) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ppcc(affine, m) == doctest::Approx(1.0).epsilon(1e-12));
    const std::vector<double> flat(10, 4.0);
    CHECK(error_kind_of([&] { ppcc(flat, m); }) == ErrorKind::DegenerateData);
    const std::vector<double> two{1.0, 2.0};
    CHECK(error_kind_of([&] { ppcc(two, m); }) == ErrorKind::InsufficientData);

    const auto x = sample(LogNormal{0, 1}, 10000, 2);
    CHECK(ppcc(x, fit_mle(Kind::LogNormal, x)) > 0.95);
  }

  TEST_CASE("ppcc scale invariance") {
    const auto x = sample(LogNormal{0.3, 0.8}, 2000, 14);
    const double base = ppcc(x, fit_mle(Kind::LogNormal, x));
    for (double c : {1e-3, 7.5, 1e5}) {
      std::vector<double> y(x.size());
      std::transform(x.begin(), x.end(), y.begin(), [c](double v) { return c * v; });
      CHECK(ppcc(y, fit_mle(Kind::LogNormal, y)) == doctest::Approx(base).epsilon(1e-9));
    }
  }

  TEST_CASE("gamma variation") {
    const std::vector<double> flat{0.97, 0.97, 0.97};
    CHECK(gamma_variation(flat) == 0.0);
    const std::vector<double> g{0.9, 0.9, 0.9, 1.0};
    CHECK(gamma_variation(g) == doctest::Approx(std::sqrt(0.001875)).epsilon(1e-12));
    CHECK(gamma_variation(g) == doctest::Approx(0.0433).epsilon(1e-3));
    auto perm = std::vector<double>{0.91, 0.99, 0.95, 0.97, 0.93};
    const double ref = gamma_variation(perm);
    std::sort(perm.begin(), perm.end());
    do {
      CHECK(gamma_variation(perm) == ref);
    } while (std::next_permutation(perm.begin(), perm.end()));
  }

  TEST_CASE("Q-Q points") {
    const Model m = Weibull{1.5, 2.0};
    const std::size_t n = 50;
    std::vector<double> exact(n);
    for (std::size_t i = 0; i < n; ++i) exact[i] = quantile(m, static_cast<double>(i + 1) / static_cast<double>(n + 1));
    std::reverse(exact.begin(), exact.end());
    const auto pts = qq_points(exact, m);
    REQUIRE(pts.size() == n);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(pts[i].first == doctest::Approx(pts[i].second).epsilon(1e-12));
      if (i > 0) CHECK(pts[i].first > pts[i - 1].first);
    }
  }

  TEST_CASE("anomaly screen") {
    const VolumeSeries zeros{0.1, std::vector<double>(100, 0.0), 0, ""};
    auto r = anomaly_screen(zeros, 1000.0);
    CHECK(r.outage_fraction == 1.0);
    CHECK(r.flagged);

    const VolumeSeries pinned{0.1, std::vector<double>(100, 100.0), 0, ""};
    r = anomaly_screen(pinned, 1000.0);
    CHECK(r.saturation_fraction == 1.0);
    CHECK(r.outage_fraction == 0.0);
    CHECK(r.flagged);

    SynthSpec spec;
    spec.n_bins = 5000;
    const auto clean = gen_volumes(spec).series;
    const double capacity = quantile(LogNormal{2.0, 0.5}, 0.999) / spec.timescale;
    CHECK_FALSE(anomaly_screen(clean, capacity).flagged);
    const auto broken = inject_anomaly(clean, {AnomalyKind::Outage, 0.1, 0.0}, 3);
    r = anomaly_screen(broken, capacity);
    CHECK(r.flagged);
    CHECK(r.outage_fraction == doctest::Approx(0.1).epsilon(0.01));
    CHECK(r.outage_fraction + r.saturation_fraction <= 1.0);

    CHECK(error_kind_of([&] { anomaly_screen(clean, 0.0); }) == ErrorKind::DomainError);
    CHECK(error_kind_of([&] { anomaly_screen(clean, 1.0, {0.5, 0.4, 0.05}); }) == ErrorKind::DomainError);
  }
}
