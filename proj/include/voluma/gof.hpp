#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "voluma/distributions.hpp"
#include "voluma/trace.hpp"

namespace voluma {

/// Normalized log-likelihood ratio between two fitted models on one sample.
/// Positive `normalized` favours the first model.
struct LlrResult {
  double normalized = 0.0;  // R / (σ √n)
  double p_value = 1.0;
  double log_ratio = 0.0;  // R = Σ ln f_a(x_i) - ln f_b(x_i)
  std::size_t n = 0;
};

/// Two-sided KS distance between the empirical CDF and the model CDF. For a
/// PowerLaw only samples ≥ xmin take part.
double ks_statistic(std::span<const double> samples, const Model& model);

struct BootstrapResult {
  double p_value = 0.0;
  double observed_ks = 0.0;
  std::size_t reps = 0;
  PowerLawFit fit;
  std::vector<double> replicate_ks;
};

/// Semi-parametric bootstrap goodness-of-fit for the power law. Replicate r
/// draws from CounterRng(derive_seed(seed, r)); results combine in replicate
/// order, so the p-value does not depend on the worker count.
BootstrapResult bootstrap_pvalue(std::span<const double> samples, std::size_t reps, std::uint64_t seed,
                                 const FitOptions& options = {}, std::size_t workers = 0);

/// Same, reusing an already computed fit of `samples`.
BootstrapResult bootstrap_pvalue(std::span<const double> samples, const PowerLawFit& fit, std::size_t reps,
                                 std::uint64_t seed, const FitOptions& options = {}, std::size_t workers = 0);

/// Vuong-style comparison on exactly the given samples. EvaluationError when
/// either model has zero (or infinite) density at a sample.
LlrResult llr_compare(std::span<const double> samples, const Model& a, const Model& b);

/// Probability-plot correlation coefficient between the order statistics and
/// the model quantiles at i/(n+1).
double ppcc(std::span<const double> samples, const Model& model);

/// Square root of the population variance of γ across timescales.
double gamma_variation(std::span<const double> gammas);

/// (F⁻¹(i/(n+1)), S_(i)) for i = 1..n.
std::vector<std::pair<double, double>> qq_points(std::span<const double> samples, const Model& model);

struct AnomalyThresholds {
  double outage = 0.01;      // bin counts as an outage at ≤ outage·C·T
  double saturation = 0.95;  // bin counts as saturated at ≥ saturation·C·T
  double flag_fraction = 0.05;
};

struct AnomalyReport {
  double outage_fraction = 0.0;
  double saturation_fraction = 0.0;
  bool flagged = false;
  double capacity_used = 0.0;  // bytes/s
};

AnomalyReport anomaly_screen(const VolumeSeries& vs, double capacity, const AnomalyThresholds& thresholds = {});

/// Largest per-bin rate; the capacity assumed when none is configured.
double peak_rate(const VolumeSeries& vs);

}  // namespace voluma
