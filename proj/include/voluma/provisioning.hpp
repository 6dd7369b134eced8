#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "voluma/distributions.hpp"
#include "voluma/ingest.hpp"
#include "voluma/trace.hpp"

namespace voluma {

/// C1 = μ + (1/T)·sqrt(-2 ln ε · υ(T)), μ the mean rate. Bytes/s.
double capacity_meent(const SummaryStats& stats, double epsilon);

/// Headroom above the mean rate in capacity_meent.
double safety_margin(const SummaryStats& stats, double epsilon);

/// C2 = F⁻¹(1 - ε) for a model fitted to rates.
double capacity_quantile(const Model& model, double epsilon);

/// Fraction of bins with A_i ≥ C·T.
double empirical_epsilon(const VolumeSeries& vs, double capacity);

/// A provisioning method: a model kind for quantile provisioning, or
/// empty for Meent's formula.
using Method = std::optional<Kind>;

std::string method_name(const Method& method);
std::optional<Method> parse_method(std::string_view name);

struct ProvisioningConfig {
  std::vector<Method> methods{std::nullopt, Kind::LogNormal, Kind::Weibull};
  std::vector<double> epsilons{0.5, 0.1, 0.05, 0.01};
  std::vector<double> timescales{0.1, 0.5, 1.0};
  FitOptions fit;
  std::size_t workers = 0;
};

struct ProvisioningResult {
  std::string dataset;
  Method method;
  double timescale = 0.0;
  double epsilon = 0.0;
  double capacity = 0.0;  // bytes/s
  double epsilon_hat = 0.0;
  double abs_err = 0.0;
  std::string error;  // non-empty: cell failed, numbers are meaningless

  bool ok() const { return error.empty(); }
};

/// Per (method, ε, T) over all traces.
struct ProvisioningSummary {
  Method method;
  double timescale = 0.0;
  double epsilon = 0.0;
  std::size_t traces = 0;  // successful cells
  double mean_epsilon_hat = 0.0;
  double mean_abs_err = 0.0;
  double stderr_abs_err = 0.0;  // sd(|ε - ε̂|)/√traces, 0 for a single trace
};

struct ProvisioningTable {
  std::vector<ProvisioningResult> rows;  // trace, method, ε, T in config order
  std::vector<ProvisioningSummary> summary;
};

ProvisioningResult provision_cell(const VolumeSeries& vs, const Method& method, double epsilon,
                                  const FitOptions& fit = {});

ProvisioningTable provisioning_experiment(std::span<const TraceInput> traces, const ProvisioningConfig& config);

}  // namespace voluma
