#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "voluma/distributions.hpp"
#include "voluma/ingest.hpp"

namespace voluma {

/// Nearest rank: the value at 1-based index ceil(pct/100·n) of the ascending sort.
double nearest_rank_percentile(std::span<const double> values, double pct);

/// Percentile of the per-group rates of `trace` grouped at `group_duration`.
/// InsufficientData below 2 groups.
double actual_percentile(const TraceInput& trace, double group_duration, double pct = 95.0);

double model_percentile(const Model& model, double pct = 95.0);

enum class Normalizer { Mean, Range };

std::optional<Normalizer> parse_normalizer(std::string_view name);

/// RMSE divided by mean(actual), or by max - min of actual.
double nrmse(std::span<const double> predicted, std::span<const double> actual,
             Normalizer normalizer = Normalizer::Mean);

struct BillingConfig {
  std::vector<Kind> kinds{Kind::LogNormal, Kind::Weibull, Kind::Gaussian};
  double group_duration = 10.0;  // s
  double fit_timescale = 0.1;    // s
  double percentile = 95.0;
  Normalizer normalizer = Normalizer::Mean;
  FitOptions fit;
  std::size_t workers = 0;
};

struct BillingRecord {
  std::string trace_label;
  std::optional<double> actual;             // bytes/s
  std::vector<std::optional<double>> predicted;  // parallel to BillingConfig::kinds
  std::vector<std::string> errors;          // per kind, empty when fine
  std::string error;                        // trace-level failure
};

struct KindScore {
  Kind kind = Kind::LogNormal;
  std::optional<double> nrmse;
  std::size_t traces = 0;  // traces with both actual and prediction
  std::string error;
};

struct BillingTable {
  std::vector<BillingRecord> records;  // sorted by trace label
  std::vector<KindScore> scores;       // parallel to BillingConfig::kinds
};

/// Fit at the fit timescale and predict the percentile from the model. A trace
/// whose positive rates are all equal predicts that constant for every kind.
std::optional<double> predicted_percentile(const TraceInput& trace, Kind kind, const BillingConfig& config,
                                           std::string* error = nullptr);

BillingTable billing_experiment(std::span<const TraceInput> traces, const BillingConfig& config);

}  // namespace voluma
