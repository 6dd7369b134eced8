#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "voluma/distributions.hpp"
#include "voluma/gof.hpp"
#include "voluma/trace.hpp"

namespace voluma {

/// Which samples the power-law comparisons run on.
enum class LlrDomain {
  // Every positive sample; the power law is the full-support fit (cutoff at
  // the sample minimum) and alternatives are the full-sample fits.
  Full,
  // Samples ≥ the scanned cutoff; alternatives refit on that tail subset.
  Tail,
};

std::string_view domain_name(LlrDomain domain);

struct AnalysisOptions {
  std::vector<Kind> candidates{Kind::LogNormal, Kind::Gaussian, Kind::Weibull, Kind::Exponential};
  std::size_t bootstrap_reps = 1000;  // 0 skips the bootstrap
  std::uint64_t seed = 42;
  LlrDomain domain = LlrDomain::Full;
  double significance = 0.1;
  bool use_rates = false;  // fit volumes/T instead of volumes
  FitOptions fit;
  std::optional<double> capacity;  // bytes/s; peak rate when unset
  AnomalyThresholds thresholds;
  std::size_t workers = 0;
};

struct ModelFit {
  Kind kind = Kind::LogNormal;
  std::optional<Model> model;
  double ks = 0.0;
  std::optional<double> gamma;
  double log_likelihood = 0.0;
  std::string error;  // non-empty when the fit failed
};

struct PowerLawSection {
  std::optional<PowerLawFit> fit;
  std::optional<double> bootstrap_p;
  std::size_t bootstrap_reps = 0;
  bool plausible = false;
  std::optional<PowerLaw> comparator;  // the power law used in the likelihood ratios
  std::string error;
};

struct Comparison {
  Kind first = Kind::PowerLaw;
  Kind second = Kind::LogNormal;
  std::optional<LlrResult> result;
  std::string error;
};

struct FitReport {
  std::string source_label;
  double timescale = 0.0;
  std::size_t n_bins = 0;
  std::size_t n_samples = 0;
  std::size_t dropped_bins = 0;  // empty bins excluded from fitting
  bool use_rates = false;
  LlrDomain domain = LlrDomain::Full;
  double significance = 0.1;
  std::vector<ModelFit> models;
  PowerLawSection powerlaw;
  std::vector<Comparison> llr_vs_powerlaw;
  std::vector<Comparison> pairwise;
  std::optional<Kind> best_model;  // empty: inconclusive
  std::optional<Kind> unscreened_best_model;  // the selection before a failed anomaly screen
  AnomalyReport anomaly;

  const ModelFit* find(Kind kind) const;
  bool inconclusive() const { return !best_model.has_value(); }
};

/// Fits every candidate, runs the power-law bootstrap and the likelihood-ratio
/// tests, and picks the best model:
///  * alternatives qualify when they beat the power law (ℜ < 0, p < significance);
///  * qualifiers are ranked by ℜ, then the leader is challenged by each of the
///    others with a direct likelihood ratio and replaced on a significant loss;
///  * with no qualifier the result is the power law when the bootstrap found it
///    plausible (p > significance), otherwise inconclusive;
///  * a trace flagged by the anomaly screen is inconclusive whatever the fits say.
FitReport analyze(const VolumeSeries& vs, const AnalysisOptions& options);

nlohmann::json model_to_json(const Model& model);
Model model_from_json(const nlohmann::json& j);
nlohmann::json to_json(const LlrResult& r);
nlohmann::json to_json(const AnomalyReport& r);
nlohmann::json to_json(const FitReport& report);

}  // namespace voluma
