#include "voluma/billing.hpp"

#include <algorithm>
#include <cmath>

#include "voluma/error.hpp"
#include "voluma/parallel.hpp"

namespace voluma {

namespace {

void check_pct(double pct) {
  if (!(pct > 0.0 && pct < 100.0)) raise(ErrorKind::DomainError, "percentile must lie in (0, 100)");
}

double predict(std::span<const double> rate_samples, Kind kind, const BillingConfig& config) {
  if (!rate_samples.empty() && std::all_of(rate_samples.begin(), rate_samples.end(),
                                           [&](double v) { return v == rate_samples.front(); })) {
    return rate_samples.front();
  }
  return model_percentile(fit_mle(kind, rate_samples, config.fit), config.percentile);
}

}  // namespace

double nearest_rank_percentile(std::span<const double> values, double pct) {
  check_pct(pct);
  if (values.empty()) raise(ErrorKind::EmptyInput, "percentile of no values");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());
  auto rank = static_cast<std::size_t>(std::ceil(pct / 100.0 * n));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

double actual_percentile(const TraceInput& trace, double group_duration, double pct) {
  check_pct(pct);
  const auto groups = volumes_at(trace, group_duration);
  if (groups.size() < 2) raise(ErrorKind::InsufficientData, "need at least 2 groups for a billing percentile");
  return nearest_rank_percentile(rates(groups), pct);
}

double model_percentile(const Model& model, double pct) {
  check_pct(pct);
  return quantile(model, pct / 100.0);
}

std::optional<Normalizer> parse_normalizer(std::string_view name) {
  if (name == "mean") return Normalizer::Mean;
  if (name == "range") return Normalizer::Range;
  return std::nullopt;
}

double nrmse(std::span<const double> predicted, std::span<const double> actual, Normalizer normalizer) {
  if (predicted.size() != actual.size()) raise(ErrorKind::ShapeError, "predicted and actual differ in length");
  if (actual.empty()) raise(ErrorKind::EmptyInput, "NRMSE of no values");
  const auto n = static_cast<double>(actual.size());
  double ss = 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    ss += (predicted[i] - actual[i]) * (predicted[i] - actual[i]);
    sum += actual[i];
  }
  double scale = 0.0;
  if (normalizer == Normalizer::Mean) {
    scale = sum / n;
  } else {
    const auto [lo, hi] = std::minmax_element(actual.begin(), actual.end());
    scale = *hi - *lo;
  }
  if (!(scale > 0.0)) raise(ErrorKind::DegenerateData, "NRMSE normalizer is zero");
  return std::sqrt(ss / n) / scale;
}

std::optional<double> predicted_percentile(const TraceInput& trace, Kind kind, const BillingConfig& config,
                                           std::string* error) {
  try {
    check_pct(config.percentile);
    const auto samples = positive_only(rates(volumes_at(trace, config.fit_timescale)));
    return predict(samples, kind, config);
  } catch (const Error& e) {
    if (error) *error = e.what();
    return std::nullopt;
  }
}

BillingTable billing_experiment(std::span<const TraceInput> traces, const BillingConfig& config) {
  if (traces.empty()) raise(ErrorKind::EmptyInput, "no traces");
  check_pct(config.percentile);
  const std::size_t nk = config.kinds.size();

  BillingTable table;
  table.records.resize(traces.size());
  parallel_for(
      traces.size(),
      [&](std::size_t t) {
        auto& rec = table.records[t];
        rec.trace_label = label_of(traces[t]);
        rec.predicted.assign(nk, std::nullopt);
        rec.errors.assign(nk, std::string{});
        try {
          rec.actual = actual_percentile(traces[t], config.group_duration, config.percentile);
          const auto samples = positive_only(rates(volumes_at(traces[t], config.fit_timescale)));
          for (std::size_t k = 0; k < nk; ++k) {
            try {
              rec.predicted[k] = predict(samples, config.kinds[k], config);
            } catch (const Error& e) {
              rec.errors[k] = e.what();
            }
          }
        } catch (const Error& e) {
          rec.error = e.what();
        }
      },
      config.workers);

  std::stable_sort(table.records.begin(), table.records.end(),
                   [](const BillingRecord& a, const BillingRecord& b) { return a.trace_label < b.trace_label; });

  for (std::size_t k = 0; k < nk; ++k) {
    KindScore score;
    score.kind = config.kinds[k];
    std::vector<double> pred;
    std::vector<double> act;
    for (const auto& rec : table.records) {
      if (rec.actual && rec.predicted[k]) {
        pred.push_back(*rec.predicted[k]);
        act.push_back(*rec.actual);
      }
    }
    score.traces = act.size();
    try {
      score.nrmse = nrmse(pred, act, config.normalizer);
    } catch (const Error& e) {
      score.error = e.what();
    }
    table.scores.push_back(score);
  }
  return table;
}

}  // namespace voluma
