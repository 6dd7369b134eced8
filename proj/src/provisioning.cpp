#include "voluma/provisioning.hpp"

#include <cmath>

#include "voluma/error.hpp"
#include "voluma/parallel.hpp"

namespace voluma {

namespace {

void check_epsilon(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) raise(ErrorKind::DomainError, "epsilon must lie in (0, 1)");
}

}  // namespace

double safety_margin(const SummaryStats& stats, double epsilon) {
  check_epsilon(epsilon);
  if (!(stats.timescale > 0.0) || stats.volume_variance < 0.0) {
    raise(ErrorKind::DomainError, "summary statistics are invalid");
  }
  return std::sqrt(-2.0 * std::log(epsilon)) * std::sqrt(stats.volume_variance / (stats.timescale * stats.timescale));
}

double capacity_meent(const SummaryStats& stats, double epsilon) {
  return stats.mean_rate + safety_margin(stats, epsilon);
}

double capacity_quantile(const Model& model, double epsilon) {
  check_epsilon(epsilon);
  return quantile(model, 1.0 - epsilon);
}

double empirical_epsilon(const VolumeSeries& vs, double capacity) {
  if (!(capacity > 0.0)) raise(ErrorKind::DomainError, "capacity must be positive");
  if (vs.volumes.empty()) raise(ErrorKind::EmptyInput, "no bins");
  const double limit = capacity * vs.timescale;
  std::size_t over = 0;
  for (double v : vs.volumes) {
    if (v >= limit) ++over;
  }
  return static_cast<double>(over) / static_cast<double>(vs.size());
}

std::string method_name(const Method& method) { return method ? std::string(kind_name(*method)) : "meent"; }

std::optional<Method> parse_method(std::string_view name) {
  if (name == "meent") return Method{};
  if (auto k = parse_kind(name)) return Method{*k};
  return std::nullopt;
}

ProvisioningResult provision_cell(const VolumeSeries& vs, const Method& method, double epsilon,
                                  const FitOptions& fit) {
  ProvisioningResult r;
  r.dataset = vs.source_label;
  r.method = method;
  r.timescale = vs.timescale;
  r.epsilon = epsilon;
  try {
    if (method) {
      const auto samples = positive_only(rates(vs));
      r.capacity = capacity_quantile(fit_mle(*method, samples, fit), epsilon);
    } else {
      r.capacity = capacity_meent(volume_stats(vs), epsilon);
    }
    if (!(r.capacity > 0.0) || !std::isfinite(r.capacity)) {
      raise(ErrorKind::DomainError, "computed capacity is not a positive number");
    }
    r.epsilon_hat = empirical_epsilon(vs, r.capacity);
    r.abs_err = std::abs(epsilon - r.epsilon_hat);
  } catch (const Error& e) {
    r.error = e.what();
  }
  return r;
}

ProvisioningTable provisioning_experiment(std::span<const TraceInput> traces, const ProvisioningConfig& config) {
  if (traces.empty()) raise(ErrorKind::EmptyInput, "no traces");
  for (double e : config.epsilons) check_epsilon(e);

  const std::size_t per_trace = config.methods.size() * config.epsilons.size() * config.timescales.size();
  ProvisioningTable table;
  table.rows.resize(traces.size() * per_trace);

  parallel_for(
      traces.size() * config.timescales.size(),
      [&](std::size_t job) {
        const std::size_t t = job / config.timescales.size();
        const std::size_t s = job % config.timescales.size();
        const double T = config.timescales[s];
        std::optional<VolumeSeries> vs;
        std::string failure;
        try {
          vs = volumes_at(traces[t], T);
        } catch (const Error& e) {
          failure = e.what();
        }
        for (std::size_t m = 0; m < config.methods.size(); ++m) {
          for (std::size_t e = 0; e < config.epsilons.size(); ++e) {
            const std::size_t idx =
                t * per_trace + (m * config.epsilons.size() + e) * config.timescales.size() + s;
            auto& row = table.rows[idx];
            if (vs) {
              row = provision_cell(*vs, config.methods[m], config.epsilons[e], config.fit);
            } else {
              row.dataset = label_of(traces[t]);
              row.method = config.methods[m];
              row.timescale = T;
              row.epsilon = config.epsilons[e];
              row.error = failure;
            }
          }
        }
      },
      config.workers);

  for (std::size_t c = 0; c < per_trace; ++c) {
    ProvisioningSummary s;
    const auto& first = table.rows[c];
    s.method = first.method;
    s.timescale = first.timescale;
    s.epsilon = first.epsilon;
    std::vector<const ProvisioningResult*> ok;
    for (std::size_t t = 0; t < traces.size(); ++t) {
      const auto& row = table.rows[t * per_trace + c];
      if (row.ok()) ok.push_back(&row);
    }
    s.traces = ok.size();
    if (!ok.empty()) {
      const auto n = static_cast<double>(ok.size());
      for (const auto* row : ok) {
        s.mean_epsilon_hat += row->epsilon_hat / n;
        s.mean_abs_err += row->abs_err / n;
      }
      if (ok.size() > 1) {
        double ss = 0.0;
        for (const auto* row : ok) ss += (row->abs_err - s.mean_abs_err) * (row->abs_err - s.mean_abs_err);
        s.stderr_abs_err = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
      }
    }
    table.summary.push_back(s);
  }
  return table;
}

}  // namespace voluma
