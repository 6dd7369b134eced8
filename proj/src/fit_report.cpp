#include "voluma/fit_report.hpp"

#include <algorithm>
#include <cmath>

#include "voluma/error.hpp"

namespace voluma {

using nlohmann::json;

namespace {

bool contains(const std::vector<Comparison>& list, Kind a, Kind b) {
  return std::any_of(list.begin(), list.end(), [&](const Comparison& c) {
    return (c.first == a && c.second == b) || (c.first == b && c.second == a);
  });
}

Comparison compare(std::span<const double> samples, Kind first, const Model& a, Kind second, const Model& b) {
  Comparison c;
  c.first = first;
  c.second = second;
  try {
    c.result = llr_compare(samples, a, b);
  } catch (const Error& e) {
    c.error = e.what();
  }
  return c;
}

double sum_log_pdf(std::span<const double> samples, const Model& model) {
  double s = 0.0;
  for (double x : samples) s += log_pdf(model, x);
  return s;
}

}  // namespace

std::string_view domain_name(LlrDomain domain) { return domain == LlrDomain::Full ? "full" : "tail"; }

const ModelFit* FitReport::find(Kind kind) const {
  for (const auto& m : models) {
    if (m.kind == kind) return &m;
  }
  return nullptr;
}

FitReport analyze(const VolumeSeries& vs, const AnalysisOptions& opt) {
  validate(vs);
  FitReport report;
  report.source_label = vs.source_label;
  report.timescale = vs.timescale;
  report.n_bins = vs.size();
  report.use_rates = opt.use_rates;
  report.domain = opt.domain;
  report.significance = opt.significance;

  const std::vector<double> values = opt.use_rates ? rates(vs) : vs.volumes;
  const std::vector<double> samples = positive_only(values);
  report.n_samples = samples.size();
  report.dropped_bins = values.size() - samples.size();

  const double capacity = opt.capacity.value_or(peak_rate(vs));
  if (capacity > 0.0) {
    report.anomaly = anomaly_screen(vs, capacity, opt.thresholds);
  } else {
    report.anomaly = {1.0, 0.0, true, 0.0};
  }

  [&] {
    std::vector<Kind> kinds;
    for (Kind k : opt.candidates) {
      if (k != Kind::PowerLaw && std::find(kinds.begin(), kinds.end(), k) == kinds.end()) kinds.push_back(k);
    }

    for (Kind k : kinds) {
      ModelFit mf;
      mf.kind = k;
      try {
        mf.model = fit_mle(k, samples, opt.fit);
        mf.ks = ks_statistic(samples, *mf.model);
        mf.log_likelihood = sum_log_pdf(samples, *mf.model);
        try {
          mf.gamma = ppcc(samples, *mf.model);
        } catch (const Error&) {
          mf.gamma.reset();
        }
      } catch (const Error& e) {
        mf.model.reset();
        mf.error = e.what();
      }
      report.models.push_back(std::move(mf));
    }

    auto& pl = report.powerlaw;
    try {
      pl.fit = fit_powerlaw(samples, opt.fit);
      if (opt.bootstrap_reps > 0) {
        const auto boot = bootstrap_pvalue(samples, *pl.fit, opt.bootstrap_reps, opt.seed, opt.fit, opt.workers);
        pl.bootstrap_p = boot.p_value;
        pl.bootstrap_reps = boot.reps;
        pl.plausible = boot.p_value > opt.significance;
      }
    } catch (const Error& e) {
      pl.error = e.what();
    }

    // Comparison sample and the alternatives evaluated on it.
    std::vector<double> domain_samples;
    std::vector<std::pair<Kind, Model>> alternatives;
    try {
      if (opt.domain == LlrDomain::Full) {
        if (samples.size() >= opt.fit.min_samples) {
          pl.comparator = fit_powerlaw_alpha(samples, *std::min_element(samples.begin(), samples.end()));
        }
        domain_samples = samples;
        for (const auto& mf : report.models) {
          if (mf.model) alternatives.emplace_back(mf.kind, *mf.model);
        }
      } else if (pl.fit) {
        pl.comparator = pl.fit->model;
        std::copy_if(samples.begin(), samples.end(), std::back_inserter(domain_samples),
                     [xmin = pl.fit->model.xmin](double x) { return x >= xmin; });
        for (Kind k : kinds) {
          try {
            alternatives.emplace_back(k, fit_mle(k, domain_samples, opt.fit));
          } catch (const Error& e) {
            Comparison c;
            c.second = k;
            c.error = e.what();
            report.llr_vs_powerlaw.push_back(c);
          }
        }
      }
    } catch (const Error& e) {
      if (pl.error.empty()) pl.error = e.what();
    }

    if (!pl.comparator) return;

    std::vector<std::size_t> qualifiers;  // indices into alternatives
    for (std::size_t i = 0; i < alternatives.size(); ++i) {
      const auto& [kind, model] = alternatives[i];
      auto c = compare(domain_samples, Kind::PowerLaw, *pl.comparator, kind, model);
      if (c.result && c.result->normalized < 0.0 && c.result->p_value < opt.significance) qualifiers.push_back(i);
      report.llr_vs_powerlaw.push_back(std::move(c));
    }

    if (qualifiers.empty()) {
      if (pl.plausible) report.best_model = Kind::PowerLaw;
      return;
    }

    auto normalized_of = [&](std::size_t i) {
      for (const auto& c : report.llr_vs_powerlaw) {
        if (c.second == alternatives[i].first && c.result) return c.result->normalized;
      }
      return 0.0;
    };
    std::stable_sort(qualifiers.begin(), qualifiers.end(),
                     [&](std::size_t a, std::size_t b) { return normalized_of(a) < normalized_of(b); });

    std::size_t leader = qualifiers.front();
    for (std::size_t q = 1; q < qualifiers.size(); ++q) {
      const std::size_t challenger = qualifiers[q];
      auto c = compare(domain_samples, alternatives[challenger].first, alternatives[challenger].second,
                       alternatives[leader].first, alternatives[leader].second);
      if (c.result && c.result->normalized > 0.0 && c.result->p_value < opt.significance) leader = challenger;
      report.pairwise.push_back(std::move(c));
    }
    report.best_model = alternatives[leader].first;

    // The log-normal/Weibull pair is always reported.
    const auto ln = std::find_if(alternatives.begin(), alternatives.end(),
                                 [](const auto& a) { return a.first == Kind::LogNormal; });
    const auto wb = std::find_if(alternatives.begin(), alternatives.end(),
                                 [](const auto& a) { return a.first == Kind::Weibull; });
    if (ln != alternatives.end() && wb != alternatives.end() &&
        !contains(report.pairwise, Kind::LogNormal, Kind::Weibull)) {
      report.pairwise.push_back(compare(domain_samples, Kind::LogNormal, ln->second, Kind::Weibull, wb->second));
    }
  }();

  // A trace dominated by outage or saturation has no trustworthy fit.
  if (report.anomaly.flagged) {
    report.unscreened_best_model = report.best_model;
    report.best_model.reset();
  }
  return report;
}

json model_to_json(const Model& model) {
  json j;
  j["kind"] = kind_name(kind_of(model));
  if (const auto* m = std::get_if<LogNormal>(&model)) {
    j["mu"] = m->mu;
    j["sigma"] = m->sigma;
  } else if (const auto* m = std::get_if<Gaussian>(&model)) {
    j["mean"] = m->mean;
    j["sd"] = m->sd;
  } else if (const auto* m = std::get_if<Weibull>(&model)) {
    j["shape_k"] = m->shape;
    j["scale_lambda"] = m->scale;
  } else if (const auto* m = std::get_if<Exponential>(&model)) {
    j["rate"] = m->rate;
  } else if (const auto* m = std::get_if<PowerLaw>(&model)) {
    j["alpha"] = m->alpha;
    j["xmin"] = m->xmin;
  }
  return j;
}

Model model_from_json(const json& j) {
  try {
    const auto kind = parse_kind(j.at("kind").get<std::string>());
    if (!kind) raise(ErrorKind::ParseError, "unknown model kind " + j.at("kind").dump());
    Model m;
    switch (*kind) {
      case Kind::LogNormal: m = LogNormal{j.at("mu").get<double>(), j.at("sigma").get<double>()}; break;
      case Kind::Gaussian: m = Gaussian{j.at("mean").get<double>(), j.at("sd").get<double>()}; break;
      case Kind::Weibull: m = Weibull{j.at("shape_k").get<double>(), j.at("scale_lambda").get<double>()}; break;
      case Kind::Exponential: m = Exponential{j.at("rate").get<double>()}; break;
      case Kind::PowerLaw: m = PowerLaw{j.at("alpha").get<double>(), j.at("xmin").get<double>()}; break;
    }
    check_parameters(m);
    return m;
  } catch (const json::exception& e) {
    raise(ErrorKind::ParseError, std::string("model JSON: ") + e.what());
  }
}

json to_json(const LlrResult& r) {
  return {{"R_normalized", r.normalized}, {"p_value", r.p_value}, {"log_ratio", r.log_ratio}, {"n", r.n}};
}

json to_json(const AnomalyReport& r) {
  return {{"outage_fraction", r.outage_fraction},
          {"saturation_fraction", r.saturation_fraction},
          {"flagged", r.flagged},
          {"capacity_used", r.capacity_used}};
}

json to_json(const FitReport& report) {
  json j;
  j["source"] = report.source_label;
  j["timescale_s"] = report.timescale;
  j["n_bins"] = report.n_bins;
  j["n_samples"] = report.n_samples;
  j["dropped_bins"] = report.dropped_bins;
  j["samples"] = report.use_rates ? "rates" : "volumes";
  j["llr_domain"] = domain_name(report.domain);
  j["significance"] = report.significance;

  json models = json::object();
  for (const auto& m : report.models) {
    json e;
    if (m.model) {
      e["params"] = model_to_json(*m.model);
      e["ks"] = m.ks;
      e["gamma"] = m.gamma ? json(*m.gamma) : json(nullptr);
      e["log_likelihood"] = m.log_likelihood;
    } else {
      e["error"] = m.error;
    }
    models[std::string(kind_name(m.kind))] = e;
  }
  j["models"] = models;

  json pl;
  const auto& p = report.powerlaw;
  if (p.fit) {
    pl["params"] = model_to_json(p.fit->model);
    pl["ks"] = p.fit->ks;
    pl["n_tail"] = p.fit->n_tail;
  }
  pl["bootstrap_p"] = p.bootstrap_p ? json(*p.bootstrap_p) : json(nullptr);
  pl["bootstrap_reps"] = p.bootstrap_reps;
  pl["plausible"] = p.plausible;
  if (p.comparator) pl["comparator"] = model_to_json(*p.comparator);
  if (!p.error.empty()) pl["error"] = p.error;
  j["powerlaw"] = pl;

  json llr = json::object();
  for (const auto& c : report.llr_vs_powerlaw) {
    llr[std::string(kind_name(c.second))] = c.result ? to_json(*c.result) : json{{"error", c.error}};
  }
  j["llr_vs_powerlaw"] = llr;

  json pairs = json::array();
  for (const auto& c : report.pairwise) {
    json e = c.result ? to_json(*c.result) : json{{"error", c.error}};
    e["first"] = kind_name(c.first);
    e["second"] = kind_name(c.second);
    pairs.push_back(e);
  }
  j["pairwise"] = pairs;
  j["best_model"] = report.best_model ? std::string(kind_name(*report.best_model)) : std::string("inconclusive");
  if (report.anomaly.flagged) {
    j["unscreened_best_model"] = report.unscreened_best_model ? json(kind_name(*report.unscreened_best_model))
                                                                : json("inconclusive");
  }
  j["anomaly"] = to_json(report.anomaly);
  return j;
}

}  // namespace voluma
