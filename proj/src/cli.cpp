#include "voluma/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "voluma/billing.hpp"
#include "voluma/error.hpp"
#include "voluma/fit_report.hpp"
#include "voluma/gof.hpp"
#include "voluma/ingest.hpp"
#include "voluma/provisioning.hpp"
#include "voluma/random.hpp"
#include "voluma/synthgen.hpp"
#include "voluma/textio.hpp"

namespace voluma::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kFitFooter = R"(Outputs per input and timescale, in --out:
  <stem>.T<ms>ms.fit.json  fit report
  <stem>.T<ms>ms.qq.<model>.tsv   theoretical, empirical  (Q-Q points; power law on its tail)
  <stem>.T<ms>ms.pdf.tsv           x, density  (log-binned empirical density)
  <stem>.T<ms>ms.pdf.<model>.tsv   x, density  (fitted density at the same bin centres)
With two or more timescales also:
  <stem>.gamma.tsv         T_ms, model, gamma
  <stem>.gamma.json        per-model gamma by timescale and its standard deviation
Exit status 2 when any report is inconclusive or flagged by the anomaly screen.)";

constexpr const char* kProvisionFooter = R"(Outputs in --out:
  provision.tsv          dataset, model, T_ms, epsilon, C_bps, epsilon_hat, abs_err
                         (+ outage_fraction, saturation_fraction, flagged with --capacity)
  provision_summary.tsv  model, T_ms, epsilon, traces, mean_epsilon_hat, mean_abs_err, stderr_abs_err
  provision.json         rows and summary
C_bps is in bytes per second. Model "meent" is the Gaussian closed form.)";

constexpr const char* kBillFooter = R"(Outputs in --out:
  bill.tsv          trace, actual_bps, then predicted_<model> per model
  bill_scatter.tsv  model, actual_bps, predicted_bps
  bill.json         NRMSE per model and per-trace records)";

constexpr const char* kScreenFooter = R"(Outputs in --out:
  screen.tsv   dataset, T_ms, capacity_bps, outage_fraction, saturation_fraction, flagged
  screen.json  same records
Exit status 2 when any trace is flagged.)";

constexpr const char* kReportFooter = R"(Reads fit report JSON files. Outputs in --out:
  report.tsv   source, T_ms, best_model, flagged, model, ks, gamma, R_vs_powerlaw, p_vs_powerlaw
  report.json  the input reports as one array)";

struct Loaded {
  fs::path path;
  std::string stem;
  TraceInput trace;
};

struct Shared {
  std::vector<std::string> inputs;
  std::string out_dir = ".";
  std::string format = "all";
  double reorder_slack = 0.0;
};

bool want_tsv(const Shared& s) { return s.format != "json"; }
bool want_json(const Shared& s) { return s.format != "tsv"; }

std::string num(double v) { return format_double(v); }

std::string num_or_na(const std::optional<double>& v) { return v ? num(*v) : "NA"; }

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::vector<double> parse_durations(const std::vector<std::string>& texts) {
  std::vector<double> out;
  for (const auto& t : texts) {
    const auto d = parse_duration(t);
    if (!d) raise(ErrorKind::ParseError, "invalid timescale '" + t + "'");
    out.push_back(*d);
  }
  return out;
}

std::vector<Kind> parse_kinds(const std::vector<std::string>& names) {
  std::vector<Kind> out;
  for (const auto& n : names) {
    const auto k = parse_kind(n);
    if (!k) raise(ErrorKind::ParseError, "unknown distribution '" + n + "'");
    out.push_back(*k);
  }
  return out;
}

std::vector<Loaded> load_all(const Shared& s) {
  std::vector<Loaded> out;
  std::map<std::string, int> seen;
  PcapReadOptions options;
  options.reorder_slack = s.reorder_slack;
  for (std::size_t i = 0; i < s.inputs.size(); ++i) {
    const fs::path p = s.inputs[i];
    std::string stem = p.stem().string();
    if (seen[stem]++ > 0) stem += "_" + std::to_string(i);
    out.push_back({p, stem, load_trace(p, options)});
  }
  return out;
}

fs::path output_path(const Shared& s, const std::string& name) {
  fs::create_directories(s.out_dir);
  return fs::path(s.out_dir) / name;
}

void write_json(const fs::path& path, const json& j) { write_file_atomic(path, j.dump(2) + "\n"); }

void add_threshold_options(CLI::App* cmd, AnomalyThresholds& th) {
  cmd->add_option("--outage-threshold", th.outage, "bin is an outage at <= this share of C*T")->capture_default_str();
  cmd->add_option("--saturation-threshold", th.saturation, "bin is saturated at >= this share of C*T")
      ->capture_default_str();
  cmd->add_option("--flag-fraction", th.flag_fraction, "flag a trace above this share of anomalous bins")
      ->capture_default_str();
}

void add_shared_options(CLI::App* cmd, Shared& s, bool traces = true) {
  cmd->add_option("--input,-i", s.inputs, traces ? "trace files (pcap, packet CSV or volume TSV)" : "input files")
      ->required();
  cmd->add_option("--out,-o", s.out_dir, "output directory")->capture_default_str();
  cmd->add_option("--format", s.format, "table formats to write")
      ->check(CLI::IsMember({"tsv", "json", "all"}))
      ->capture_default_str();
  if (traces) {
    cmd->add_option("--reorder-slack", s.reorder_slack, "tolerated pcap timestamp regression in seconds")
        ->capture_default_str();
  }
}

// ---------------------------------------------------------------- fit

struct FitArgs {
  Shared shared;
  std::vector<std::string> timescales{"100ms"};
  std::vector<std::string> dists{"lognormal", "gaussian", "weibull", "exponential"};
  std::size_t bootstrap_reps = 1000;
  std::uint64_t seed = 42;
  std::string domain = "full";
  std::string samples = "volumes";
  double significance = 0.1;
  std::optional<double> capacity;
  AnomalyThresholds thresholds;
  std::size_t hist_bins = 50;
};

// Plot data, one two-column TSV per series.
using PlotFiles = std::vector<std::pair<std::string, std::string>>;  // suffix, content

std::vector<std::pair<Kind, Model>> fitted_models(const FitReport& report) {
  std::vector<std::pair<Kind, Model>> models;
  for (const auto& m : report.models) {
    if (m.model) models.emplace_back(m.kind, *m.model);
  }
  if (report.powerlaw.fit) models.emplace_back(Kind::PowerLaw, report.powerlaw.fit->model);
  return models;
}

PlotFiles qq_files(std::span<const double> samples, const FitReport& report) {
  PlotFiles files;
  for (const auto& [kind, model] : fitted_models(report)) {
    std::vector<double> xs(samples.begin(), samples.end());
    if (const auto* pl = std::get_if<PowerLaw>(&model)) {
      std::erase_if(xs, [&](double x) { return x < pl->xmin; });
    }
    if (xs.size() < 2) continue;
    std::ostringstream os;
    os << "theoretical\tempirical\n";
    for (const auto& [q, v] : qq_points(xs, model)) os << num(q) << '\t' << num(v) << '\n';
    files.emplace_back("qq." + std::string(kind_name(kind)) + ".tsv", os.str());
  }
  return files;
}

PlotFiles pdf_files(std::span<const double> samples, const FitReport& report, std::size_t bins) {
  PlotFiles files;
  if (samples.empty() || bins == 0) return files;
  const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (!(hi > lo)) bins = 1;
  // Log-spaced bins: traffic volumes span orders of magnitude.
  auto edge = [&](std::size_t i) {
    if (i == 0) return lo;
    if (i == bins) return hi;
    return lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(bins));
  };
  std::vector<std::size_t> counts(bins, 0);
  for (double x : samples) {
    std::size_t idx = 0;
    if (hi > lo) idx = static_cast<std::size_t>(static_cast<double>(bins) * std::log(x / lo) / std::log(hi / lo));
    ++counts[std::min(idx, bins - 1)];
  }
  std::vector<double> centers(bins);
  std::ostringstream hist;
  hist << "x\tdensity\n";
  const auto n = static_cast<double>(samples.size());
  for (std::size_t i = 0; i < bins; ++i) {
    const double a = edge(i);
    const double b = edge(i + 1);
    centers[i] = std::sqrt(a * b);
    const double density = b > a ? static_cast<double>(counts[i]) / (n * (b - a)) : 0.0;
    hist << num(centers[i]) << '\t' << num(density) << '\n';
  }
  files.emplace_back("pdf.tsv", hist.str());
  for (const auto& [kind, model] : fitted_models(report)) {
    std::ostringstream os;
    os << "x\tdensity\n";
    for (double c : centers) os << num(c) << '\t' << num(pdf(model, c)) << '\n';
    files.emplace_back("pdf." + std::string(kind_name(kind)) + ".tsv", os.str());
  }
  return files;
}

int cmd_fit(const FitArgs& a, std::ostream& out, std::ostream& err) {
  const auto timescales = parse_durations(a.timescales);
  AnalysisOptions opt;
  opt.candidates = parse_kinds(a.dists);
  opt.bootstrap_reps = a.bootstrap_reps;
  opt.seed = a.seed;
  opt.domain = a.domain == "tail" ? LlrDomain::Tail : LlrDomain::Full;
  opt.use_rates = a.samples == "rates";
  opt.significance = a.significance;
  opt.capacity = a.capacity;
  opt.thresholds = a.thresholds;

  bool failed = false;
  bool signal = false;
  for (const auto& input : a.shared.inputs) {
    Shared one = a.shared;
    one.inputs = {input};
    std::vector<Loaded> loaded;
    try {
      loaded = load_all(one);
    } catch (const Error& e) {
      err << "error: " << e.what() << '\n';
      failed = true;
      continue;
    }
    auto& trace = loaded.front();
    std::map<Kind, std::vector<std::optional<double>>> gammas;
    for (double T : timescales) {
      try {
        const auto vs = volumes_at(trace.trace, T);
        const auto report = analyze(vs, opt);
        const auto samples = positive_only(opt.use_rates ? rates(vs) : vs.volumes);
        const std::string base = trace.stem + ".T" + duration_label(T);
        write_json(output_path(a.shared, base + ".fit.json"), to_json(report));
        for (const auto& [suffix, content] : qq_files(samples, report)) {
          write_file_atomic(output_path(a.shared, base + "." + suffix), content);
        }
        for (const auto& [suffix, content] : pdf_files(samples, report, a.hist_bins)) {
          write_file_atomic(output_path(a.shared, base + "." + suffix), content);
        }
        for (const auto& m : report.models) gammas[m.kind].push_back(m.gamma);

        const std::string best =
            report.best_model ? std::string(kind_name(*report.best_model)) : std::string("inconclusive");
        out << trace.stem << "\tT=" << duration_label(T) << "\tbest=" << best
            << "\tflagged=" << (report.anomaly.flagged ? "yes" : "no") << '\n';
        if (report.inconclusive() || report.anomaly.flagged) signal = true;
      } catch (const Error& e) {
        err << "error: " << trace.path.string() << " at T=" << duration_label(T) << ": " << e.what() << '\n';
        failed = true;
        for (auto& [k, g] : gammas) g.resize(g.size() + 1);
      }
    }

    if (timescales.size() >= 2 && !gammas.empty()) {
      std::ostringstream tsv;
      tsv << "T_ms\tmodel\tgamma\n";
      json j;
      json ms = json::array();
      for (double T : timescales) ms.push_back(T * 1000.0);
      j["timescales_ms"] = ms;
      json models = json::object();
      for (Kind k : opt.candidates) {
        const auto it = gammas.find(k);
        if (it == gammas.end()) continue;
        json entry;
        json list = json::array();
        std::vector<double> present;
        for (std::size_t i = 0; i < it->second.size() && i < timescales.size(); ++i) {
          const auto& g = it->second[i];
          list.push_back(opt_json(g));
          tsv << num(timescales[i] * 1000.0) << '\t' << kind_name(k) << '\t' << num_or_na(g) << '\n';
          if (g) present.push_back(*g);
        }
        entry["gamma"] = list;
        entry["upsilon"] = present.size() >= 2 ? json(gamma_variation(present)) : json(nullptr);
        models[std::string(kind_name(k))] = entry;
      }
      j["models"] = models;
      write_file_atomic(output_path(a.shared, trace.stem + ".gamma.tsv"), tsv.str());
      write_json(output_path(a.shared, trace.stem + ".gamma.json"), j);
    }
  }
  if (failed) return kExitError;
  return signal ? kExitSignal : kExitOk;
}

// ---------------------------------------------------------------- provision

struct ProvisionArgs {
  Shared shared;
  std::vector<std::string> timescales{"100ms", "500ms", "1s"};
  std::vector<double> epsilons{0.5, 0.1, 0.05, 0.01};
  std::vector<std::string> methods{"meent", "lognormal", "weibull"};
  std::optional<double> capacity;
  AnomalyThresholds thresholds;
};

int cmd_provision(const ProvisionArgs& a, std::ostream& out, std::ostream& err) {
  ProvisioningConfig config;
  config.timescales = parse_durations(a.timescales);
  config.epsilons = a.epsilons;
  config.methods.clear();
  for (const auto& m : a.methods) {
    const auto method = parse_method(m);
    if (!method) raise(ErrorKind::ParseError, "unknown provisioning model '" + m + "'");
    config.methods.push_back(*method);
  }
  const auto loaded = load_all(a.shared);
  std::vector<TraceInput> traces;
  for (const auto& l : loaded) traces.push_back(l.trace);
  const auto table = provisioning_experiment(traces, config);

  // Anomaly screen per (trace, T) when a capacity is configured.
  std::map<std::pair<std::string, double>, AnomalyReport> screens;
  bool flagged = false;
  if (a.capacity) {
    for (const auto& l : loaded) {
      for (double T : config.timescales) {
        const auto r = anomaly_screen(volumes_at(l.trace, T), *a.capacity, a.thresholds);
        screens[{label_of(l.trace), T}] = r;
        flagged = flagged || r.flagged;
      }
    }
  }

  std::ostringstream tsv;
  tsv << "dataset\tmodel\tT_ms\tepsilon\tC_bps\tepsilon_hat\tabs_err";
  if (a.capacity) tsv << "\toutage_fraction\tsaturation_fraction\tflagged";
  tsv << '\n';
  json rows = json::array();
  std::size_t failures = 0;
  for (const auto& r : table.rows) {
    json row{{"dataset", r.dataset},      {"model", method_name(r.method)}, {"T_ms", r.timescale * 1000.0},
             {"epsilon", r.epsilon}};
    tsv << r.dataset << '\t' << method_name(r.method) << '\t' << num(r.timescale * 1000.0) << '\t' << num(r.epsilon);
    if (r.ok()) {
      tsv << '\t' << num(r.capacity) << '\t' << num(r.epsilon_hat) << '\t' << num(r.abs_err);
      row["C_bps"] = r.capacity;
      row["epsilon_hat"] = r.epsilon_hat;
      row["abs_err"] = r.abs_err;
    } else {
      ++failures;
      err << "warning: " << r.dataset << ' ' << method_name(r.method) << ": " << r.error << '\n';
      tsv << "\tNA\tNA\tNA";
      row["error"] = r.error;
    }
    if (a.capacity) {
      const auto it = screens.find({r.dataset, r.timescale});
      if (it != screens.end()) {
        const auto& s = it->second;
        tsv << '\t' << num(s.outage_fraction) << '\t' << num(s.saturation_fraction) << '\t'
            << (s.flagged ? "yes" : "no");
        row["anomaly"] = to_json(s);
      } else {
        tsv << "\tNA\tNA\tNA";
      }
    }
    tsv << '\n';
    rows.push_back(row);
  }

  std::ostringstream sum;
  sum << "model\tT_ms\tepsilon\ttraces\tmean_epsilon_hat\tmean_abs_err\tstderr_abs_err\n";
  json summary = json::array();
  for (const auto& s : table.summary) {
    sum << method_name(s.method) << '\t' << num(s.timescale * 1000.0) << '\t' << num(s.epsilon) << '\t' << s.traces
        << '\t' << num(s.mean_epsilon_hat) << '\t' << num(s.mean_abs_err) << '\t' << num(s.stderr_abs_err) << '\n';
    summary.push_back({{"model", method_name(s.method)},
                       {"T_ms", s.timescale * 1000.0},
                       {"epsilon", s.epsilon},
                       {"traces", s.traces},
                       {"mean_epsilon_hat", s.mean_epsilon_hat},
                       {"mean_abs_err", s.mean_abs_err},
                       {"stderr_abs_err", s.stderr_abs_err}});
  }

  if (want_tsv(a.shared)) {
    write_file_atomic(output_path(a.shared, "provision.tsv"), tsv.str());
    write_file_atomic(output_path(a.shared, "provision_summary.tsv"), sum.str());
  }
  if (want_json(a.shared)) write_json(output_path(a.shared, "provision.json"), {{"rows", rows}, {"summary", summary}});

  out << table.rows.size() << " rows, " << failures << " failed cells\n";
  if (failures == table.rows.size()) return kExitError;
  return flagged ? kExitSignal : kExitOk;
}

// ---------------------------------------------------------------- bill

struct BillArgs {
  Shared shared;
  std::string group = "10s";
  std::string fit_timescale = "100ms";
  double percentile = 95.0;
  std::vector<std::string> dists{"lognormal", "weibull", "gaussian"};
  std::string normalizer = "mean";
};

int cmd_bill(const BillArgs& a, std::ostream& out, std::ostream& err) {
  BillingConfig config;
  config.kinds = parse_kinds(a.dists);
  config.group_duration = parse_durations({a.group}).front();
  config.fit_timescale = parse_durations({a.fit_timescale}).front();
  config.percentile = a.percentile;
  config.normalizer = *parse_normalizer(a.normalizer);

  const auto loaded = load_all(a.shared);
  std::vector<TraceInput> traces;
  for (const auto& l : loaded) traces.push_back(l.trace);
  const auto table = billing_experiment(traces, config);

  std::ostringstream tsv;
  std::ostringstream scatter;
  tsv << "trace\tactual_bps";
  for (Kind k : config.kinds) tsv << "\tpredicted_" << kind_name(k);
  tsv << '\n';
  scatter << "model\tactual_bps\tpredicted_bps\n";
  json records = json::array();
  for (const auto& r : table.records) {
    if (!r.error.empty()) err << "warning: " << r.trace_label << ": " << r.error << '\n';
    tsv << r.trace_label << '\t' << num_or_na(r.actual);
    json rec{{"trace", r.trace_label}, {"actual_bps", opt_json(r.actual)}};
    json pred = json::object();
    for (std::size_t k = 0; k < config.kinds.size(); ++k) {
      tsv << '\t' << num_or_na(r.predicted[k]);
      pred[std::string(kind_name(config.kinds[k]))] = opt_json(r.predicted[k]);
      if (!r.errors[k].empty()) err << "warning: " << r.trace_label << ' ' << kind_name(config.kinds[k]) << ": " << r.errors[k] << '\n';
      if (r.actual && r.predicted[k]) {
        scatter << kind_name(config.kinds[k]) << '\t' << num(*r.actual) << '\t' << num(*r.predicted[k]) << '\n';
      }
    }
    tsv << '\n';
    rec["predicted_bps"] = pred;
    if (!r.error.empty()) rec["error"] = r.error;
    records.push_back(rec);
  }
  json scores = json::object();
  for (const auto& s : table.scores) {
    scores[std::string(kind_name(s.kind))] = opt_json(s.nrmse);
    out << kind_name(s.kind) << "\tNRMSE=" << num_or_na(s.nrmse) << "\ttraces=" << s.traces << '\n';
  }
  json j{{"nrmse", scores},
         {"normalizer", a.normalizer},
         {"group_s", config.group_duration},
         {"fit_timescale_s", config.fit_timescale},
         {"percentile", config.percentile},
         {"records", records}};

  if (want_tsv(a.shared)) {
    write_file_atomic(output_path(a.shared, "bill.tsv"), tsv.str());
    write_file_atomic(output_path(a.shared, "bill_scatter.tsv"), scatter.str());
  }
  if (want_json(a.shared)) write_json(output_path(a.shared, "bill.json"), j);
  const bool any = std::any_of(table.scores.begin(), table.scores.end(), [](const KindScore& s) { return s.nrmse.has_value(); });
  return any ? kExitOk : kExitError;
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
  std::string out_dir = ".";
  std::string model = "lognormal:mu=2,sigma=0.5";
  std::size_t bins = 9000;
  std::string timescale = "100ms";
  std::uint64_t seed = 42;
  std::size_t count = 1;
  std::string anomaly;
  std::optional<double> capacity;
  bool pcap = false;
  std::uint64_t packet_size = 1500;
  bool integral = false;
  std::string name = "synth";
};

int cmd_synth(const SynthArgs& a, std::ostream& out, std::ostream&) {
  SynthSpec spec;
  spec.model = parse_model_spec(a.model);
  spec.n_bins = a.bins;
  spec.timescale = parse_durations({a.timescale}).front();
  spec.integral = a.integral || a.pcap;
  if (!a.anomaly.empty()) {
    const auto colon = a.anomaly.find(':');
    const std::string kind = a.anomaly.substr(0, colon);
    AnomalySpec an;
    if (kind == "outage") {
      an.kind = AnomalyKind::Outage;
    } else if (kind == "saturation") {
      an.kind = AnomalyKind::Saturation;
      if (!a.capacity) raise(ErrorKind::DomainError, "saturation anomaly needs --capacity");
      an.capacity = *a.capacity;
    } else {
      raise(ErrorKind::ParseError, "anomaly must be outage:<fraction> or saturation:<fraction>");
    }
    if (colon != std::string::npos) {
      const auto f = parse_double(std::string_view(a.anomaly).substr(colon + 1));
      if (!f) raise(ErrorKind::ParseError, "invalid anomaly fraction in '" + a.anomaly + "'");
      an.fraction = *f;
    }
    spec.anomaly = an;
  }
  if (a.count == 0) raise(ErrorKind::DomainError, "--count must be at least 1");

  fs::create_directories(a.out_dir);
  for (std::size_t i = 0; i < a.count; ++i) {
    std::string name = a.name;
    if (a.count > 1) {
      char buf[16];
      std::snprintf(buf, sizeof buf, "_%03zu", i);
      name += buf;
    }
    spec.seed = a.count > 1 ? derive_seed(a.seed, i) : a.seed;
    spec.label = name;
    const auto result = gen_volumes(spec);
    const fs::path tsv = fs::path(a.out_dir) / (name + ".tsv");
    write_volume_tsv(result.series, tsv);
    out << tsv.string() << "\tbins=" << result.series.size() << "\tclamped=" << result.clamped;
    if (a.pcap) {
      const fs::path pcap = fs::path(a.out_dir) / (name + ".pcap");
      const auto packets = write_pcap(result.series, pcap, a.packet_size);
      out << '\t' << pcap.string() << "\tpackets=" << packets;
    }
    out << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------- screen

struct ScreenArgs {
  Shared shared;
  std::vector<std::string> timescales{"100ms"};
  std::optional<double> capacity;
  AnomalyThresholds thresholds;
};

int cmd_screen(const ScreenArgs& a, std::ostream& out, std::ostream&) {
  const auto timescales = parse_durations(a.timescales);
  const auto loaded = load_all(a.shared);
  std::ostringstream tsv;
  tsv << "dataset\tT_ms\tcapacity_bps\toutage_fraction\tsaturation_fraction\tflagged\n";
  json rows = json::array();
  bool flagged = false;
  for (const auto& l : loaded) {
    for (double T : timescales) {
      const auto vs = volumes_at(l.trace, T);
      const double capacity = a.capacity.value_or(peak_rate(vs));
      AnomalyReport r{1.0, 0.0, true, 0.0};
      if (capacity > 0.0) r = anomaly_screen(vs, capacity, a.thresholds);
      flagged = flagged || r.flagged;
      tsv << label_of(l.trace) << '\t' << num(T * 1000.0) << '\t' << num(r.capacity_used) << '\t'
          << num(r.outage_fraction) << '\t' << num(r.saturation_fraction) << '\t' << (r.flagged ? "yes" : "no")
          << '\n';
      json row = to_json(r);
      row["dataset"] = label_of(l.trace);
      row["T_ms"] = T * 1000.0;
      rows.push_back(row);
      out << l.stem << "\tT=" << duration_label(T) << "\tflagged=" << (r.flagged ? "yes" : "no") << '\n';
    }
  }
  if (want_tsv(a.shared)) write_file_atomic(output_path(a.shared, "screen.tsv"), tsv.str());
  if (want_json(a.shared)) write_json(output_path(a.shared, "screen.json"), rows);
  return flagged ? kExitSignal : kExitOk;
}

// ---------------------------------------------------------------- report

int cmd_report(const Shared& s, std::ostream& out, std::ostream&) {
  std::ostringstream tsv;
  tsv << "source\tT_ms\tbest_model\tflagged\tmodel\tks\tgamma\tR_vs_powerlaw\tp_vs_powerlaw\n";
  json all = json::array();
  auto cell = [](const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key) || !j[key].is_number()) return std::string("NA");
    return format_double(j[key].get<double>());
  };
  for (const auto& input : s.inputs) {
    json j;
    try {
      j = json::parse(read_file(input));
    } catch (const json::exception& e) {
      raise(ErrorKind::ParseError, input + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("models") || !j.contains("best_model")) {
      raise(ErrorKind::ParseError, input + ": not a fit report");
    }
    const std::string source = j.value("source", input);
    const std::string t_ms = format_double(j.value("timescale_s", 0.0) * 1000.0);
    const std::string best = j["best_model"].get<std::string>();
    const bool flagged = j.contains("anomaly") && j["anomaly"].value("flagged", false);
    const json llr = j.value("llr_vs_powerlaw", json::object());
    for (const auto& [name, m] : j["models"].items()) {
      const json vs_pl = llr.contains(name) ? llr[name] : json::object();
      tsv << source << '\t' << t_ms << '\t' << best << '\t' << (flagged ? "yes" : "no") << '\t' << name << '\t'
          << cell(m, "ks") << '\t' << cell(m, "gamma") << '\t' << cell(vs_pl, "R_normalized") << '\t'
          << cell(vs_pl, "p_value") << '\n';
    }
    out << source << "\tT=" << t_ms << "ms\tbest=" << best << '\n';
    all.push_back(j);
  }
  if (want_tsv(s)) write_file_atomic(output_path(s, "report.tsv"), tsv.str());
  if (want_json(s)) write_json(output_path(s, "report.json"), all);
  return kExitOk;
}

}  // namespace

std::optional<double> parse_duration(std::string_view text) {
  text = trim(text);
  std::size_t split = text.size();
  while (split > 0 && std::isalpha(static_cast<unsigned char>(text[split - 1]))) --split;
  const auto value = parse_double(text.substr(0, split));
  const auto unit = text.substr(split);
  if (!value || !(*value > 0.0) || !std::isfinite(*value)) return std::nullopt;
  if (unit.empty() || unit == "s") return *value;
  if (unit == "ms") return *value / 1e3;
  if (unit == "us") return *value / 1e6;
  if (unit == "min") return *value * 60.0;
  return std::nullopt;
}

std::string duration_label(double seconds) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, seconds * 1000.0);
  return std::string(buf, res.ptr) + "ms";
}

Model parse_model_spec(std::string_view text) {
  const auto colon = text.find(':');
  const auto kind = parse_kind(trim(text.substr(0, colon)));
  if (!kind) raise(ErrorKind::ParseError, "unknown distribution in '" + std::string(text) + "'");
  std::map<std::string, double> params;
  if (colon != std::string_view::npos) {
    std::string_view rest = text.substr(colon + 1);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const auto item = trim(rest.substr(0, comma));
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
      const auto eq = item.find('=');
      if (eq == std::string_view::npos) raise(ErrorKind::ParseError, "expected key=value, got '" + std::string(item) + "'");
      const auto v = parse_double(trim(item.substr(eq + 1)));
      if (!v) raise(ErrorKind::ParseError, "invalid number in '" + std::string(item) + "'");
      params[std::string(trim(item.substr(0, eq)))] = *v;
    }
  }
  auto take = [&](std::initializer_list<const char*> keys, double fallback) {
    for (const char* k : keys) {
      if (auto it = params.find(k); it != params.end()) {
        const double v = it->second;
        params.erase(it);
        return v;
      }
    }
    return fallback;
  };
  Model m;
  switch (*kind) {
    case Kind::LogNormal: m = LogNormal{take({"mu"}, 0.0), take({"sigma"}, 1.0)}; break;
    case Kind::Gaussian: m = Gaussian{take({"mean", "mu"}, 0.0), take({"sd", "sigma"}, 1.0)}; break;
    case Kind::Weibull: m = Weibull{take({"k", "shape", "shape_k"}, 1.0), take({"lambda", "scale", "scale_lambda"}, 1.0)}; break;
    case Kind::Exponential: m = Exponential{take({"rate", "lambda"}, 1.0)}; break;
    case Kind::PowerLaw: m = PowerLaw{take({"alpha"}, 2.0), take({"xmin"}, 1.0)}; break;
  }
  if (!params.empty()) raise(ErrorKind::ParseError, "unknown parameter '" + params.begin()->first + "'");
  check_parameters(m);
  return m;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Traffic volume distribution fitting, link provisioning and percentile billing."};
  app.name("voluma");
  app.require_subcommand(1);
  app.footer("Environment: VOLUMA_THREADS caps the worker count.");

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "fit candidate distributions to each trace and pick the best");
  add_shared_options(fit_cmd, fit.shared);
  fit_cmd->add_option("--timescale,-t", fit.timescales, "aggregation timescales, e.g. 5ms,100ms,1s")
      ->delimiter(',')
      ->capture_default_str();
  fit_cmd->add_option("--dists", fit.dists, "candidate distributions (the power law always runs)")
      ->delimiter(',')
      ->capture_default_str();
  fit_cmd->add_option("--bootstrap-reps", fit.bootstrap_reps, "power-law bootstrap replicates, 0 to skip")
      ->capture_default_str();
  fit_cmd->add_option("--seed", fit.seed, "random seed")->capture_default_str();
  fit_cmd->add_option("--llr-domain", fit.domain, "samples for the power-law likelihood ratios")
      ->check(CLI::IsMember({"full", "tail"}))
      ->capture_default_str();
  fit_cmd->add_option("--samples", fit.samples, "fit per-bin volumes or rates")
      ->check(CLI::IsMember({"volumes", "rates"}))
      ->capture_default_str();
  fit_cmd->add_option("--significance", fit.significance, "p-value threshold")->capture_default_str();
  fit_cmd->add_option("--capacity", fit.capacity, "link capacity in bytes/s for the anomaly screen (default: peak rate)");
  fit_cmd->add_option("--hist-bins", fit.hist_bins, "bins in the density histogram")->capture_default_str();
  add_threshold_options(fit_cmd, fit.thresholds);
  fit_cmd->footer(kFitFooter);

  ProvisionArgs prov;
  auto* prov_cmd = app.add_subcommand("provision", "capacity for a target exceedance probability, with validation");
  add_shared_options(prov_cmd, prov.shared);
  prov_cmd->add_option("--timescale,-t", prov.timescales, "timescales")->delimiter(',')->capture_default_str();
  prov_cmd->add_option("--epsilon", prov.epsilons, "target exceedance probabilities")
      ->delimiter(',')
      ->capture_default_str();
  prov_cmd->add_option("--dists", prov.methods, "meent and/or distributions for quantile provisioning")
      ->delimiter(',')
      ->capture_default_str();
  prov_cmd->add_option("--capacity", prov.capacity, "link capacity in bytes/s; adds the anomaly screen");
  add_threshold_options(prov_cmd, prov.thresholds);
  prov_cmd->footer(kProvisionFooter);

  BillArgs bill;
  auto* bill_cmd = app.add_subcommand("bill", "actual vs model-predicted percentile billing");
  add_shared_options(bill_cmd, bill.shared);
  bill_cmd->add_option("--group", bill.group, "billing interval")->capture_default_str();
  bill_cmd->add_option("--timescale,-t", bill.fit_timescale, "timescale the models are fitted at")
      ->capture_default_str();
  bill_cmd->add_option("--percentile", bill.percentile, "billing percentile")->capture_default_str();
  bill_cmd->add_option("--dists", bill.dists, "models")->delimiter(',')->capture_default_str();
  bill_cmd->add_option("--normalizer", bill.normalizer, "NRMSE denominator")
      ->check(CLI::IsMember({"mean", "range"}))
      ->capture_default_str();
  bill_cmd->footer(kBillFooter);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "generate synthetic volume traces");
  synth_cmd->add_option("--model", synth.model, "distribution and parameters")->capture_default_str();
  synth_cmd->add_option("--bins", synth.bins, "bins per trace")->capture_default_str();
  synth_cmd->add_option("--timescale,-t", synth.timescale, "bin width")->capture_default_str();
  synth_cmd->add_option("--seed", synth.seed, "random seed")->capture_default_str();
  synth_cmd->add_option("--count", synth.count, "number of traces")->capture_default_str();
  synth_cmd->add_option("--anomaly", synth.anomaly, "outage:<fraction> or saturation:<fraction>");
  synth_cmd->add_option("--capacity", synth.capacity, "link capacity in bytes/s for saturation");
  synth_cmd->add_flag("--pcap", synth.pcap, "also write a pcap capture (implies --integral)");
  synth_cmd->add_option("--packet-size", synth.packet_size, "pcap packet size in bytes")->capture_default_str();
  synth_cmd->add_flag("--integral", synth.integral, "round volumes to whole bytes");
  synth_cmd->add_option("--name", synth.name, "output file name prefix")->capture_default_str();
  synth_cmd->add_option("--out,-o", synth.out_dir, "output directory")->capture_default_str();
  synth_cmd->footer("Writes <name>.tsv (and <name>.pcap); with --count > 1, <name>_NNN.*.");

  ScreenArgs screen;
  auto* screen_cmd = app.add_subcommand("screen", "flag traces dominated by outage or saturation");
  add_shared_options(screen_cmd, screen.shared);
  screen_cmd->add_option("--timescale,-t", screen.timescales, "timescales")->delimiter(',')->capture_default_str();
  screen_cmd->add_option("--capacity", screen.capacity, "link capacity in bytes/s (default: peak rate)");
  add_threshold_options(screen_cmd, screen.thresholds);
  screen_cmd->footer(kScreenFooter);

  Shared report;
  auto* report_cmd = app.add_subcommand("report", "tabulate fit report JSON files");
  add_shared_options(report_cmd, report, false);
  report_cmd->footer(kReportFooter);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (fit_cmd->parsed()) return cmd_fit(fit, out, err);
    if (prov_cmd->parsed()) return cmd_provision(prov, out, err);
    if (bill_cmd->parsed()) return cmd_bill(bill, out, err);
    if (synth_cmd->parsed()) return cmd_synth(synth, out, err);
    if (screen_cmd->parsed()) return cmd_screen(screen, out, err);
    if (report_cmd->parsed()) return cmd_report(report, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}

}  // namespace voluma::cli
