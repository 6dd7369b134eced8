#include <algorithm>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "support.hpp"
#include "voluma/cli.hpp"
#include "voluma/fit_report.hpp"
#include "voluma/ingest.hpp"
#include "voluma/synthgen.hpp"
#include "json.hpp"

using namespace voluma;
using nlohmann::json;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run invoke(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Run r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

std::string synth_file(const testing::TempDir& dir, const std::string& name, const std::vector<std::string>& extra = {}) {
  std::vector<std::string> args{"synth", "--out", dir.path().string(), "--name", name};
  if (std::find(extra.begin(), extra.end(), "--bins") == extra.end()) {
    args.push_back("--bins");
    args.push_back("3000");
  }
  args.insert(args.end(), extra.begin(), extra.end());
  const auto r = invoke(args);
  INFO(r.err);
  REQUIRE(r.code == 0);
  return (dir / (name + ".tsv")).string();
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("durations") {
    CHECK(cli::parse_duration("5ms") == 0.005);
    CHECK(cli::parse_duration("100us") == doctest::Approx(1e-4).epsilon(1e-15));
    CHECK(cli::parse_duration("0.5s") == 0.5);
    CHECK(cli::parse_duration("2") == 2.0);
    CHECK(cli::parse_duration("1min") == 60.0);
    CHECK_FALSE(cli::parse_duration("fast").has_value());
    CHECK_FALSE(cli::parse_duration("-1s").has_value());
    CHECK_FALSE(cli::parse_duration("0ms").has_value());
    CHECK(cli::duration_label(0.1) == "100ms");
    CHECK(cli::duration_label(0.005) == "5ms");
    CHECK(cli::duration_label(1.0) == "1000ms");
  }

  TEST_CASE("model specs") {
    CHECK(cli::parse_model_spec("lognormal:mu=2,sigma=0.5") == Model{LogNormal{2, 0.5}});
    CHECK(cli::parse_model_spec("weibull:k=1.5,lambda=2") == Model{Weibull{1.5, 2}});
    CHECK(cli::parse_model_spec("gaussian:mean=10,sd=2") == Model{Gaussian{10, 2}});
    CHECK(testing::error_kind_of([] { cli::parse_model_spec("cauchy:x=1"); }) == ErrorKind::ParseError);
    CHECK(testing::error_kind_of([] { cli::parse_model_spec("lognormal:mu=2,tau=1"); }) == ErrorKind::ParseError);
    CHECK(testing::error_kind_of([] { cli::parse_model_spec("lognormal:sigma=-1"); }) == ErrorKind::DomainError);
  }

  TEST_CASE("fit a clean log-normal trace") {
    testing::TempDir dir;
    const auto in = synth_file(dir, "ln");
    const auto r = invoke({"fit", "-i", in, "-o", dir.path().string(), "--bootstrap-reps", "20"});
    CHECK(r.code == 0);
    CHECK(r.out.find("best=lognormal") != std::string::npos);
    const auto j = json::parse(slurp(dir / "ln.T100ms.fit.json"));
    CHECK(j["best_model"] == "lognormal");
    CHECK(j["anomaly"]["flagged"] == false);
    CHECK(std::filesystem::exists(dir / "ln.T100ms.qq.lognormal.tsv"));
    CHECK(std::filesystem::exists(dir / "ln.T100ms.pdf.tsv"));
    CHECK(std::filesystem::exists(dir / "ln.T100ms.pdf.weibull.tsv"));
  }

  TEST_CASE("fit at several timescales writes the variation table") {
    testing::TempDir dir;
    const auto in = synth_file(dir, "ln", {"--timescale", "10ms", "--bins", "6000"});
    const auto r = invoke({"fit", "-i", in, "-o", dir.path().string(), "--bootstrap-reps", "0", "-t", "10ms,100ms,200ms"});
    CHECK(r.code != 1);
    CHECK(line_count(r.out) == 3);
    const auto j = json::parse(slurp(dir / "ln.gamma.json"));
    CHECK(j["timescales_ms"].size() == 3);
    CHECK(line_count(slurp(dir / "ln.gamma.tsv")) == 1 + 3 * 4);
  }

  TEST_CASE("an anomalous trace exits with 2") {
    testing::TempDir dir;
    const auto in = synth_file(dir, "out", {"--anomaly", "outage:0.2"});
    const auto r = invoke({"fit", "-i", in, "-o", dir.path().string(), "--bootstrap-reps", "0"});
    CHECK(r.code == 2);
    CHECK(r.out.find("flagged=yes") != std::string::npos);
    const auto j = json::parse(slurp(dir / "out.T100ms.fit.json"));
    CHECK(j["best_model"] == "inconclusive");
    CHECK(j["dropped_bins"] == 600);
  }

  TEST_CASE("single candidate") {
    testing::TempDir dir;
    const auto in = synth_file(dir, "g", {"--model", "gaussian:mean=100,sd=10"});
    const auto r = invoke({"fit", "-i", in, "-o", dir.path().string(), "--bootstrap-reps", "0", "--dists", "gaussian",
                        "--format", "json"});
    CHECK(r.code != 1);
    const auto j = json::parse(slurp(dir / "g.T100ms.fit.json"));
    CHECK(j["models"].size() == 1);
    CHECK(j["models"].contains("gaussian"));
    CHECK(std::filesystem::exists(dir / "g.T100ms.qq.gaussian.tsv"));
  }

  TEST_CASE("provision") {
    testing::TempDir dir;
    const auto in = synth_file(dir, "p", {"--bins", "9000"});
    auto r = invoke({"provision", "-i", in, "-o", dir.path().string()});
    CHECK(r.code == 0);
    CHECK(line_count(slurp(dir / "provision.tsv")) == 1 + 36);
    CHECK(line_count(slurp(dir / "provision_summary.tsv")) == 1 + 36);

    r = invoke({"provision", "-i", in, "-o", dir.path().string(), "--dists", "lognormal", "--epsilon", "0.05", "-t", "100ms"});
    CHECK(r.code == 0);
    const auto j = json::parse(slurp(dir / "provision.json"));
    REQUIRE(j["rows"].size() == 1);
    CHECK(j["rows"][0]["model"] == "lognormal");
    CHECK(j["rows"][0]["T_ms"] == 100.0);

    r = invoke({"provision", "-i", in, "-o", dir.path().string(), "-t", "100ms", "--epsilon", "0.05", "--capacity", "1000"});
    CHECK(r.code == 0);
    const auto tsv = slurp(dir / "provision.tsv");
    CHECK(tsv.substr(0, tsv.find('\n')).find("flagged") != std::string::npos);
  }

  TEST_CASE("bill") {
    testing::TempDir dir;
    VolumeSeries flat{0.1, std::vector<double>(9000, 25.0), 0, "flat"};
    write_volume_tsv(flat, dir / "flat.tsv");
    auto r = invoke({"bill", "-i", (dir / "flat.tsv").string(), "-o", dir.path().string()});
    CHECK(r.code == 0);
    auto j = json::parse(slurp(dir / "bill.json"));
    CHECK(j["nrmse"]["lognormal"] == 0.0);
    CHECK(j["records"].size() == 1);

    const auto a = synth_file(dir, "a", {"--bins", "9000", "--seed", "1"});
    const auto b = synth_file(dir, "b", {"--bins", "9000", "--seed", "2"});
    r = invoke({"bill", "-i", a, "-i", b, "-o", dir.path().string(), "--percentile", "50", "--dists", "weibull"});
    CHECK(r.code == 0);
    j = json::parse(slurp(dir / "bill.json"));
    CHECK(j["percentile"] == 50.0);
    CHECK(j["nrmse"].size() == 1);
    CHECK(line_count(slurp(dir / "bill_scatter.tsv")) == 1 + 2);
  }

  TEST_CASE("synth is reproducible and its pcap fits like its volumes") {
    testing::TempDir d1, d2;
    synth_file(d1, "s", {"--pcap", "--model", "lognormal:mu=7,sigma=0.5"});
    synth_file(d2, "s", {"--pcap", "--model", "lognormal:mu=7,sigma=0.5"});
    CHECK(slurp(d1 / "s.tsv") == slurp(d2 / "s.tsv"));
    CHECK(slurp(d1 / "s.pcap") == slurp(d2 / "s.pcap"));

    const auto from_tsv = analyze(volumes_at(load_trace(d1 / "s.tsv"), 0.1), AnalysisOptions{.bootstrap_reps = 0});
    const auto from_pcap = analyze(volumes_at(load_trace(d1 / "s.pcap"), 0.1), AnalysisOptions{.bootstrap_reps = 0});
    auto a = to_json(from_tsv);
    auto b = to_json(from_pcap);
    a.erase("source");
    b.erase("source");
    CHECK(a == b);

    const auto r = invoke({"synth", "--out", d1.path().string(), "--count", "3", "--bins", "10"});
    CHECK(r.code == 0);
    CHECK(std::filesystem::exists(d1 / "synth_002.tsv"));
    CHECK(slurp(d1 / "synth_000.tsv") != slurp(d1 / "synth_001.tsv"));
  }

  TEST_CASE("screen and report") {
    testing::TempDir dir;
    const auto clean = synth_file(dir, "clean");
    const auto bad = synth_file(dir, "bad", {"--anomaly", "outage:0.3"});
    auto r = invoke({"screen", "-i", clean, "-i", bad, "-o", dir.path().string()});
    CHECK(r.code == 2);
    const auto s = json::parse(slurp(dir / "screen.json"));
    CHECK(s.size() == 2);

    r = invoke({"fit", "-i", clean, "-o", dir.path().string(), "--bootstrap-reps", "0"});
    CHECK(r.code == 0);
    r = invoke({"report", "-i", (dir / "clean.T100ms.fit.json").string(), "-o", dir.path().string()});
    CHECK(r.code == 0);
    CHECK(std::filesystem::exists(dir / "report.tsv"));
    CHECK(json::parse(slurp(dir / "report.json")).size() == 1);
  }

  TEST_CASE("errors and help") {
    testing::TempDir dir;
    auto r = invoke({"fit", "-i", (dir / "missing.pcap").string(), "-o", dir.path().string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("missing.pcap") != std::string::npos);
    CHECK(invoke({"fit"}).code == 1);
    CHECK(invoke({"bogus"}).code == 1);
    CHECK(invoke({"--help"}).code == 0);
    CHECK(invoke({"fit", "--help"}).code == 0);
    CHECK(invoke({"fit", "-i", "x", "--llr-domain", "middle"}).code == 1);
    CHECK(invoke({"synth", "--out", dir.path().string(), "--anomaly", "saturation:0.1"}).code == 1);
  }
}
