#include <algorithm>
#include <cmath>
#include <fstream>

#include "doctest.h"
#include "support.hpp"
#include "voluma/gof.hpp"
#include "voluma/ingest.hpp"
#include "voluma/synthgen.hpp"

using namespace voluma;
using testing::error_kind_of;

TEST_SUITE("synthgen") {
  TEST_CASE("same seed, same series") {
    SynthSpec s;
    s.n_bins = 1000;
    CHECK(gen_volumes(s).series.volumes == gen_volumes(s).series.volumes);
    auto other = s;
    other.seed = 43;
    CHECK(gen_volumes(s).series.volumes != gen_volumes(other).series.volumes);
  }

  TEST_CASE("log-normal parameters are recovered") {
    const auto r = gen_volumes(SynthSpec{});
    CHECK(r.series.size() == 9000);
    CHECK(r.clamped == 0);
    const auto fit = std::get<LogNormal>(fit_mle(Kind::LogNormal, r.series.volumes));
    CHECK(std::abs(fit.mu - 2.0) <= 0.02);
    CHECK(std::abs(fit.sigma - 0.5) <= 0.02);
  }

  TEST_CASE("negative Gaussian draws are clamped and counted") {
    SynthSpec s;
    s.model = Gaussian{0.0, 1.0};
    s.n_bins = 10000;
    const auto r = gen_volumes(s);
    const auto zeros = std::count(r.series.volumes.begin(), r.series.volumes.end(), 0.0);
    CHECK(static_cast<std::size_t>(zeros) == r.clamped);
    CHECK(std::abs(static_cast<double>(r.clamped) - 5000.0) <= 3 * 50.0);
    CHECK(*std::min_element(r.series.volumes.begin(), r.series.volumes.end()) == 0.0);
  }

  TEST_CASE("anomaly injection") {
    VolumeSeries vs{0.1, std::vector<double>(1000, 5.0), 0, ""};
    const auto out = inject_anomaly(vs, {AnomalyKind::Outage, 0.1, 0}, 7);
    std::vector<std::size_t> zero;
    for (std::size_t i = 0; i < out.size(); ++i)
      if (out.volumes[i] == 0.0) zero.push_back(i);
    REQUIRE(zero.size() == 100);
    CHECK(zero.back() - zero.front() == 99);

    const auto all = inject_anomaly(vs, {AnomalyKind::Outage, 1.0, 0}, 7);
    CHECK(std::all_of(all.volumes.begin(), all.volumes.end(), [](double v) { return v == 0.0; }));

    const auto sat = inject_anomaly(vs, {AnomalyKind::Saturation, 0.25, 400.0}, 8);
    CHECK(std::count(sat.volumes.begin(), sat.volumes.end(), 40.0) == 250);

    CHECK(error_kind_of([&] { inject_anomaly(vs, {AnomalyKind::Outage, 0.0, 0}, 1); }) == ErrorKind::DomainError);
    CHECK(error_kind_of([&] { inject_anomaly(vs, {AnomalyKind::Outage, 1.5, 0}, 1); }) == ErrorKind::DomainError);
    CHECK(error_kind_of([&] { inject_anomaly(vs, {AnomalyKind::Saturation, 0.1, 0}, 1); }) == ErrorKind::DomainError);
  }

  TEST_CASE("block start is spread over the series") {
    VolumeSeries vs{0.1, std::vector<double>(100, 5.0), 0, ""};
    std::vector<int> starts(91, 0);
    for (std::uint64_t seed = 0; seed < 2000; ++seed) {
      const auto out = inject_anomaly(vs, {AnomalyKind::Outage, 0.1, 0}, seed);
      const auto it = std::find(out.volumes.begin(), out.volumes.end(), 0.0);
      ++starts[static_cast<std::size_t>(it - out.volumes.begin())];
    }
    CHECK(starts.front() > 0);
    CHECK(starts.back() > 0);
    CHECK(*std::max_element(starts.begin(), starts.end()) < 60);
  }

  TEST_CASE("packets from volumes") {
    const auto two = volumes_to_packets(VolumeSeries{1.0, {3000}, 0, ""});
    REQUIRE(two.records.size() == 2);
    CHECK(two.records[0].wire_bytes == 1500);
    const auto three = volumes_to_packets(VolumeSeries{1.0, {250}, 0, ""}, 100);
    REQUIRE(three.records.size() == 3);
    CHECK(three.records[2].wire_bytes == 50);
    CHECK(volumes_to_packets(VolumeSeries{1.0, {0, 100, 0}, 0, ""}).records.size() == 1);
    CHECK(error_kind_of([] { volumes_to_packets(VolumeSeries{1.0, {10}, 0, ""}, 0); }) == ErrorKind::DomainError);
  }

  TEST_CASE("pcap round trip") {
    testing::TempDir dir;
    SynthSpec s;
    s.n_bins = 2000;
    s.model = LogNormal{7, 1};
    s.integral = true;
    auto vs = gen_volumes(s).series;
    vs.volumes[0] = 1;
    vs.volumes[1] = 0;
    vs.volumes[500] = 0;
    vs.volumes[501] = 0;
    vs.volumes.back() = 3;
    const auto path = dir / "rt.pcap";
    const auto packets = write_pcap(vs, path);
    const auto back = read_pcap(path);
    CHECK(back.records.size() == packets);
    const auto again = aggregate(back, 0.1);
    CHECK(again.volumes == vs.volumes);
  }

  TEST_CASE("pcap round trip at assorted timescales") {
    testing::TempDir dir;
    for (double T : {0.005, 0.1, 0.7, 3.0}) {
      SynthSpec s;
      s.n_bins = 300;
      s.timescale = T;
      s.model = Weibull{0.8, 5000};
      s.integral = true;
      s.seed = static_cast<std::uint64_t>(T * 1000);
      auto vs = gen_volumes(s).series;
      vs.volumes.front() = 1500;
      vs.volumes.back() = 1;
      write_pcap(vs, dir / "x.pcap", 512);
      CHECK(aggregate(read_pcap(dir / "x.pcap"), T).volumes == vs.volumes);
    }
  }

  TEST_CASE("write_pcap errors") {
    testing::TempDir dir;
    CHECK(error_kind_of([&] { write_pcap(VolumeSeries{1.0, {0, 0}, 0, ""}, dir / "z.pcap"); }) == ErrorKind::EmptyInput);
    CHECK(error_kind_of([&] { write_pcap(VolumeSeries{1.0, {5}, 0, ""}, dir / "missing" / "z.pcap"); }) ==
          ErrorKind::IoError);
  }

  TEST_CASE("uniform variates via the exponential model are uniform") {
    // cdf of draws must look uniform; a KS test on the transformed sample.
    const auto xs = sample(Exponential{2.0}, 5000, 11);
    std::vector<double> u;
    for (double x : xs) u.push_back(cdf(Exponential{2.0}, x));
    std::sort(u.begin(), u.end());
    double d = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      d = std::max(d, std::max(static_cast<double>(i + 1) / 5000.0 - u[i], u[i] - static_cast<double>(i) / 5000.0));
    }
    CHECK(d < 1.63 / std::sqrt(5000.0));
  }

  TEST_CASE("integerize") {
    const auto r = integerize(VolumeSeries{1.0, {0.4, 0.5, 2.6}, 0, ""});
    CHECK(r.volumes == std::vector<double>{0, 1, 3});
  }
}
