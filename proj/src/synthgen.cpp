#include "voluma/synthgen.hpp"

#include <algorithm>
#include <cmath>

#include "voluma/error.hpp"
#include "voluma/ingest.hpp"
#include "voluma/random.hpp"

namespace voluma {

namespace {

constexpr std::uint64_t kAnomalyStream = 0x616e6f6d616c79ULL;

void check_anomaly(const AnomalySpec& a) {
  if (!(a.fraction > 0.0 && a.fraction <= 1.0)) raise(ErrorKind::DomainError, "anomaly fraction must lie in (0, 1]");
  if (a.kind == AnomalyKind::Saturation && !(a.capacity > 0.0 && std::isfinite(a.capacity))) {
    raise(ErrorKind::DomainError, "saturation needs a positive capacity");
  }
}

}  // namespace

SynthResult gen_volumes(const SynthSpec& spec) {
  if (spec.n_bins == 0) raise(ErrorKind::DomainError, "n_bins must be at least 1");
  if (!(spec.timescale > 0.0) || !std::isfinite(spec.timescale)) raise(ErrorKind::DomainError, "timescale must be positive");
  check_parameters(spec.model);

  SynthResult out;
  out.series.timescale = spec.timescale;
  out.series.source_label = spec.label;
  out.series.volumes = sample(spec.model, spec.n_bins, spec.seed);
  for (auto& v : out.series.volumes) {
    if (v < 0.0) {
      v = 0.0;
      ++out.clamped;
    }
  }
  if (spec.anomaly) out.series = inject_anomaly(out.series, *spec.anomaly, spec.seed);
  if (spec.integral) out.series = integerize(out.series);
  return out;
}

VolumeSeries inject_anomaly(const VolumeSeries& vs, const AnomalySpec& anomaly, std::uint64_t seed) {
  check_anomaly(anomaly);
  validate(vs);
  const std::size_t n = vs.size();
  const auto count = std::min<std::size_t>(n, static_cast<std::size_t>(std::llround(anomaly.fraction * static_cast<double>(n))));
  CounterRng rng(derive_seed(seed, kAnomalyStream));
  const std::size_t slots = n - count + 1;
  const std::size_t start = std::min(slots - 1, static_cast<std::size_t>(rng.uniform() * static_cast<double>(slots)));
  const double value = anomaly.kind == AnomalyKind::Outage ? 0.0 : anomaly.capacity * vs.timescale;

  VolumeSeries out = vs;
  std::fill(out.volumes.begin() + static_cast<std::ptrdiff_t>(start),
            out.volumes.begin() + static_cast<std::ptrdiff_t>(start + count), value);
  return out;
}

VolumeSeries integerize(const VolumeSeries& vs) {
  VolumeSeries out = vs;
  for (auto& v : out.volumes) v = static_cast<double>(std::llround(v));
  return out;
}

PacketSeries volumes_to_packets(const VolumeSeries& vs, std::uint64_t packet_size) {
  if (packet_size == 0) raise(ErrorKind::DomainError, "packet size must be at least 1 byte");
  validate(vs);
  const double T = vs.timescale;
  PacketSeries trace;
  trace.source_label = vs.source_label;
  bool first = true;
  for (std::size_t i = 0; i < vs.size(); ++i) {
    const double v = vs.volumes[i];
    if (v < 0.0 || !std::isfinite(v)) raise(ErrorKind::DomainError, "volumes must be finite and non-negative");
    const auto bytes = static_cast<std::uint64_t>(std::llround(v));
    if (bytes == 0) continue;
    std::vector<std::uint64_t> sizes(bytes / packet_size, packet_size);
    if (bytes % packet_size) sizes.push_back(bytes % packet_size);

    // The first packet overall sits at T/4 into its bin and becomes the
    // aggregation origin; every other packet lies in (3T/8, 5T/8), so all stay
    // at least T/8 away from the bin edges seen from that origin.
    const double bin_start = vs.origin + static_cast<double>(i) * T;
    const auto m = static_cast<double>(sizes.size());
    for (std::size_t j = 0; j < sizes.size(); ++j) {
      double offset = 0.0;
      if (first) {
        offset = j == 0 ? T / 4.0 : 3.0 * T / 8.0 + static_cast<double>(j) / m * T / 4.0;
      } else {
        offset = 3.0 * T / 8.0 + (static_cast<double>(j) + 0.5) / m * T / 4.0;
      }
      trace.records.push_back({bin_start + offset, sizes[j]});
    }
    first = false;
  }
  return trace;
}

std::size_t write_pcap(const VolumeSeries& vs, const std::filesystem::path& path, std::uint64_t packet_size) {
  const auto trace = volumes_to_packets(vs, packet_size);
  if (trace.records.empty()) raise(ErrorKind::EmptyInput, "all volumes are zero; nothing to write");
  try {
    return write_pcap_records(trace, path);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::IoError) throw;
    throw e.with_context(path.string());
  }
}

}  // namespace voluma
