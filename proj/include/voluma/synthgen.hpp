#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "voluma/distributions.hpp"
#include "voluma/trace.hpp"

namespace voluma {

enum class AnomalyKind { Outage, Saturation };

struct AnomalySpec {
  AnomalyKind kind = AnomalyKind::Outage;
  double fraction = 0.1;   // share of bins altered, in (0, 1)
  double capacity = 0.0;   // bytes/s, used for saturation
};

struct SynthSpec {
  Model model = LogNormal{2.0, 0.5};
  std::size_t n_bins = 9000;
  double timescale = 0.1;
  std::uint64_t seed = 42;
  std::optional<AnomalySpec> anomaly;
  bool integral = false;  // round volumes to whole bytes
  std::string label = "synthetic";
};

struct SynthResult {
  VolumeSeries series;
  std::size_t clamped = 0;  // negative draws set to zero
};

/// i.i.d. draws from the model as bytes per bin, then the anomaly if any.
SynthResult gen_volumes(const SynthSpec& spec);

/// Sets a contiguous block of round(fraction·n) bins to 0 or capacity·T. The
/// block start is drawn from `seed`.
VolumeSeries inject_anomaly(const VolumeSeries& vs, const AnomalySpec& anomaly, std::uint64_t seed);

/// Rounds each volume to the nearest whole byte.
VolumeSeries integerize(const VolumeSeries& vs);

/// Emits each bin as floor(v/size) packets of `packet_size` bytes plus one
/// remainder packet, placed well inside the bin. Aggregating the written
/// capture at the same T reproduces the (rounded) volumes from the first to
/// the last non-empty bin. Returns the packet count.
std::size_t write_pcap(const VolumeSeries& vs, const std::filesystem::path& path, std::uint64_t packet_size = 1500);

PacketSeries volumes_to_packets(const VolumeSeries& vs, std::uint64_t packet_size = 1500);

}  // namespace voluma
