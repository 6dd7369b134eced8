#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace voluma {

struct PacketRecord {
  double timestamp = 0.0;    // seconds since epoch
  std::uint64_t wire_bytes = 0;

  friend bool operator==(const PacketRecord&, const PacketRecord&) = default;
};

/// Ordered packet capture: timestamps non-decreasing, every record ≥ 1 byte.
struct PacketSeries {
  std::vector<PacketRecord> records;
  std::string source_label;

  std::uint64_t total_bytes() const;
};

/// Per-bin traffic volumes at timescale T; bin i covers [origin + iT, origin + (i+1)T).
struct VolumeSeries {
  double timescale = 0.0;  // seconds
  std::vector<double> volumes;
  double origin = 0.0;
  std::string source_label;

  std::size_t size() const { return volumes.size(); }
  double total() const;
};

struct SummaryStats {
  std::size_t n = 0;
  double mean_rate = 0.0;        // bytes/s
  double volume_variance = 0.0;  // bytes^2, population variance of per-bin volumes
  double timescale = 0.0;
};

/// Throws MalformedTrace when the ordering or byte-count invariant is broken.
void validate(const PacketSeries& trace);
void validate(const VolumeSeries& vs);

VolumeSeries aggregate(const PacketSeries& trace, double timescale);

/// Sums consecutive groups of `factor` bins, equivalent to aggregating the
/// underlying packets at factor·T with the same origin. The last group may be partial.
VolumeSeries rebin(const VolumeSeries& vs, std::size_t factor);

/// Re-expresses a volume series at a coarser timescale that is an integer
/// multiple of its own (within 1e-9 relative); anything else is a DomainError.
VolumeSeries coarsen(const VolumeSeries& vs, double timescale);

SummaryStats volume_stats(const VolumeSeries& vs);

std::vector<double> rates(const VolumeSeries& vs);

/// Strictly positive entries of `values`, order preserved. Log-domain fits
/// cannot take empty bins; callers report how many were dropped.
std::vector<double> positive_only(std::span<const double> values);

}  // namespace voluma
