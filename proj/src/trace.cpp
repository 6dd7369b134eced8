#include "voluma/trace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "voluma/error.hpp"

namespace voluma {

std::uint64_t PacketSeries::total_bytes() const {
  std::uint64_t sum = 0;
  for (const auto& r : records) sum += r.wire_bytes;
  return sum;
}

double VolumeSeries::total() const { return std::accumulate(volumes.begin(), volumes.end(), 0.0); }

void validate(const PacketSeries& trace) {
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    const auto& r = trace.records[i];
    if (r.wire_bytes < 1) {
      raise(ErrorKind::MalformedTrace, "record " + std::to_string(i) + " has zero wire length");
    }
    if (!std::isfinite(r.timestamp)) {
      raise(ErrorKind::MalformedTrace, "record " + std::to_string(i) + " has a non-finite timestamp");
    }
    if (i > 0 && r.timestamp < trace.records[i - 1].timestamp) {
      raise(ErrorKind::MalformedTrace, "timestamp regresses at record " + std::to_string(i));
    }
  }
}

void validate(const VolumeSeries& vs) {
  if (!(vs.timescale > 0.0) || !std::isfinite(vs.timescale)) {
    raise(ErrorKind::DomainError, "timescale must be positive");
  }
  if (vs.volumes.empty()) raise(ErrorKind::EmptyInput, "volume series has no bins");
  for (double v : vs.volumes) {
    if (!(v >= 0.0) || !std::isfinite(v)) raise(ErrorKind::MalformedTrace, "negative or non-finite volume");
  }
}

VolumeSeries aggregate(const PacketSeries& trace, double timescale) {
  if (!(timescale > 0.0) || !std::isfinite(timescale)) {
    raise(ErrorKind::DomainError, "timescale must be positive");
  }
  if (trace.records.empty()) raise(ErrorKind::EmptyInput, "trace has no packets");
  validate(trace);

  const double origin = trace.records.front().timestamp;
  // A timestamp within rounding distance of a bin edge sits on the edge, so
  // 0.15 with origin 0.05 at T = 0.1 opens bin 1.
  const double magnitude = std::max(std::abs(origin), std::abs(trace.records.back().timestamp));
  const double slack = 2.0 * (std::nextafter(magnitude, INFINITY) - magnitude);
  auto bin_of = [&](double t) {
    const double q = (t - origin) / timescale;
    const double k = std::round(q);
    const double edge_gap = std::abs(q - k) * timescale;
    if (edge_gap <= slack + 4.0 * std::numeric_limits<double>::epsilon() * std::abs(q) * timescale) {
      return static_cast<std::size_t>(std::max(0.0, k));
    }
    return static_cast<std::size_t>(std::floor(q));
  };
  const auto last_bin = bin_of(trace.records.back().timestamp);

  // Integer accumulation keeps byte conservation exact.
  std::vector<std::uint64_t> bytes(last_bin + 1, 0);
  for (const auto& r : trace.records) bytes[std::min(bin_of(r.timestamp), last_bin)] += r.wire_bytes;

  VolumeSeries vs;
  vs.timescale = timescale;
  vs.origin = origin;
  vs.source_label = trace.source_label;
  vs.volumes.assign(bytes.begin(), bytes.end());
  return vs;
}

VolumeSeries rebin(const VolumeSeries& vs, std::size_t factor) {
  if (factor == 0) raise(ErrorKind::DomainError, "rebin factor must be ≥ 1");
  validate(vs);
  VolumeSeries out;
  out.timescale = vs.timescale * static_cast<double>(factor);
  out.origin = vs.origin;
  out.source_label = vs.source_label;
  out.volumes.reserve((vs.size() + factor - 1) / factor);
  for (std::size_t i = 0; i < vs.size(); i += factor) {
    const auto end = std::min(vs.size(), i + factor);
    double sum = 0.0;
    for (std::size_t j = i; j < end; ++j) sum += vs.volumes[j];
    out.volumes.push_back(sum);
  }
  return out;
}

VolumeSeries coarsen(const VolumeSeries& vs, double timescale) {
  validate(vs);
  const double ratio = timescale / vs.timescale;
  const double factor = std::round(ratio);
  if (factor < 1.0 || std::abs(ratio - factor) > 1e-9 * ratio) {
    raise(ErrorKind::DomainError, "timescale " + std::to_string(timescale) +
                                      " s is not an integer multiple of the series timescale " +
                                      std::to_string(vs.timescale) + " s");
  }
  auto out = rebin(vs, static_cast<std::size_t>(factor));
  out.timescale = timescale;
  return out;
}

SummaryStats volume_stats(const VolumeSeries& vs) {
  validate(vs);
  if (vs.size() < 2) raise(ErrorKind::InsufficientData, "volume statistics need at least 2 bins");
  const auto n = static_cast<double>(vs.size());
  const double mean = vs.total() / n;
  double ss = 0.0;
  for (double v : vs.volumes) ss += (v - mean) * (v - mean);

  SummaryStats s;
  s.n = vs.size();
  s.mean_rate = vs.total() / (n * vs.timescale);
  s.volume_variance = ss / n;
  s.timescale = vs.timescale;
  return s;
}

std::vector<double> rates(const VolumeSeries& vs) {
  std::vector<double> out(vs.volumes.size());
  std::transform(vs.volumes.begin(), vs.volumes.end(), out.begin(),
                 [t = vs.timescale](double v) { return v / t; });
  return out;
}

std::vector<double> positive_only(std::span<const double> values) {
  std::vector<double> out;
  out.reserve(values.size());
  std::copy_if(values.begin(), values.end(), std::back_inserter(out), [](double v) { return v > 0.0; });
  return out;
}

}  // namespace voluma
