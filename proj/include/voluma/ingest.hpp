#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <variant>

#include "voluma/trace.hpp"

namespace voluma {

enum class Endianness { Little, Big };
enum class TimestampResolution { Microsecond, Nanosecond };

struct PcapHeaderInfo {
  Endianness endianness = Endianness::Little;
  TimestampResolution ts_resolution = TimestampResolution::Microsecond;
  std::uint32_t snaplen = 65535;
  std::uint32_t linktype = 1;  // LINKTYPE_ETHERNET
};

struct PcapReadOptions {
  // Tolerated timestamp regression in seconds. Zero is strict; with a positive
  // slack, records are stably re-sorted by time after reading.
  double reorder_slack = 0.0;
};

/// Parses the 24-byte global header. Unknown magic is UnsupportedFormat.
PcapHeaderInfo parse_pcap_header(std::span<const std::uint8_t> bytes);

PacketSeries read_pcap(const std::filesystem::path& path, const PcapReadOptions& options = {});
PacketSeries parse_pcap(std::span<const std::uint8_t> bytes, const PcapReadOptions& options = {},
                        const std::string& label = {});

/// Encodes records with incl_len == orig_len and zero-filled payloads capped
/// at the snaplen. Returns the packet count.
std::size_t write_pcap_records(const PacketSeries& trace, const std::filesystem::path& path,
                               const PcapHeaderInfo& header = {});

PacketSeries read_packet_csv(const std::filesystem::path& path);
PacketSeries parse_packet_csv(std::string_view text, const std::string& label = {});
void write_packet_csv(const PacketSeries& trace, const std::filesystem::path& path);

VolumeSeries read_volume_tsv(const std::filesystem::path& path);
VolumeSeries parse_volume_tsv(std::string_view text, const std::string& label = {});
std::string format_volume_tsv(const VolumeSeries& vs);
void write_volume_tsv(const VolumeSeries& vs, const std::filesystem::path& path);

/// A trace as loaded from disk: raw packets, or volumes already binned.
using TraceInput = std::variant<PacketSeries, VolumeSeries>;

/// Detects the format from content: pcap magic, then the volume TSV header,
/// otherwise packet CSV.
TraceInput load_trace(const std::filesystem::path& path, const PcapReadOptions& options = {});

/// Volumes at `timescale`: packets are aggregated, binned input is coarsened
/// by an integer factor.
VolumeSeries volumes_at(const TraceInput& input, double timescale);

const std::string& label_of(const TraceInput& input);

}  // namespace voluma
