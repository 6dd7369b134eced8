#include "voluma/ingest.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "voluma/error.hpp"
#include "voluma/textio.hpp"

namespace voluma {

namespace {

constexpr std::uint32_t kMagicMicro = 0xa1b2c3d4;
constexpr std::uint32_t kMagicNano = 0xa1b23c4d;
constexpr std::size_t kGlobalHeaderSize = 24;
constexpr std::size_t kRecordHeaderSize = 16;
// Larger captured lengths than this are treated as garbage rather than allocated.
constexpr std::uint32_t kMaxRecordLength = 256u << 20;

std::uint32_t bswap32(std::uint32_t v) {
  return ((v & 0xff) << 24) | ((v & 0xff00) << 8) | ((v >> 8) & 0xff00) | (v >> 24);
}

std::uint32_t load_le32(const std::uint8_t* p) {
  return std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) | (std::uint32_t{p[2]} << 16) |
         (std::uint32_t{p[3]} << 24);
}

class ByteReader {
 public:
  ByteReader(std::span<const std::uint8_t> bytes, Endianness e) : bytes_(bytes), swap_(e == Endianness::Big) {}

  std::uint32_t u32(std::size_t offset) const {
    const auto v = load_le32(bytes_.data() + offset);
    return swap_ ? bswap32(v) : v;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  bool swap_;
};

void put32(std::string& out, std::uint32_t v, Endianness e) {
  if (e == Endianness::Big) v = bswap32(v);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put16(std::string& out, std::uint16_t v, Endianness e) {
  if (e == Endianness::Big) v = static_cast<std::uint16_t>((v >> 8) | (v << 8));
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorKind::IoError, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string line_error(std::size_t line, const std::string& what) {
  return "line " + std::to_string(line) + ": " + what;
}

// Smallest decimal rendering of T in milliseconds that parses back to T exactly.
std::string timescale_ms_text(double timescale) {
  double ms = timescale * 1000.0;
  for (int step = 0; step < 4 && ms / 1000.0 != timescale; ++step) {
    ms = std::nextafter(ms, ms / 1000.0 < timescale ? std::numeric_limits<double>::infinity() : 0.0);
  }
  return format_double(ms);
}

}  // namespace

PcapHeaderInfo parse_pcap_header(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) raise(ErrorKind::TruncatedFile, "pcap global header truncated at byte offset 0");
  const std::uint32_t raw = load_le32(bytes.data());
  PcapHeaderInfo info;
  if (raw == kMagicMicro || raw == kMagicNano) {
    info.endianness = Endianness::Little;
  } else if (bswap32(raw) == kMagicMicro || bswap32(raw) == kMagicNano) {
    info.endianness = Endianness::Big;
  } else {
    std::ostringstream msg;
    msg << "unrecognized pcap magic 0x" << std::hex << raw;
    raise(ErrorKind::UnsupportedFormat, msg.str());
  }
  const std::uint32_t magic = info.endianness == Endianness::Little ? raw : bswap32(raw);
  info.ts_resolution = magic == kMagicNano ? TimestampResolution::Nanosecond : TimestampResolution::Microsecond;
  if (bytes.size() < kGlobalHeaderSize) {
    raise(ErrorKind::TruncatedFile, "pcap global header truncated at byte offset " + std::to_string(bytes.size()));
  }
  ByteReader rd(bytes, info.endianness);
  info.snaplen = rd.u32(16);
  info.linktype = rd.u32(20);
  return info;
}

PacketSeries parse_pcap(std::span<const std::uint8_t> bytes, const PcapReadOptions& options,
                        const std::string& label) {
  const PcapHeaderInfo info = parse_pcap_header(bytes);
  const ByteReader rd(bytes, info.endianness);
  const double frac_scale = info.ts_resolution == TimestampResolution::Nanosecond ? 1e9 : 1e6;

  PacketSeries out;
  out.source_label = label;
  bool needs_sort = false;
  std::size_t offset = kGlobalHeaderSize;
  while (offset < bytes.size()) {
    if (bytes.size() - offset < kRecordHeaderSize) {
      raise(ErrorKind::TruncatedFile, "record header truncated at byte offset " + std::to_string(offset));
    }
    const std::uint32_t ts_sec = rd.u32(offset);
    const std::uint32_t ts_frac = rd.u32(offset + 4);
    const std::uint32_t incl_len = rd.u32(offset + 8);
    const std::uint32_t orig_len = rd.u32(offset + 12);
    if (incl_len > kMaxRecordLength) {
      raise(ErrorKind::MalformedTrace, "implausible captured length at byte offset " + std::to_string(offset));
    }
    if (bytes.size() - offset - kRecordHeaderSize < incl_len) {
      raise(ErrorKind::TruncatedFile, "record data truncated at byte offset " + std::to_string(offset));
    }
    if (orig_len == 0) {
      raise(ErrorKind::MalformedTrace, "zero wire length at byte offset " + std::to_string(offset));
    }
    const double ts = static_cast<double>(ts_sec) + static_cast<double>(ts_frac) / frac_scale;
    if (!out.records.empty() && ts < out.records.back().timestamp) {
      const double regress = out.records.back().timestamp - ts;
      if (regress > options.reorder_slack) {
        raise(ErrorKind::MalformedTrace, "timestamp regresses by " + format_double(regress) +
                                             " s at byte offset " + std::to_string(offset));
      }
      needs_sort = true;
    }
    out.records.push_back({ts, orig_len});
    offset += kRecordHeaderSize + incl_len;
  }
  if (out.records.empty()) raise(ErrorKind::EmptyInput, "pcap contains no packets");
  if (needs_sort) {
    std::stable_sort(out.records.begin(), out.records.end(),
                     [](const PacketRecord& a, const PacketRecord& b) { return a.timestamp < b.timestamp; });
  }
  return out;
}

PacketSeries read_pcap(const std::filesystem::path& path, const PcapReadOptions& options) {
  const auto bytes = read_bytes(path);
  try {
    return parse_pcap(bytes, options, path.stem().string());
  } catch (const Error& e) {
    throw e.with_context(path.string());
  }
}

std::size_t write_pcap_records(const PacketSeries& trace, const std::filesystem::path& path,
                               const PcapHeaderInfo& header) {
  const Endianness e = header.endianness;
  const bool nano = header.ts_resolution == TimestampResolution::Nanosecond;
  const double frac_scale = nano ? 1e9 : 1e6;

  std::string out;
  put32(out, nano ? kMagicNano : kMagicMicro, e);
  put16(out, 2, e);
  put16(out, 4, e);
  put32(out, 0, e);  // thiszone
  put32(out, 0, e);  // sigfigs
  put32(out, header.snaplen, e);
  put32(out, header.linktype, e);

  for (const auto& r : trace.records) {
    if (r.timestamp < 0.0 || r.timestamp >= 4294967296.0) {
      raise(ErrorKind::DomainError, "timestamp outside the pcap range: " + format_double(r.timestamp));
    }
    if (r.wire_bytes < 1 || r.wire_bytes > std::numeric_limits<std::uint32_t>::max()) {
      raise(ErrorKind::DomainError, "wire length outside the pcap range");
    }
    double sec = std::floor(r.timestamp);
    double frac = std::round((r.timestamp - sec) * frac_scale);
    if (frac >= frac_scale) {
      sec += 1.0;
      frac = 0.0;
    }
    const auto wire = static_cast<std::uint32_t>(r.wire_bytes);
    const std::uint32_t incl = std::min(wire, header.snaplen);
    put32(out, static_cast<std::uint32_t>(sec), e);
    put32(out, static_cast<std::uint32_t>(frac), e);
    put32(out, incl, e);
    put32(out, wire, e);
    out.append(incl, '\0');
  }
  write_file_atomic(path, out);
  return trace.records.size();
}

PacketSeries parse_packet_csv(std::string_view text, const std::string& label) {
  PacketSeries out;
  out.source_label = label;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;

    const auto comma = line.find(',');
    if (comma == std::string_view::npos) raise(ErrorKind::ParseError, line_error(line_no, "expected two columns"));
    const auto ts = parse_double(line.substr(0, comma));
    const auto bytes = parse_int(line.substr(comma + 1));
    if (!ts || !std::isfinite(*ts)) raise(ErrorKind::ParseError, line_error(line_no, "bad timestamp"));
    if (!bytes) raise(ErrorKind::ParseError, line_error(line_no, "bad byte count"));
    if (*bytes < 1) raise(ErrorKind::ParseError, line_error(line_no, "byte count must be ≥ 1"));
    out.records.push_back({*ts, static_cast<std::uint64_t>(*bytes)});
  }
  return out;
}

PacketSeries read_packet_csv(const std::filesystem::path& path) {
  try {
    return parse_packet_csv(read_file(path), path.stem().string());
  } catch (const Error& e) {
    throw e.with_context(path.string());
  }
}

void write_packet_csv(const PacketSeries& trace, const std::filesystem::path& path) {
  std::string out = "# timestamp_seconds,wire_bytes\n";
  for (const auto& r : trace.records) {
    out += format_double(r.timestamp);
    out += ',';
    out += std::to_string(r.wire_bytes);
    out += '\n';
  }
  write_file_atomic(path, out);
}

VolumeSeries parse_volume_tsv(std::string_view text, const std::string& label) {
  VolumeSeries vs;
  vs.source_label = label;
  bool have_timescale = false;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    line = trim(line);
    if (line_no == 1) {
      constexpr std::string_view key = "# timescale_ms=";
      if (!line.starts_with(key)) raise(ErrorKind::ParseError, line_error(1, "missing '# timescale_ms=' header"));
      const auto ms = parse_double(line.substr(key.size()));
      if (!ms || !(*ms > 0.0) || !std::isfinite(*ms)) raise(ErrorKind::ParseError, line_error(1, "bad timescale"));
      vs.timescale = *ms / 1000.0;
      have_timescale = true;
      continue;
    }
    if (line.empty()) continue;
    if (line.front() == '#') {
      constexpr std::string_view key = "# origin=";
      if (line.starts_with(key)) {
        const auto origin = parse_double(line.substr(key.size()));
        if (!origin) raise(ErrorKind::ParseError, line_error(line_no, "bad origin"));
        vs.origin = *origin;
      }
      continue;
    }
    // Volume is the first tab-separated field.
    const auto v = parse_double(line.substr(0, line.find('\t')));
    if (!v || !(*v >= 0.0) || !std::isfinite(*v)) raise(ErrorKind::ParseError, line_error(line_no, "bad volume"));
    vs.volumes.push_back(*v);
  }
  if (!have_timescale) raise(ErrorKind::ParseError, line_error(1, "missing '# timescale_ms=' header"));
  if (vs.volumes.empty()) raise(ErrorKind::EmptyInput, "volume file has no bins");
  return vs;
}

VolumeSeries read_volume_tsv(const std::filesystem::path& path) {
  try {
    return parse_volume_tsv(read_file(path), path.stem().string());
  } catch (const Error& e) {
    throw e.with_context(path.string());
  }
}

std::string format_volume_tsv(const VolumeSeries& vs) {
  std::string out = "# timescale_ms=" + timescale_ms_text(vs.timescale) + "\n";
  out += "# origin=" + format_double(vs.origin) + "\n";
  for (double v : vs.volumes) {
    out += format_double(v);
    out += '\n';
  }
  return out;
}

void write_volume_tsv(const VolumeSeries& vs, const std::filesystem::path& path) {
  validate(vs);
  write_file_atomic(path, format_volume_tsv(vs));
}

TraceInput load_trace(const std::filesystem::path& path, const PcapReadOptions& options) {
  const auto bytes = read_bytes(path);
  if (bytes.size() >= 4) {
    const std::uint32_t raw = load_le32(bytes.data());
    if (raw == kMagicMicro || raw == kMagicNano || bswap32(raw) == kMagicMicro || bswap32(raw) == kMagicNano) {
      try {
        return parse_pcap(bytes, options, path.stem().string());
      } catch (const Error& e) {
        throw e.with_context(path.string());
      }
    }
  }
  const std::string_view text(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  try {
    if (text.starts_with("# timescale_ms=")) return parse_volume_tsv(text, path.stem().string());
    return parse_packet_csv(text, path.stem().string());
  } catch (const Error& e) {
    throw e.with_context(path.string());
  }
}

VolumeSeries volumes_at(const TraceInput& input, double timescale) {
  if (const auto* packets = std::get_if<PacketSeries>(&input)) return aggregate(*packets, timescale);
  const auto& vs = std::get<VolumeSeries>(input);
  if (vs.timescale == timescale) return vs;
  return coarsen(vs, timescale);
}

const std::string& label_of(const TraceInput& input) {
  return std::visit([](const auto& t) -> const std::string& { return t.source_label; }, input);
}

}  // namespace voluma
