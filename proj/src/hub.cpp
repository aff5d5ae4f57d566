#include "mcc/hub.hpp"

#include <algorithm>

#include "mcc/crc32.hpp"
#include "mcc/wire_codec.hpp"

namespace mcc {

std::string_view to_string(CriticalityLevel c) {
  switch (c) {
    case CriticalityLevel::Forbidden: return "FORBIDDEN";
    case CriticalityLevel::NonCritical: return "NON_CRITICAL";
    case CriticalityLevel::SafetyRelevant: return "SAFETY_RELEVANT";
  }
  return "unknown";
}

std::string_view to_string(DownlinkError e) {
  switch (e) {
    case DownlinkError::TooShort: return "too_short";
    case DownlinkError::CrcMismatch: return "crc_mismatch";
    case DownlinkError::UnknownSource: return "unknown_source";
    case DownlinkError::UnknownRegion: return "unknown_region";
    case DownlinkError::WrongLength: return "wrong_length";
    case DownlinkError::Denied: return "denied";
    case DownlinkError::NotWritable: return "not_writable";
  }
  return "unknown";
}

std::string_view to_string(PositionRefusal r) {
  switch (r) {
    case PositionRefusal::NeverWritten: return "never_written";
    case PositionRefusal::StalePosition: return "stale_position";
    case PositionRefusal::PositionCrcMismatch: return "position_crc_mismatch";
    case PositionRefusal::NoValidFix: return "no_valid_fix";
  }
  return "unknown";
}

PermissionMatrix PermissionMatrix::standard() {
  using F = FunctionId;
  using L = CriticalityLevel;
  PermissionMatrix m;
  m.set(F::BaseStation, F::FlightController, L::SafetyRelevant);
  m.set(F::BaseStation, F::ActiveLoad, L::NonCritical);
  m.set(F::Horus, F::BaseStation, L::SafetyRelevant);
  m.set(F::Horus, F::FlightController, L::SafetyRelevant);
  m.set(F::FlightController, F::BaseStation, L::SafetyRelevant);
  m.set(F::FlightController, F::ActiveLoad, L::NonCritical);
  m.set(F::ActiveLoad, F::BaseStation, L::NonCritical);
  m.set(F::ActiveLoad, F::FlightController, L::NonCritical);
  return m;
}

std::size_t PermissionMatrix::permitted_count() const {
  std::size_t n = 0;
  for (const auto& row : cells_) {
    n += static_cast<std::size_t>(std::count_if(row.begin(), row.end(),
                                                [](CriticalityLevel c) { return c != CriticalityLevel::Forbidden; }));
  }
  return n;
}

Result<CriticalityLevel, Denial> check_permission(const PermissionMatrix& matrix, FunctionId source,
                                                  FunctionId destination) {
  const CriticalityLevel level = matrix.level(source, destination);
  if (level == CriticalityLevel::Forbidden) return Denial{source, destination};
  return level;
}

Bytes frame_uplink(const UplinkFrame& frame) {
  Bytes out(8 + frame.payload.size());
  store_le<std::uint32_t>(out.data(), static_cast<std::uint32_t>(frame.source));
  store_le<std::uint32_t>(out.data() + 4, frame.region_index);
  std::copy(frame.payload.begin(), frame.payload.end(), out.begin() + 8);
  return out;
}

std::optional<ParsedUplink> parse_uplink(ByteView bytes, const MemoryMap& map) {
  if (bytes.size() < 8) return std::nullopt;
  const auto source = function_from_index(load_le<std::uint32_t>(bytes.data()));
  const std::uint32_t region = load_le<std::uint32_t>(bytes.data() + 4);
  if (!source || region >= map.regions().size()) return std::nullopt;
  if (bytes.size() - 8 != map.at(region).length) return std::nullopt;
  return ParsedUplink{*source, region, Bytes(bytes.begin() + 8, bytes.end())};
}

Bytes encode_downlink(const DownlinkFrame& frame) {
  Bytes out(8 + frame.payload.size() + 4);
  store_le<std::uint32_t>(out.data(), static_cast<std::uint32_t>(frame.source));
  store_le<std::uint32_t>(out.data() + 4, frame.region_index);
  std::copy(frame.payload.begin(), frame.payload.end(), out.begin() + 8);
  const std::size_t body = out.size() - 4;
  store_le<std::uint32_t>(out.data() + body, frame_crc().compute(ByteView(out).first(body)));
  return out;
}

Result<DownlinkFrame, DownlinkError> decode_downlink(ByteView bytes) {
  if (bytes.size() < 12) return DownlinkError::TooShort;
  const std::size_t body = bytes.size() - 4;
  if (frame_crc().compute(bytes.first(body)) != load_le<std::uint32_t>(bytes.data() + body)) {
    return DownlinkError::CrcMismatch;
  }
  const auto source = function_from_index(load_le<std::uint32_t>(bytes.data()));
  if (!source) return DownlinkError::UnknownSource;
  DownlinkFrame f;
  f.source = *source;
  f.region_index = load_le<std::uint32_t>(bytes.data() + 4);
  f.payload.assign(bytes.begin() + 8, bytes.begin() + static_cast<std::ptrdiff_t>(body));
  return f;
}

Result<GeoPoint, PositionRefusal> position_from_region(ByteView region_bytes, Freshness freshness) {
  namespace r = layout::reported;
  switch (freshness) {
    case Freshness::NeverWritten: return PositionRefusal::NeverWritten;
    case Freshness::Stale:
    case Freshness::Missing: return PositionRefusal::StalePosition;
    case Freshness::Fresh: break;
  }
  if (region_bytes.size() < kReportedFrameSize) return PositionRefusal::PositionCrcMismatch;
  const std::uint32_t stored = load_le<std::uint32_t>(region_bytes.data() + r::kPositionCrc);
  if (position_crc().compute(region_bytes.subspan(r::kLatitude, 16)) != stored) {
    return PositionRefusal::PositionCrcMismatch;
  }
  if ((load_le<std::uint16_t>(region_bytes.data() + r::kStatus) & status_bits::kValidFix) == 0) {
    return PositionRefusal::NoValidFix;
  }
  return GeoPoint{load_f64(region_bytes.data() + r::kLatitude), load_f64(region_bytes.data() + r::kLongitude)};
}

CommHub::CommHub(ActiveDpr& dpr, PermissionMatrix matrix, std::string position_region)
    : dpr_(dpr), matrix_(matrix), position_region_(std::move(position_region)) {}

FunctionId CommHub::destination_of(const RegionSpec& region) const {
  if (region.producer == FunctionId::FlightController) return region.consumer;
  if (region.consumer == FunctionId::FlightController) return region.producer;
  return region.consumer;
}

DownlinkOutcome CommHub::apply_downlink(ByteView frame) {
  DownlinkOutcome out;
  auto decoded = decode_downlink(frame);
  if (!decoded) {
    out.dropped = decoded.error();
    return out;
  }
  const DownlinkFrame& f = decoded.value();
  const MemoryMap& map = dpr_.map();
  if (f.region_index >= map.regions().size()) {
    out.dropped = DownlinkError::UnknownRegion;
    return out;
  }
  const RegionSpec& spec = map.at(f.region_index);
  out.region = spec.name;
  auto perm = check_permission(matrix_, f.source, destination_of(spec));
  if (!perm) {
    out.denial = perm.error();
    out.dropped = DownlinkError::Denied;
    return out;
  }
  if (spec.producer != FunctionId::FlightController) {
    out.dropped = DownlinkError::NotWritable;
    return out;
  }
  if (f.payload.size() != spec.length || !dpr_.write(spec.name, f.payload)) {
    out.dropped = DownlinkError::WrongLength;
    return out;
  }
  dpr_.rotate(spec.name);
  out.written = true;
  out.bytes_written = f.payload.size();
  return out;
}

HubCycleReport CommHub::cycle(std::uint64_t cycle, SerialChannel& radio_up, std::span<const Bytes> downlink_frames) {
  HubCycleReport report;
  report.cycle = cycle;
  const MemoryMap& map = dpr_.map();

  for (std::uint32_t i = 0; i < map.regions().size(); ++i) {
    const RegionSpec& spec = map.at(i);
    if (spec.consumer != FunctionId::FlightController) continue;

    ReadReport read = std::move(dpr_.read(spec.name).value());
    report.reads.push_back({spec.name, read.bytes.size()});
    report.freshness.push_back({spec.name, read.freshness, read.gap, read.timestamp, read.unchanged_reads});
    if (spec.name == position_region_) {
      last_position_bytes_ = read.bytes;
      last_position_freshness_ = read.freshness;
    }
    if (read.freshness == Freshness::NeverWritten || read.freshness == Freshness::Missing) continue;

    auto perm = check_permission(matrix_, spec.producer, FunctionId::BaseStation);
    if (!perm) continue;
    report.uplinks.push_back(UplinkFrame{spec.producer, spec.name, i, perm.value(), std::move(read.bytes), cycle});
  }

  std::stable_sort(report.uplinks.begin(), report.uplinks.end(),
                   [](const UplinkFrame& a, const UplinkFrame& b) { return a.level > b.level; });
  for (const UplinkFrame& u : report.uplinks) {
    for (Bytes& delivered : radio_up.transmit(frame_uplink(u), cycle)) {
      report.delivered_to_base.push_back(std::move(delivered));
    }
  }

  if (!downlink_frames.empty()) {
    report.downlink = apply_downlink(downlink_frames.front());
    report.downlink_discarded = downlink_frames.size() - 1;
  }
  return report;
}

Result<GeoPoint, PositionRefusal> CommHub::read_position_for_control() const {
  if (!last_position_bytes_) return PositionRefusal::NeverWritten;
  return position_from_region(*last_position_bytes_, last_position_freshness_);
}

}  // namespace mcc
