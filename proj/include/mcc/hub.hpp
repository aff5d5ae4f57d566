#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mcc/channel.hpp"
#include "mcc/dpr.hpp"
#include "mcc/functions.hpp"
#include "mcc/horus.hpp"
#include "mcc/result.hpp"

namespace mcc {

/// Ordered for scheduling: FORBIDDEN < NON_CRITICAL < SAFETY_RELEVANT.
enum class CriticalityLevel : std::uint8_t { Forbidden = 0, NonCritical = 1, SafetyRelevant = 2 };

std::string_view to_string(CriticalityLevel c);

struct Denial {
  FunctionId source;
  FunctionId destination;
  bool operator==(const Denial&) const = default;
};

/// (source, destination) -> criticality. Rows are sources.
class PermissionMatrix {
 public:
  /// Every cell FORBIDDEN.
  PermissionMatrix() = default;

  /// The on-board criticality table: 8 permitted cells, nothing written into
  /// HORUS, no self-writes.
  static PermissionMatrix standard();

  CriticalityLevel level(FunctionId source, FunctionId destination) const {
    return cells_[index(source)][index(destination)];
  }
  void set(FunctionId source, FunctionId destination, CriticalityLevel level) {
    cells_[index(source)][index(destination)] = level;
  }
  std::size_t permitted_count() const;

 private:
  static std::size_t index(FunctionId f) { return static_cast<std::size_t>(f); }
  std::array<std::array<CriticalityLevel, kFunctionCount>, kFunctionCount> cells_{};
};

Result<CriticalityLevel, Denial> check_permission(const PermissionMatrix& matrix, FunctionId source,
                                                  FunctionId destination);

/// Region content forwarded verbatim to the base station.
struct UplinkFrame {
  FunctionId source = FunctionId::FlightController;
  std::string region;
  std::uint32_t region_index = 0;
  CriticalityLevel level = CriticalityLevel::Forbidden;
  Bytes payload;
  std::uint64_t cycle = 0;
};

/// Radio framing: u32 source function, u32 region index, payload. The payload
/// carries its own object CRCs, so the hub adds none.
Bytes frame_uplink(const UplinkFrame& frame);

struct ParsedUplink {
  FunctionId source;
  std::uint32_t region_index;
  Bytes payload;
};
std::optional<ParsedUplink> parse_uplink(ByteView bytes, const MemoryMap& map);

/// Base station -> hub: u32 source function, u32 destination region index,
/// payload, u32 CRC (framing polynomial) over everything before it.
struct DownlinkFrame {
  FunctionId source = FunctionId::BaseStation;
  std::uint32_t region_index = 0;
  Bytes payload;
};

enum class DownlinkError : std::uint8_t {
  TooShort,
  CrcMismatch,
  UnknownSource,
  UnknownRegion,
  WrongLength,
  Denied,
  NotWritable,
};

std::string_view to_string(DownlinkError e);

Bytes encode_downlink(const DownlinkFrame& frame);
Result<DownlinkFrame, DownlinkError> decode_downlink(ByteView bytes);

struct RegionRead {
  std::string region;
  std::size_t bytes = 0;
  bool operator==(const RegionRead&) const = default;
  auto operator<=>(const RegionRead&) const = default;
};

struct RegionFreshness {
  std::string region;
  Freshness freshness = Freshness::NeverWritten;
  bool gap = false;
  std::uint32_t timestamp = 0;
  std::uint32_t unchanged_reads = 0;
};

struct DownlinkOutcome {
  bool written = false;
  std::size_t bytes_written = 0;
  std::optional<DownlinkError> dropped;
  std::optional<Denial> denial;
  std::string region;
};

struct HubCycleReport {
  std::uint64_t cycle = 0;
  std::vector<RegionRead> reads;
  std::vector<RegionFreshness> freshness;
  /// In transmission order: SAFETY_RELEVANT first, then by region offset.
  std::vector<UplinkFrame> uplinks;
  /// Frames the radio link delivered to the base station.
  std::vector<Bytes> delivered_to_base;
  std::optional<DownlinkOutcome> downlink;
  /// Extra downlink frames beyond the one processed per cycle.
  std::size_t downlink_discarded = 0;
};

enum class PositionRefusal : std::uint8_t { NeverWritten, StalePosition, PositionCrcMismatch, NoValidFix };

std::string_view to_string(PositionRefusal r);

/// Lat/lon of the reported-position object at the start of a profile region,
/// released only when the region is fresh and the position CRC verifies.
Result<GeoPoint, PositionRefusal> position_from_region(ByteView region_bytes, Freshness freshness);

/// The flight controller's side of the DPR. Reads every region it consumes
/// once per cycle, forwards permitted ones to the base station unchanged, and
/// applies at most one downlink write.
class CommHub {
 public:
  explicit CommHub(ActiveDpr& dpr, PermissionMatrix matrix = PermissionMatrix::standard(),
                   std::string position_region = "horus_profile");

  const PermissionMatrix& matrix() const { return matrix_; }

  HubCycleReport cycle(std::uint64_t cycle, SerialChannel& radio_up, std::span<const Bytes> downlink_frames);

  /// Uses this cycle's read of the profile region; adds no DPR access.
  Result<GeoPoint, PositionRefusal> read_position_for_control() const;

  /// Function at the far end of a region from the hub.
  FunctionId destination_of(const RegionSpec& region) const;

 private:
  DownlinkOutcome apply_downlink(ByteView frame);

  ActiveDpr& dpr_;
  PermissionMatrix matrix_;
  std::string position_region_;
  std::optional<Bytes> last_position_bytes_;
  Freshness last_position_freshness_ = Freshness::NeverWritten;
};

}  // namespace mcc
