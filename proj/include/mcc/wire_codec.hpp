#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "mcc/bytes.hpp"
#include "mcc/result.hpp"

namespace mcc {

enum class ObjectKind : std::uint8_t { GpsPosition, ReportedPosition, Profile };

inline constexpr std::size_t kGpsFrameSize = 60;
inline constexpr std::size_t kReportedFrameSize = 64;

constexpr std::size_t profile_size(std::size_t receivers) {
  return kReportedFrameSize + kGpsFrameSize * receivers;
}

/// 1 (no redundancy), 2 (1oo2), 3 (TMR) or 5 (3oo5).
constexpr bool is_supported_receiver_count(std::size_t n) {
  return n == 1 || n == 2 || n == 3 || n == 5;
}

namespace object_id {
inline constexpr std::uint16_t kReportedPosition = 0x0001;
constexpr std::uint16_t gps(std::size_t receiver) {
  return static_cast<std::uint16_t>(0x0010 + receiver);
}
}  // namespace object_id

namespace status_bits {
inline constexpr std::uint16_t kValidFix = 1u << 0;
inline constexpr std::uint16_t kReceiverFault = 1u << 1;
}  // namespace status_bits

/// Byte offsets inside the encoded objects. All scalars little-endian.
namespace layout {
namespace gps {
inline constexpr std::size_t kTimestamp = 0;
inline constexpr std::size_t kIdentifier = 4;
inline constexpr std::size_t kStatus = 6;
inline constexpr std::size_t kLatitude = 8;
inline constexpr std::size_t kLongitude = 16;
inline constexpr std::size_t kAltitude = 24;
inline constexpr std::size_t kPitch = 32;
inline constexpr std::size_t kYaw = 36;
inline constexpr std::size_t kRoll = 40;
inline constexpr std::size_t kAccelX = 44;
inline constexpr std::size_t kAccelY = 48;
inline constexpr std::size_t kAccelZ = 52;
inline constexpr std::size_t kFrameCrc = 56;
}  // namespace gps
namespace reported {
inline constexpr std::size_t kTimestamp = 0;
inline constexpr std::size_t kIdentifier = 4;
inline constexpr std::size_t kStatus = 6;
inline constexpr std::size_t kLatitude = 8;
inline constexpr std::size_t kLongitude = 16;
inline constexpr std::size_t kPositionCrc = 24;
inline constexpr std::size_t kAltitude = 28;
inline constexpr std::size_t kPitch = 36;
inline constexpr std::size_t kYaw = 40;
inline constexpr std::size_t kRoll = 44;
inline constexpr std::size_t kAccelX = 48;
inline constexpr std::size_t kAccelY = 52;
inline constexpr std::size_t kAccelZ = 56;
inline constexpr std::size_t kFrameCrc = 60;
/// latitude || longitude || position CRC
inline constexpr std::size_t kProtectedWordSize = 20;
}  // namespace reported
}  // namespace layout

/// Fields shared by the GPS receiver and reported-position objects.
struct PositionRecord {
  std::uint32_t timestamp = 0;  // ms since monitor start
  std::uint16_t identifier = 0;
  std::uint16_t status = 0;
  double latitude = 0.0;   // deg WGS84
  double longitude = 0.0;  // deg WGS84
  double altitude = 0.0;   // m
  float pitch = 0.0f;      // deg
  float yaw = 0.0f;
  float roll = 0.0f;
  float x_acceleration = 0.0f;  // m/s^2, body frame
  float y_acceleration = 0.0f;
  float z_acceleration = 0.0f;

  bool has_valid_fix() const { return (status & status_bits::kValidFix) != 0; }
};

struct GpsPositionObject : PositionRecord {};

struct ReportedPositionObject : PositionRecord {
  /// CRC over the 16 latitude||longitude bytes; recomputed on encode.
  std::uint32_t position_crc = 0;
};

/// Field-wise equality on raw bit patterns (NaN == NaN when payloads match).
bool bit_identical(const PositionRecord& a, const PositionRecord& b);
bool bit_identical(const ReportedPositionObject& a, const ReportedPositionObject& b);

enum class CodecError : std::uint8_t {
  WrongLength,
  CrcMismatch,          // GPS object framing CRC
  CrcMismatchFrame,     // reported-position framing CRC
  CrcMismatchPosition,  // reported-position lat/lon CRC
};

std::string_view to_string(CodecError e);

/// Fixed-length encoded object or profile block.
class FrameBytes {
 public:
  static Result<FrameBytes, CodecError> make(ObjectKind kind, Bytes bytes);

  ObjectKind kind() const { return kind_; }
  ByteView bytes() const { return bytes_; }
  std::size_t size() const { return bytes_.size(); }
  const Bytes& vector() const { return bytes_; }

 private:
  FrameBytes(ObjectKind kind, Bytes bytes) : kind_(kind), bytes_(std::move(bytes)) {}

  ObjectKind kind_;
  Bytes bytes_;
};

std::uint32_t compute_position_crc(double latitude, double longitude);

/// Copy of obj with position_crc set to match its latitude/longitude.
ReportedPositionObject seal(ReportedPositionObject obj);

FrameBytes encode_gps(const GpsPositionObject& obj);
Result<GpsPositionObject, CodecError> decode_gps(ByteView frame);

FrameBytes encode_reported(const ReportedPositionObject& obj);
/// Position CRC is checked first, so a lat/lon corruption reports
/// CrcMismatchPosition even though the framing CRC fails too.
Result<ReportedPositionObject, CodecError> decode_reported(ByteView frame);

struct ReportedCheck {
  bool frame_ok = false;
  bool position_ok = false;
};
/// Both verdicts for a 64-byte frame; length is a precondition.
ReportedCheck verify_reported(ByteView frame);

/// Decodes the fields without checking either CRC. Frame length must match.
GpsPositionObject decode_gps_fields(ByteView frame);
ReportedPositionObject decode_reported_fields(ByteView frame);

struct HorusProfile {
  ReportedPositionObject reported;
  std::vector<GpsPositionObject> receivers;
};

/// reported || receivers[0] || ... || receivers[N-1]. Each object keeps its own
/// CRC footer. Throws std::invalid_argument for an unsupported receiver count.
FrameBytes serialize_profile(const HorusProfile& profile);

struct ParsedProfile {
  HorusProfile profile;
  /// One flag per object slot: [reported, gps0, gps1, ...]. Invalid slots still
  /// carry the raw decoded fields.
  std::vector<bool> valid;

  bool all_valid() const;
};

Result<ParsedProfile, CodecError> parse_profile(ByteView block, std::size_t n_receivers);

}  // namespace mcc
