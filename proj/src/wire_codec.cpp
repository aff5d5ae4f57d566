#include "mcc/wire_codec.hpp"

#include <bit>
#include <stdexcept>
#include <string>

#include "mcc/crc32.hpp"

namespace mcc {

namespace {

bool same_f32(float a, float b) { return std::bit_cast<std::uint32_t>(a) == std::bit_cast<std::uint32_t>(b); }
bool same_f64(double a, double b) { return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b); }

void store_attitude(std::uint8_t* p, const PositionRecord& r) {
  store_f32(p + 0, r.pitch);
  store_f32(p + 4, r.yaw);
  store_f32(p + 8, r.roll);
  store_f32(p + 12, r.x_acceleration);
  store_f32(p + 16, r.y_acceleration);
  store_f32(p + 20, r.z_acceleration);
}

void load_attitude(const std::uint8_t* p, PositionRecord& r) {
  r.pitch = load_f32(p + 0);
  r.yaw = load_f32(p + 4);
  r.roll = load_f32(p + 8);
  r.x_acceleration = load_f32(p + 12);
  r.y_acceleration = load_f32(p + 16);
  r.z_acceleration = load_f32(p + 20);
}

void store_header(std::uint8_t* p, const PositionRecord& r) {
  store_le<std::uint32_t>(p + 0, r.timestamp);
  store_le<std::uint16_t>(p + 4, r.identifier);
  store_le<std::uint16_t>(p + 6, r.status);
}

void load_header(const std::uint8_t* p, PositionRecord& r) {
  r.timestamp = load_le<std::uint32_t>(p + 0);
  r.identifier = load_le<std::uint16_t>(p + 4);
  r.status = load_le<std::uint16_t>(p + 6);
}

bool gps_crc_ok(ByteView frame) {
  namespace g = layout::gps;
  return frame_crc().compute(frame.first(g::kFrameCrc)) == load_le<std::uint32_t>(frame.data() + g::kFrameCrc);
}

}  // namespace

bool bit_identical(const PositionRecord& a, const PositionRecord& b) {
  return a.timestamp == b.timestamp && a.identifier == b.identifier && a.status == b.status &&
         same_f64(a.latitude, b.latitude) && same_f64(a.longitude, b.longitude) &&
         same_f64(a.altitude, b.altitude) && same_f32(a.pitch, b.pitch) && same_f32(a.yaw, b.yaw) &&
         same_f32(a.roll, b.roll) && same_f32(a.x_acceleration, b.x_acceleration) &&
         same_f32(a.y_acceleration, b.y_acceleration) && same_f32(a.z_acceleration, b.z_acceleration);
}

bool bit_identical(const ReportedPositionObject& a, const ReportedPositionObject& b) {
  return a.position_crc == b.position_crc &&
         bit_identical(static_cast<const PositionRecord&>(a), static_cast<const PositionRecord&>(b));
}

std::string_view to_string(CodecError e) {
  switch (e) {
    case CodecError::WrongLength: return "wrong_length";
    case CodecError::CrcMismatch: return "crc_mismatch";
    case CodecError::CrcMismatchFrame: return "crc_mismatch_frame";
    case CodecError::CrcMismatchPosition: return "crc_mismatch_position";
  }
  return "unknown";
}

Result<FrameBytes, CodecError> FrameBytes::make(ObjectKind kind, Bytes bytes) {
  bool ok = false;
  switch (kind) {
    case ObjectKind::GpsPosition: ok = bytes.size() == kGpsFrameSize; break;
    case ObjectKind::ReportedPosition: ok = bytes.size() == kReportedFrameSize; break;
    case ObjectKind::Profile:
      if (bytes.size() > kReportedFrameSize && (bytes.size() - kReportedFrameSize) % kGpsFrameSize == 0) {
        ok = is_supported_receiver_count((bytes.size() - kReportedFrameSize) / kGpsFrameSize);
      }
      break;
  }
  if (!ok) return CodecError::WrongLength;
  return FrameBytes(kind, std::move(bytes));
}

std::uint32_t compute_position_crc(double latitude, double longitude) {
  std::uint8_t word[16];
  store_f64(word, latitude);
  store_f64(word + 8, longitude);
  return position_crc().compute(word);
}

ReportedPositionObject seal(ReportedPositionObject obj) {
  obj.position_crc = compute_position_crc(obj.latitude, obj.longitude);
  return obj;
}

FrameBytes encode_gps(const GpsPositionObject& obj) {
  namespace g = layout::gps;
  Bytes out(kGpsFrameSize);
  std::uint8_t* p = out.data();
  store_header(p, obj);
  store_f64(p + g::kLatitude, obj.latitude);
  store_f64(p + g::kLongitude, obj.longitude);
  store_f64(p + g::kAltitude, obj.altitude);
  store_attitude(p + g::kPitch, obj);
  store_le<std::uint32_t>(p + g::kFrameCrc, frame_crc().compute(ByteView(out).first(g::kFrameCrc)));
  return FrameBytes::make(ObjectKind::GpsPosition, std::move(out)).value();
}

GpsPositionObject decode_gps_fields(ByteView frame) {
  namespace g = layout::gps;
  if (frame.size() != kGpsFrameSize) throw std::invalid_argument("decode_gps_fields: frame must be 60 bytes");
  GpsPositionObject obj;
  const std::uint8_t* p = frame.data();
  load_header(p, obj);
  obj.latitude = load_f64(p + g::kLatitude);
  obj.longitude = load_f64(p + g::kLongitude);
  obj.altitude = load_f64(p + g::kAltitude);
  load_attitude(p + g::kPitch, obj);
  return obj;
}

Result<GpsPositionObject, CodecError> decode_gps(ByteView frame) {
  if (frame.size() != kGpsFrameSize) return CodecError::WrongLength;
  if (!gps_crc_ok(frame)) return CodecError::CrcMismatch;
  return decode_gps_fields(frame);
}

FrameBytes encode_reported(const ReportedPositionObject& obj) {
  namespace r = layout::reported;
  Bytes out(kReportedFrameSize);
  std::uint8_t* p = out.data();
  store_header(p, obj);
  store_f64(p + r::kLatitude, obj.latitude);
  store_f64(p + r::kLongitude, obj.longitude);
  store_le<std::uint32_t>(p + r::kPositionCrc, position_crc().compute(ByteView(out).subspan(r::kLatitude, 16)));
  store_f64(p + r::kAltitude, obj.altitude);
  store_attitude(p + r::kPitch, obj);
  store_le<std::uint32_t>(p + r::kFrameCrc, frame_crc().compute(ByteView(out).first(r::kFrameCrc)));
  return FrameBytes::make(ObjectKind::ReportedPosition, std::move(out)).value();
}

ReportedCheck verify_reported(ByteView frame) {
  namespace r = layout::reported;
  if (frame.size() != kReportedFrameSize) throw std::invalid_argument("verify_reported: frame must be 64 bytes");
  ReportedCheck check;
  check.frame_ok =
      frame_crc().compute(frame.first(r::kFrameCrc)) == load_le<std::uint32_t>(frame.data() + r::kFrameCrc);
  check.position_ok = position_crc().compute(frame.subspan(r::kLatitude, 16)) ==
                      load_le<std::uint32_t>(frame.data() + r::kPositionCrc);
  return check;
}

ReportedPositionObject decode_reported_fields(ByteView frame) {
  namespace r = layout::reported;
  if (frame.size() != kReportedFrameSize) {
    throw std::invalid_argument("decode_reported_fields: frame must be 64 bytes");
  }
  ReportedPositionObject obj;
  const std::uint8_t* p = frame.data();
  load_header(p, obj);
  obj.latitude = load_f64(p + r::kLatitude);
  obj.longitude = load_f64(p + r::kLongitude);
  obj.position_crc = load_le<std::uint32_t>(p + r::kPositionCrc);
  obj.altitude = load_f64(p + r::kAltitude);
  load_attitude(p + r::kPitch, obj);
  return obj;
}

Result<ReportedPositionObject, CodecError> decode_reported(ByteView frame) {
  if (frame.size() != kReportedFrameSize) return CodecError::WrongLength;
  const ReportedCheck check = verify_reported(frame);
  if (!check.position_ok) return CodecError::CrcMismatchPosition;
  if (!check.frame_ok) return CodecError::CrcMismatchFrame;
  return decode_reported_fields(frame);
}

FrameBytes serialize_profile(const HorusProfile& profile) {
  const std::size_t n = profile.receivers.size();
  if (!is_supported_receiver_count(n)) {
    throw std::invalid_argument("serialize_profile: unsupported receiver count " + std::to_string(n));
  }
  Bytes out;
  out.reserve(profile_size(n));
  const FrameBytes reported = encode_reported(profile.reported);
  out.insert(out.end(), reported.bytes().begin(), reported.bytes().end());
  for (const GpsPositionObject& rx : profile.receivers) {
    const FrameBytes f = encode_gps(rx);
    out.insert(out.end(), f.bytes().begin(), f.bytes().end());
  }
  return FrameBytes::make(ObjectKind::Profile, std::move(out)).value();
}

bool ParsedProfile::all_valid() const {
  for (bool v : valid) {
    if (!v) return false;
  }
  return true;
}

Result<ParsedProfile, CodecError> parse_profile(ByteView block, std::size_t n_receivers) {
  if (!is_supported_receiver_count(n_receivers) || block.size() != profile_size(n_receivers)) {
    return CodecError::WrongLength;
  }
  ParsedProfile parsed;
  parsed.valid.reserve(n_receivers + 1);

  const ByteView reported = block.first(kReportedFrameSize);
  const ReportedCheck check = verify_reported(reported);
  parsed.profile.reported = decode_reported_fields(reported);
  parsed.valid.push_back(check.frame_ok && check.position_ok);

  parsed.profile.receivers.reserve(n_receivers);
  for (std::size_t k = 0; k < n_receivers; ++k) {
    const ByteView slot = block.subspan(kReportedFrameSize + k * kGpsFrameSize, kGpsFrameSize);
    parsed.profile.receivers.push_back(decode_gps_fields(slot));
    parsed.valid.push_back(gps_crc_ok(slot));
  }
  return parsed;
}

}  // namespace mcc
