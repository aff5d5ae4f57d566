#include "mcc/horus.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mcc {

namespace {

constexpr double kEarthRadiusM = 6371008.8;
constexpr double kDegToRad = 3.14159265358979323846 / 180.0;

// x = longitude, y = latitude
double cross(GeoPoint o, GeoPoint a, GeoPoint b) {
  return (a.longitude - o.longitude) * (b.latitude - o.latitude) -
         (a.latitude - o.latitude) * (b.longitude - o.longitude);
}

double collinear_tolerance(GeoPoint a, GeoPoint b) {
  const double dx = b.longitude - a.longitude;
  const double dy = b.latitude - a.latitude;
  return 1e-12 * (dx * dx + dy * dy + 1e-12);
}

bool within_box(GeoPoint p, GeoPoint a, GeoPoint b) {
  return p.longitude >= std::min(a.longitude, b.longitude) && p.longitude <= std::max(a.longitude, b.longitude) &&
         p.latitude >= std::min(a.latitude, b.latitude) && p.latitude <= std::max(a.latitude, b.latitude);
}

bool on_segment(GeoPoint p, GeoPoint a, GeoPoint b) {
  return std::abs(cross(a, b, p)) <= collinear_tolerance(a, b) && within_box(p, a, b);
}

int orientation(GeoPoint o, GeoPoint a, GeoPoint b) {
  const double c = cross(o, a, b);
  if (std::abs(c) <= collinear_tolerance(o, a)) return 0;
  return c > 0 ? 1 : -1;
}

bool segments_intersect(GeoPoint p1, GeoPoint p2, GeoPoint q1, GeoPoint q2) {
  const int o1 = orientation(p1, p2, q1);
  const int o2 = orientation(p1, p2, q2);
  const int o3 = orientation(q1, q2, p1);
  const int o4 = orientation(q1, q2, p2);
  if (o1 != o2 && o3 != o4 && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0) return true;
  if (o1 == 0 && within_box(q1, p1, p2)) return true;
  if (o2 == 0 && within_box(q2, p1, p2)) return true;
  if (o3 == 0 && within_box(p1, q1, q2)) return true;
  if (o4 == 0 && within_box(p2, q1, q2)) return true;
  return false;
}

bool is_simple(const std::vector<GeoPoint>& poly) {
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const GeoPoint a = poly[i];
    const GeoPoint b = poly[(i + 1) % n];
    if (a.latitude == b.latitude && a.longitude == b.longitude) return false;
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
      if (adjacent) continue;
      if (segments_intersect(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n])) return false;
    }
  }
  // adjacent edges may only share their common vertex
  for (std::size_t i = 0; i < n; ++i) {
    const GeoPoint a = poly[i];
    const GeoPoint b = poly[(i + 1) % n];
    const GeoPoint c = poly[(i + 2) % n];
    if (orientation(a, b, c) == 0 && (on_segment(c, a, b) || on_segment(a, b, c))) {
      // c folds back over a-b, or a lies on b-c
      const double dot = (b.longitude - a.longitude) * (c.longitude - b.longitude) +
                         (b.latitude - a.latitude) * (c.latitude - b.latitude);
      if (dot < 0) return false;
    }
  }
  return true;
}

float median_f(const std::vector<const GpsPositionObject*>& objs, float PositionRecord::*field) {
  std::vector<double> v;
  v.reserve(objs.size());
  for (const GpsPositionObject* o : objs) v.push_back(o->*field);
  return static_cast<float>(median(std::move(v)));
}

double median_d(const std::vector<const GpsPositionObject*>& objs, double PositionRecord::*field) {
  std::vector<double> v;
  v.reserve(objs.size());
  for (const GpsPositionObject* o : objs) v.push_back(o->*field);
  return median(std::move(v));
}

}  // namespace

double horizontal_distance_m(GeoPoint a, GeoPoint b) {
  const double mean_lat = 0.5 * (a.latitude + b.latitude) * kDegToRad;
  const double dx = (b.longitude - a.longitude) * kDegToRad * std::cos(mean_lat);
  const double dy = (b.latitude - a.latitude) * kDegToRad;
  return kEarthRadiusM * std::sqrt(dx * dx + dy * dy);
}

bool point_on_boundary(GeoPoint p, std::span<const GeoPoint> polygon) {
  const std::size_t n = polygon.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (on_segment(p, polygon[i], polygon[(i + 1) % n])) return true;
  }
  return false;
}

bool point_in_polygon(GeoPoint p, std::span<const GeoPoint> polygon) {
  if (point_on_boundary(p, polygon)) return true;
  bool inside = false;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const GeoPoint a = polygon[i];
    const GeoPoint b = polygon[j];
    if ((a.latitude > p.latitude) != (b.latitude > p.latitude)) {
      const double x = (b.longitude - a.longitude) * (p.latitude - a.latitude) / (b.latitude - a.latitude) + a.longitude;
      if (p.longitude < x) inside = !inside;
    }
  }
  return inside;
}

Result<FlightEnvelope, std::string> FlightEnvelope::make(std::vector<GeoPoint> polygon, double min_altitude_m,
                                                         double max_altitude_m) {
  if (polygon.size() < 3) return std::string("envelope.polygon: needs at least 3 vertices");
  for (const GeoPoint& p : polygon) {
    if (!std::isfinite(p.latitude) || !std::isfinite(p.longitude) || std::abs(p.latitude) > 90.0 ||
        std::abs(p.longitude) > 180.0) {
      return std::string("envelope.polygon: vertex outside latitude/longitude range");
    }
  }
  if (!is_simple(polygon)) return std::string("envelope.polygon: polygon is not simple");
  if (!(min_altitude_m <= max_altitude_m)) return std::string("envelope.altitude: min exceeds max");
  return FlightEnvelope(std::move(polygon), min_altitude_m, max_altitude_m);
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of empty set");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

Result<VoteResult, VoteError> derive_position(std::span<const ReceiverInput> receivers, const VoteConfig& config) {
  std::vector<const GpsPositionObject*> usable;
  for (const ReceiverInput& r : receivers) {
    if (r.usable()) usable.push_back(&r.object);
  }
  if (usable.empty()) return VoteError::NoValidReceiver;

  VoteResult v;
  v.contributing = usable.size();
  v.latitude = median_d(usable, &PositionRecord::latitude);
  v.longitude = median_d(usable, &PositionRecord::longitude);
  v.altitude = median_d(usable, &PositionRecord::altitude);
  v.pitch = median_f(usable, &PositionRecord::pitch);
  v.yaw = median_f(usable, &PositionRecord::yaw);
  v.roll = median_f(usable, &PositionRecord::roll);
  v.x_acceleration = median_f(usable, &PositionRecord::x_acceleration);
  v.y_acceleration = median_f(usable, &PositionRecord::y_acceleration);
  v.z_acceleration = median_f(usable, &PositionRecord::z_acceleration);

  for (std::size_t i = 0; i < usable.size(); ++i) {
    for (std::size_t j = i + 1; j < usable.size(); ++j) {
      const double h = horizontal_distance_m({usable[i]->latitude, usable[i]->longitude},
                                             {usable[j]->latitude, usable[j]->longitude});
      const double z = std::abs(usable[i]->altitude - usable[j]->altitude);
      v.max_horizontal_deviation_m = std::max(v.max_horizontal_deviation_m, h);
      v.max_vertical_deviation_m = std::max(v.max_vertical_deviation_m, z);
    }
  }
  v.disagreement = v.max_horizontal_deviation_m > config.epsilon_horizontal_m ||
                   v.max_vertical_deviation_m > config.epsilon_vertical_m;
  return v;
}

EnvelopeVerdict envelope_check(const VoteResult& position, const FlightEnvelope& envelope) {
  const bool horizontal = point_in_polygon({position.latitude, position.longitude}, envelope.polygon());
  const bool vertical = position.altitude >= envelope.min_altitude_m() && position.altitude <= envelope.max_altitude_m();
  return horizontal && vertical ? EnvelopeVerdict::Inside : EnvelopeVerdict::Outside;
}

std::string_view to_string(CheckOutcome c) {
  switch (c) {
    case CheckOutcome::Inside: return "inside";
    case CheckOutcome::Outside: return "outside";
    case CheckOutcome::Fault: return "fault";
  }
  return "unknown";
}

std::string_view to_string(SafetyMode m) {
  switch (m) {
    case SafetyMode::Nominal: return "NOMINAL";
    case SafetyMode::SwitchedRedundant: return "SWITCHED_REDUNDANT";
    case SafetyMode::Cutoff: return "CUTOFF";
  }
  return "unknown";
}

std::string_view to_string(SafetyAction a) {
  switch (a) {
    case SafetyAction::SwitchPwmRelay: return "switch_pwm_relay";
    case SafetyAction::CutMotors: return "cut_motors";
    case SafetyAction::TriggerParachute: return "trigger_parachute";
  }
  return "unknown";
}

std::string_view to_string(ReceiverIssue r) {
  switch (r) {
    case ReceiverIssue::None: return "none";
    case ReceiverIssue::NoFrame: return "no_frame";
    case ReceiverIssue::WrongLength: return "wrong_length";
    case ReceiverIssue::CrcMismatch: return "crc_mismatch";
    case ReceiverIssue::Stale: return "stale";
    case ReceiverIssue::NoFix: return "no_fix";
  }
  return "unknown";
}

SafetyStep safety_step(const SafetyState& state, CheckOutcome check, std::uint32_t grace_cycles) {
  SafetyStep out{state, {}};
  SafetyState& s = out.state;
  if (check == CheckOutcome::Inside) {
    s.breach_counter = 0;
    return out;
  }
  auto cut_off = [&] {
    s.mode = SafetyMode::Cutoff;
    s.parachute_triggered = true;
    out.actions.push_back(SafetyAction::CutMotors);
    out.actions.push_back(SafetyAction::TriggerParachute);
  };
  switch (s.mode) {
    case SafetyMode::Nominal:
      s.breach_counter = 0;
      if (s.redundant_controller_present) {
        s.mode = SafetyMode::SwitchedRedundant;
        out.actions.push_back(SafetyAction::SwitchPwmRelay);
      } else {
        cut_off();
      }
      break;
    case SafetyMode::SwitchedRedundant:
      ++s.breach_counter;
      if (s.breach_counter >= grace_cycles) cut_off();
      break;
    case SafetyMode::Cutoff:
      ++s.breach_counter;
      break;
  }
  return out;
}

HorusMonitor::HorusMonitor(HorusConfig config, FlightEnvelope envelope, ProducerPort port)
    : config_(config), envelope_(std::move(envelope)), port_(port) {
  if (!is_supported_receiver_count(config_.receivers)) {
    throw std::invalid_argument("HorusMonitor: unsupported receiver count");
  }
  if (port_.region().length != profile_size(config_.receivers)) {
    throw std::invalid_argument("HorusMonitor: DPR region '" + port_.region().name + "' does not fit the profile");
  }
  state_.redundant_controller_present = config_.redundant_controller;
  receiver_freshness_.assign(config_.receivers, FreshnessTracker(config_.receiver_freshness));
}

HorusCycleOutput HorusMonitor::cycle(std::uint64_t cycle, std::span<const GpsPositionObject> receiver_objects,
                                     std::span<SerialChannel> receiver_links, SerialChannel& rfid) {
  const std::size_t n = config_.receivers;
  if (receiver_objects.size() != n || receiver_links.size() != n) {
    throw std::invalid_argument("HorusMonitor::cycle: need one object and one link per receiver");
  }

  HorusCycleOutput out;
  out.cycle = cycle;
  out.timestamp = static_cast<std::uint32_t>(cycle * config_.receiver_freshness.expected_increment_ms);
  out.before = state_;

  for (std::size_t k = 0; k < n; ++k) {
    const FrameBytes sent = encode_gps(receiver_objects[k]);
    const std::vector<Bytes> frames = receiver_links[k].transmit(sent.bytes(), cycle);

    ReceiverInput input;
    input.object.timestamp = out.timestamp;
    input.object.identifier = object_id::gps(k);
    input.object.status = status_bits::kReceiverFault;
    ReceiverIssue issue = frames.empty() ? ReceiverIssue::NoFrame : ReceiverIssue::None;

    for (const Bytes& f : frames) {
      auto decoded = decode_gps(f);
      if (decoded) {
        input.object = decoded.value();
        input.crc_valid = true;
      } else if (!input.crc_valid) {
        issue = decoded.error() == CodecError::WrongLength ? ReceiverIssue::WrongLength : ReceiverIssue::CrcMismatch;
      }
    }

    if (input.crc_valid) {
      const auto obs = receiver_freshness_[k].observe(input.object.timestamp);
      input.fresh = obs.state == Freshness::Fresh;
      if (!input.fresh) {
        issue = ReceiverIssue::Stale;
      } else if (!input.usable()) {
        issue = ReceiverIssue::NoFix;
      } else {
        issue = ReceiverIssue::None;
      }
    } else {
      receiver_freshness_[k].observe_missing();
    }
    out.inputs.push_back(input);
    out.issues.push_back(issue);
  }

  auto vote = derive_position(out.inputs, config_.vote);

  HorusProfile profile;
  ReportedPositionObject& rep = profile.reported;
  rep.timestamp = out.timestamp;
  rep.identifier = object_id::kReportedPosition;
  if (vote) {
    const VoteResult& v = vote.value();
    out.vote = v;
    rep.status = status_bits::kValidFix;
    rep.latitude = v.latitude;
    rep.longitude = v.longitude;
    rep.altitude = v.altitude;
    rep.pitch = v.pitch;
    rep.yaw = v.yaw;
    rep.roll = v.roll;
    rep.x_acceleration = v.x_acceleration;
    rep.y_acceleration = v.y_acceleration;
    rep.z_acceleration = v.z_acceleration;
  } else {
    rep.status = status_bits::kReceiverFault;
  }
  rep = seal(rep);

  profile.receivers.reserve(n);
  for (const ReceiverInput& in : out.inputs) profile.receivers.push_back(in.object);

  const FrameBytes block = serialize_profile(profile);
  out.profile = block.vector();
  for (const Bytes& f : rfid.transmit(block.bytes(), cycle)) {
    out.dpr_writes_accepted.push_back(port_.write(f).ok());
  }
  port_.rotate();

  if (out.vote) {
    out.check = envelope_check(*out.vote, envelope_) == EnvelopeVerdict::Inside ? CheckOutcome::Inside
                                                                                 : CheckOutcome::Outside;
  } else {
    out.check = CheckOutcome::Fault;
  }
  out.step = safety_step(state_, out.check, config_.grace_cycles);
  state_ = out.step.state;
  return out;
}

}  // namespace mcc
