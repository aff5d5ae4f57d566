#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mcc/channel.hpp"
#include "mcc/dpr.hpp"
#include "mcc/result.hpp"
#include "mcc/wire_codec.hpp"

namespace mcc {

struct GeoPoint {
  double latitude = 0.0;
  double longitude = 0.0;
};

/// Mean Earth radius, equirectangular distance. Adequate for the few-metre
/// to few-kilometre separations the voter compares.
double horizontal_distance_m(GeoPoint a, GeoPoint b);

/// Even-odd rule on (latitude, longitude) treated as planar coordinates.
/// Points on an edge or vertex count as inside.
bool point_in_polygon(GeoPoint p, std::span<const GeoPoint> polygon);
bool point_on_boundary(GeoPoint p, std::span<const GeoPoint> polygon);

/// Horizontal polygon plus altitude band.
class FlightEnvelope {
 public:
  /// Needs >= 3 vertices, a simple polygon and min <= max.
  static Result<FlightEnvelope, std::string> make(std::vector<GeoPoint> polygon, double min_altitude_m,
                                                  double max_altitude_m);

  const std::vector<GeoPoint>& polygon() const { return polygon_; }
  double min_altitude_m() const { return min_altitude_m_; }
  double max_altitude_m() const { return max_altitude_m_; }

 private:
  FlightEnvelope(std::vector<GeoPoint> polygon, double lo, double hi)
      : polygon_(std::move(polygon)), min_altitude_m_(lo), max_altitude_m_(hi) {}

  std::vector<GeoPoint> polygon_;
  double min_altitude_m_;
  double max_altitude_m_;
};

struct ReceiverInput {
  GpsPositionObject object;
  bool crc_valid = false;
  bool fresh = false;

  /// Non-finite coordinates never vote, whatever the status word claims.
  bool usable() const {
    return crc_valid && fresh && object.has_valid_fix() && std::isfinite(object.latitude) &&
           std::isfinite(object.longitude) && std::isfinite(object.altitude);
  }
};

struct VoteConfig {
  double epsilon_horizontal_m = 50.0;
  double epsilon_vertical_m = 10.0;
};

struct VoteResult {
  double latitude = 0.0;
  double longitude = 0.0;
  double altitude = 0.0;
  // attitude and acceleration are voted the same way
  float pitch = 0.0f;
  float yaw = 0.0f;
  float roll = 0.0f;
  float x_acceleration = 0.0f;
  float y_acceleration = 0.0f;
  float z_acceleration = 0.0f;
  std::size_t contributing = 0;
  bool disagreement = false;
  double max_horizontal_deviation_m = 0.0;
  double max_vertical_deviation_m = 0.0;
};

enum class VoteError : std::uint8_t { NoValidReceiver };

/// Median of the values; even counts average the two middle elements.
/// Precondition: non-empty.
double median(std::vector<double> values);

/// Per-coordinate median over the usable receivers (CRC-valid, fresh, valid
/// fix). The disagreement flag compares every pair of usable receivers.
Result<VoteResult, VoteError> derive_position(std::span<const ReceiverInput> receivers, const VoteConfig& config = {});

enum class EnvelopeVerdict : std::uint8_t { Inside, Outside };

EnvelopeVerdict envelope_check(const VoteResult& position, const FlightEnvelope& envelope);

enum class CheckOutcome : std::uint8_t { Inside, Outside, Fault };
enum class SafetyMode : std::uint8_t { Nominal, SwitchedRedundant, Cutoff };
enum class SafetyAction : std::uint8_t { SwitchPwmRelay, CutMotors, TriggerParachute };

std::string_view to_string(CheckOutcome c);
std::string_view to_string(SafetyMode m);
std::string_view to_string(SafetyAction a);

struct SafetyState {
  SafetyMode mode = SafetyMode::Nominal;
  std::uint32_t breach_counter = 0;
  bool redundant_controller_present = true;
  bool parachute_triggered = false;

  bool operator==(const SafetyState&) const = default;
};

struct SafetyStep {
  SafetyState state;
  std::vector<SafetyAction> actions;
};

inline constexpr std::uint32_t kDefaultGraceCycles = 20;

/// One-way escalation: NOMINAL -> SWITCHED_REDUNDANT -> CUTOFF, or straight to
/// CUTOFF without a redundant controller. CUTOFF is absorbing.
SafetyStep safety_step(const SafetyState& state, CheckOutcome check, std::uint32_t grace_cycles = kDefaultGraceCycles);

struct HorusConfig {
  std::size_t receivers = 3;
  VoteConfig vote;
  std::uint32_t grace_cycles = kDefaultGraceCycles;
  bool redundant_controller = true;
  FreshnessConfig receiver_freshness;
};

/// Why a receiver slot did not contribute this cycle.
enum class ReceiverIssue : std::uint8_t { None, NoFrame, WrongLength, CrcMismatch, Stale, NoFix };

std::string_view to_string(ReceiverIssue r);

struct HorusCycleOutput {
  std::uint64_t cycle = 0;
  std::uint32_t timestamp = 0;
  std::vector<ReceiverInput> inputs;
  std::vector<ReceiverIssue> issues;
  std::optional<VoteResult> vote;
  CheckOutcome check = CheckOutcome::Fault;
  SafetyState before;
  SafetyStep step;
  /// Serialized profile handed to the RFID link.
  Bytes profile;
  /// Frames the RFID link delivered and whether the DPR accepted each.
  std::vector<bool> dpr_writes_accepted;
};

/// The flight-path safety monitor. It only holds a ProducerPort into the DPR,
/// so it writes its profile region and can never read any region.
class HorusMonitor {
 public:
  HorusMonitor(HorusConfig config, FlightEnvelope envelope, ProducerPort port);

  const HorusConfig& config() const { return config_; }
  const FlightEnvelope& envelope() const { return envelope_; }
  const SafetyState& state() const { return state_; }

  /// One 10 ms tick: receive one frame per GPS link, vote, build and send the
  /// profile over the RFID link into the DPR, rotate, then run the envelope
  /// check and the safety state machine.
  HorusCycleOutput cycle(std::uint64_t cycle, std::span<const GpsPositionObject> receiver_objects,
                         std::span<SerialChannel> receiver_links, SerialChannel& rfid);

 private:
  HorusConfig config_;
  FlightEnvelope envelope_;
  ProducerPort port_;
  SafetyState state_;
  std::vector<FreshnessTracker> receiver_freshness_;
};

}  // namespace mcc
