#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "mcc/channel.hpp"
#include "mcc/dpr.hpp"
#include "mcc/functions.hpp"
#include "mcc/horus.hpp"
#include "mcc/result.hpp"

namespace mcc {

/// True position at a cycle; positions between points are interpolated
/// linearly, and held constant before the first and after the last point.
struct PathPoint {
  std::uint64_t cycle = 0;
  double latitude = 0.0;
  double longitude = 0.0;
  double altitude = 0.0;
};

struct FreezeEvent {
  std::uint64_t cycle = 0;
  std::string channel;
};

/// Babble active for cycles in [start, end).
struct BabbleWindow {
  std::string channel;
  std::uint64_t start = 0;
  std::uint64_t end = 0;
  BabbleConfig babble;
};

/// Receiver reports no fix (fault bit set) for cycles in [start, end).
struct ReceiverFaultWindow {
  std::size_t receiver = 0;
  std::uint64_t start = 0;
  std::uint64_t end = 0;
};

struct DownlinkEvent {
  std::uint64_t cycle = 0;
  FunctionId source = FunctionId::BaseStation;
  std::string region;
  Bytes payload;
};

struct Thresholds {
  double epsilon_horizontal_m = 50.0;
  double epsilon_vertical_m = 10.0;
  std::uint32_t stale_threshold = 3;
  std::uint32_t grace_cycles = kDefaultGraceCycles;
  std::uint32_t expected_increment_ms = 10;
};

FlightEnvelope default_envelope();

/// Everything a run depends on. Two equal scenarios produce byte-identical
/// metrics.
struct Scenario {
  std::string name = "nominal";
  std::uint64_t seed = 1;
  std::uint64_t cycles = 1000;
  std::size_t receivers = 3;
  double horizontal_noise_m = 0.5;
  double vertical_noise_m = 1.0;
  bool redundant_controller = true;
  Thresholds thresholds;
  MemoryMap memory_map = MemoryMap::default_map();
  FlightEnvelope envelope = default_envelope();
  std::vector<PathPoint> path = {{0, 47.5, 8.72, 50.0}};
  /// Keyed by channel name; absent channels are fault-free.
  std::map<std::string, FaultModel> channels;
  std::vector<FreezeEvent> freezes;
  std::vector<BabbleWindow> babbles;
  std::vector<ReceiverFaultWindow> receiver_faults;
  std::vector<DownlinkEvent> downlinks;

  /// "gps0".."gps{N-1}", "rfid", "radio_up", "radio_down".
  std::vector<std::string> channel_names() const;

  /// Empty when valid, else "<field>: <problem>".
  std::string validate() const;
};

struct ConfigError {
  std::string message;
};

Result<Scenario, ConfigError> parse_scenario(std::string_view json_text);
Result<Scenario, ConfigError> load_scenario(const std::filesystem::path& path);

}  // namespace mcc
