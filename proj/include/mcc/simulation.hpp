#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "mcc/channel.hpp"
#include "mcc/dpr.hpp"
#include "mcc/horus.hpp"
#include "mcc/hub.hpp"
#include "mcc/scenario.hpp"

namespace mcc {

/// A broken internal contract (simulation bug), as opposed to a bad scenario.
class InvariantViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One metrics line.
struct MetricsRecord {
  std::uint64_t cycle = 0;
  std::string kind;
  nlohmann::ordered_json detail;

  std::string to_line() const;
};

/// Ground-side sink: CRC-checks every uplink it receives and counts.
struct BaseStationCounters {
  std::uint64_t frames_received = 0;
  std::uint64_t frames_clean = 0;
  std::uint64_t frames_with_crc_fail = 0;
  std::uint64_t malformed = 0;
  std::uint64_t crc_fail_objects = 0;
};

struct CycleReport {
  std::uint64_t cycle = 0;
  HorusCycleOutput horus;
  HubCycleReport hub;
  std::vector<MetricsRecord> records;
};

/// Lock-step cycle driver: world update, HORUS, hub, base-station intake.
class Simulation {
 public:
  explicit Simulation(Scenario scenario);

  const Scenario& scenario() const { return scenario_; }
  std::uint64_t cycle() const { return cycle_; }
  bool finished() const { return cycle_ >= scenario_.cycles; }

  /// Advances one tick. Throws InvariantViolation on a contract breach.
  CycleReport step();

  /// Runs the remaining cycles, writing one JSON object per line, then a
  /// final summary record.
  void run(std::ostream& metrics);

  ActiveDpr& dpr() { return *dpr_; }
  const HorusMonitor& horus() const { return *horus_; }
  const CommHub& hub() const { return *hub_; }
  /// Throws std::out_of_range for an unknown name.
  SerialChannel& channel(const std::string& name);
  const BaseStationCounters& base_station() const { return base_; }
  const std::map<std::string, std::uint64_t>& event_counts() const { return event_counts_; }

  /// Interpolated true position.
  PathPoint truth_at(std::uint64_t cycle) const;

 private:
  std::vector<GpsPositionObject> sample_receivers(std::uint64_t cycle);
  void apply_timed_events(std::uint64_t cycle, std::vector<MetricsRecord>& records);
  void intake(const HubCycleReport& hub, std::vector<MetricsRecord>& records);
  void check_invariants(const CycleReport& report);
  MetricsRecord summary() const;

  Scenario scenario_;
  std::unique_ptr<ActiveDpr> dpr_;
  std::map<std::string, SerialChannel> channels_;
  std::vector<SerialChannel> receiver_links_;
  std::unique_ptr<HorusMonitor> horus_;
  std::unique_ptr<CommHub> hub_;
  std::vector<SplitMix64> receiver_noise_;
  BaseStationCounters base_;
  std::map<std::string, std::uint64_t> event_counts_;
  std::optional<std::vector<RegionRead>> reference_reads_;
  std::uint64_t cycle_ = 0;
};

/// Seed actually used for a channel: the scenario seed mixed with the
/// channel name and any per-channel seed.
std::uint64_t channel_seed(std::uint64_t scenario_seed, const std::string& channel, std::uint64_t model_seed);

}  // namespace mcc
