#include "mcc/simulation.hpp"

#include <algorithm>
#include <cmath>

#include "mcc/rng.hpp"

namespace mcc {

namespace {

constexpr double kMetresPerDegree = 111320.0;
constexpr double kTwoPi = 6.28318530717958647692;

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string direction_of(const std::string& channel) {
  if (channel.rfind("gps", 0) == 0) return channel + "->horus";
  if (channel == "rfid") return "horus->dpr";
  if (channel == "radio_up") return "hub->base_station";
  return "base_station->hub";
}

std::string disposition(const DeliveryRecord& r) {
  if (r.dropped) return "dropped";
  return r.duplicated ? "duplicated" : "delivered";
}

nlohmann::ordered_json fault_list(const DeliveryRecord& r) {
  nlohmann::ordered_json faults = nlohmann::ordered_json::array();
  if (r.dropped) faults.push_back("drop");
  if (r.duplicated) faults.push_back("duplicate");
  if (std::any_of(r.flipped_bits.begin(), r.flipped_bits.end(), [](std::uint32_t f) { return f > 0; })) {
    faults.push_back("bit_flip");
  }
  if (r.frozen) faults.push_back("freeze");
  if (r.babble_frames > 0) faults.push_back("babble");
  return faults;
}

MetricsRecord record(std::uint64_t cycle, std::string kind, nlohmann::ordered_json detail = nlohmann::ordered_json::object()) {
  return MetricsRecord{cycle, std::move(kind), std::move(detail)};
}

std::string slot_name(std::size_t slot) { return slot == 0 ? "reported" : "gps" + std::to_string(slot - 1); }

}  // namespace

std::string MetricsRecord::to_line() const {
  nlohmann::ordered_json j;
  j["cycle"] = cycle;
  j["kind"] = kind;
  if (detail.is_object()) {
    for (const auto& [k, v] : detail.items()) j[k] = v;
  }
  return j.dump();
}

std::uint64_t channel_seed(std::uint64_t scenario_seed, const std::string& channel, std::uint64_t model_seed) {
  return mix_seed(mix_seed(scenario_seed, fnv1a(channel)), model_seed);
}

Simulation::Simulation(Scenario scenario) : scenario_(std::move(scenario)) {
  const std::string problem = scenario_.validate();
  if (!problem.empty()) throw std::invalid_argument(problem);

  const Thresholds& t = scenario_.thresholds;
  const FreshnessConfig freshness{t.expected_increment_ms, t.stale_threshold};
  dpr_ = std::make_unique<ActiveDpr>(scenario_.memory_map, freshness, 0x00);

  for (const std::string& name : scenario_.channel_names()) {
    FaultModel model;
    if (auto it = scenario_.channels.find(name); it != scenario_.channels.end()) model = it->second;
    model.seed = channel_seed(scenario_.seed, name, model.seed);
    if (name.rfind("gps", 0) == 0) {
      receiver_links_.emplace_back(name, direction_of(name), model);
    } else {
      channels_.emplace(name, SerialChannel(name, direction_of(name), model));
    }
  }

  HorusConfig hc;
  hc.receivers = scenario_.receivers;
  hc.vote = VoteConfig{t.epsilon_horizontal_m, t.epsilon_vertical_m};
  hc.grace_cycles = t.grace_cycles;
  hc.redundant_controller = scenario_.redundant_controller;
  hc.receiver_freshness = freshness;
  horus_ = std::make_unique<HorusMonitor>(hc, scenario_.envelope, dpr_->producer_port("horus_profile").value());
  hub_ = std::make_unique<CommHub>(*dpr_);

  for (std::size_t k = 0; k < scenario_.receivers; ++k) {
    receiver_noise_.emplace_back(mix_seed(scenario_.seed, 0x6e6f697365ull + k));
  }
}

SerialChannel& Simulation::channel(const std::string& name) {
  for (SerialChannel& link : receiver_links_) {
    if (link.name() == name) return link;
  }
  return channels_.at(name);
}

PathPoint Simulation::truth_at(std::uint64_t cycle) const {
  const auto& path = scenario_.path;
  if (cycle <= path.front().cycle) return {cycle, path.front().latitude, path.front().longitude, path.front().altitude};
  if (cycle >= path.back().cycle) return {cycle, path.back().latitude, path.back().longitude, path.back().altitude};
  const auto next = std::upper_bound(path.begin(), path.end(), cycle,
                                     [](std::uint64_t c, const PathPoint& p) { return c < p.cycle; });
  const PathPoint& b = *next;
  const PathPoint& a = *(next - 1);
  const double f = static_cast<double>(cycle - a.cycle) / static_cast<double>(b.cycle - a.cycle);
  return {cycle, a.latitude + f * (b.latitude - a.latitude), a.longitude + f * (b.longitude - a.longitude),
          a.altitude + f * (b.altitude - a.altitude)};
}

std::vector<GpsPositionObject> Simulation::sample_receivers(std::uint64_t cycle) {
  const PathPoint truth = truth_at(cycle);
  const auto timestamp = static_cast<std::uint32_t>(cycle * scenario_.thresholds.expected_increment_ms);
  const double cos_lat = std::max(std::cos(truth.latitude * kTwoPi / 360.0), 1e-6);

  std::vector<GpsPositionObject> out;
  for (std::size_t k = 0; k < scenario_.receivers; ++k) {
    SplitMix64& rng = receiver_noise_[k];
    // Box-Muller, three normals from four uniforms
    const double r1 = std::sqrt(-2.0 * std::log(1.0 - unit_interval(rng.next())));
    const double a1 = kTwoPi * unit_interval(rng.next());
    const double r2 = std::sqrt(-2.0 * std::log(1.0 - unit_interval(rng.next())));
    const double a2 = kTwoPi * unit_interval(rng.next());
    const double north = r1 * std::cos(a1) * scenario_.horizontal_noise_m;
    const double east = r1 * std::sin(a1) * scenario_.horizontal_noise_m;
    const double up = r2 * std::cos(a2) * scenario_.vertical_noise_m;

    GpsPositionObject obj;
    obj.timestamp = timestamp;
    obj.identifier = object_id::gps(k);
    obj.status = status_bits::kValidFix;
    for (const ReceiverFaultWindow& w : scenario_.receiver_faults) {
      if (w.receiver == k && cycle >= w.start && cycle < w.end) obj.status = status_bits::kReceiverFault;
    }
    obj.latitude = truth.latitude + north / kMetresPerDegree;
    obj.longitude = truth.longitude + east / (kMetresPerDegree * cos_lat);
    obj.altitude = truth.altitude + up;
    obj.z_acceleration = 9.80665f;
    out.push_back(obj);
  }
  return out;
}

void Simulation::apply_timed_events(std::uint64_t cycle, std::vector<MetricsRecord>& records) {
  for (const FreezeEvent& f : scenario_.freezes) {
    if (f.cycle != cycle) continue;
    auto res = channel(f.channel).freeze_channel(cycle);
    nlohmann::ordered_json d{{"channel", f.channel}, {"fault", "freeze_armed"}};
    if (!res) d["error"] = std::string(to_string(res.error()));
    records.push_back(record(cycle, "fault_injected", std::move(d)));
  }
  // windows are re-evaluated each tick; outside every window the model's own
  // babble setting applies
  std::map<std::string, std::optional<BabbleConfig>> babble;
  for (const BabbleWindow& w : scenario_.babbles) {
    if (cycle >= w.start && cycle < w.end) babble[w.channel] = w.babble;
  }
  for (const std::string& name : scenario_.channel_names()) {
    SerialChannel& ch = channel(name);
    auto it = babble.find(name);
    ch.set_babble(it != babble.end() ? it->second : ch.model().babble);
  }
}

void Simulation::intake(const HubCycleReport& hub, std::vector<MetricsRecord>& records) {
  const MemoryMap& map = scenario_.memory_map;
  for (const Bytes& frame : hub.delivered_to_base) {
    ++base_.frames_received;
    const auto parsed = parse_uplink(frame, map);
    if (!parsed) {
      ++base_.malformed;
      records.push_back(record(hub.cycle, "base_malformed", {{"bytes", frame.size()}}));
      continue;
    }
    const RegionSpec& spec = map.at(parsed->region_index);
    if (spec.name != "horus_profile") {
      ++base_.frames_clean;
      continue;
    }
    const ParsedProfile profile = parse_profile(parsed->payload, scenario_.receivers).value();
    std::uint64_t failures = 0;
    for (std::size_t slot = 0; slot < profile.valid.size(); ++slot) {
      if (profile.valid[slot]) continue;
      ++failures;
      records.push_back(record(hub.cycle, "crc_fail",
                               {{"region", spec.name}, {"slot", slot}, {"object", slot_name(slot)}}));
    }
    base_.crc_fail_objects += failures;
    if (failures == 0) {
      ++base_.frames_clean;
    } else {
      ++base_.frames_with_crc_fail;
    }
  }
}

CycleReport Simulation::step() {
  if (finished()) throw std::logic_error("Simulation::step past the configured cycle count");
  const std::uint64_t c = cycle_;
  CycleReport report;
  report.cycle = c;
  auto& recs = report.records;

  std::vector<std::size_t> log_marks;
  const std::vector<std::string> names = scenario_.channel_names();
  for (const std::string& name : names) log_marks.push_back(channel(name).log().size());

  apply_timed_events(c, recs);

  // HORUS
  const std::vector<GpsPositionObject> objs = sample_receivers(c);
  report.horus = horus_->cycle(c, objs, receiver_links_, channels_.at("rfid"));
  const HorusCycleOutput& h = report.horus;
  for (std::size_t k = 0; k < h.issues.size(); ++k) {
    if (h.issues[k] != ReceiverIssue::None) {
      recs.push_back(record(c, "receiver_invalid", {{"receiver", k}, {"reason", to_string(h.issues[k])}}));
    }
  }
  if (!h.vote) {
    recs.push_back(record(c, "vote_fault", {{"reason", "no_valid_receiver"}}));
  } else if (h.vote->disagreement) {
    recs.push_back(record(c, "vote_disagreement", {{"contributing", h.vote->contributing},
                                                   {"max_horizontal_m", h.vote->max_horizontal_deviation_m},
                                                   {"max_vertical_m", h.vote->max_vertical_deviation_m}}));
  }
  for (bool accepted : h.dpr_writes_accepted) {
    if (!accepted) recs.push_back(record(c, "dpr_reject", {{"region", "horus_profile"}, {"reason", "wrong_length"}}));
  }
  if (h.step.state.mode != h.before.mode) {
    nlohmann::ordered_json actions = nlohmann::ordered_json::array();
    for (SafetyAction a : h.step.actions) actions.push_back(to_string(a));
    recs.push_back(record(c, "safety_transition",
                          {{"from", to_string(h.before.mode)},
                           {"to", to_string(h.step.state.mode)},
                           {"check", to_string(h.check)},
                           {"actions", actions},
                           {"parachute", h.step.state.parachute_triggered}}));
  }

  // base station transmits scheduled downlinks, then the hub runs
  std::vector<Bytes> downlink_frames;
  for (const DownlinkEvent& d : scenario_.downlinks) {
    if (d.cycle != c) continue;
    const auto idx = static_cast<std::uint32_t>(*scenario_.memory_map.index_of(d.region));
    const Bytes frame = encode_downlink(DownlinkFrame{d.source, idx, d.payload});
    for (Bytes& f : channels_.at("radio_down").transmit(frame, c)) downlink_frames.push_back(std::move(f));
  }
  report.hub = hub_->cycle(c, channels_.at("radio_up"), downlink_frames);
  const HubCycleReport& hub = report.hub;
  for (const RegionFreshness& f : hub.freshness) {
    if (f.freshness == Freshness::Stale) {
      recs.push_back(record(c, "stale", {{"region", f.region}, {"unchanged_reads", f.unchanged_reads}, {"timestamp", f.timestamp}}));
    } else if (f.freshness == Freshness::Missing) {
      recs.push_back(record(c, "missing", {{"region", f.region}, {"unchanged_reads", f.unchanged_reads}}));
    }
    if (f.gap) recs.push_back(record(c, "gap", {{"region", f.region}, {"timestamp", f.timestamp}}));
  }
  for (const UplinkFrame& u : hub.uplinks) {
    recs.push_back(record(c, "uplink", {{"region", u.region},
                                        {"source", to_string(u.source)},
                                        {"level", to_string(u.level)},
                                        {"bytes", u.payload.size()},
                                        {"timestamp", load_le<std::uint32_t>(u.payload.data())}}));
  }
  if (hub.downlink) {
    const DownlinkOutcome& d = *hub.downlink;
    if (d.denial) {
      recs.push_back(record(c, "denial", {{"source", to_string(d.denial->source)},
                                          {"destination", to_string(d.denial->destination)},
                                          {"region", d.region},
                                          {"bytes_written", 0}}));
    }
    if (d.written) {
      recs.push_back(record(c, "downlink_write", {{"region", d.region}, {"bytes", d.bytes_written}}));
    } else {
      recs.push_back(record(c, "downlink_drop", {{"region", d.region}, {"reason", to_string(*d.dropped)}}));
    }
  }
  if (hub.downlink_discarded > 0) {
    recs.push_back(record(c, "downlink_discarded", {{"frames", hub.downlink_discarded}}));
  }

  intake(hub, recs);

  for (std::size_t i = 0; i < names.size(); ++i) {
    const SerialChannel& ch = channel(names[i]);
    for (std::size_t e = log_marks[i]; e < ch.log().size(); ++e) {
      const DeliveryRecord& r = ch.log()[e];
      recs.push_back(record(c, "delivery", {{"channel", ch.name()},
                                            {"direction", ch.direction()},
                                            {"bytes", r.bytes_in},
                                            {"disposition", disposition(r)},
                                            {"flipped_bits", r.flipped_bits},
                                            {"frozen", r.frozen},
                                            {"babble_frames", r.babble_frames},
                                            {"delivered", r.delivered}}));
      if (r.any_fault()) {
        recs.push_back(record(c, "fault_injected", {{"channel", ch.name()}, {"faults", fault_list(r)}}));
      }
    }
  }

  check_invariants(report);
  for (const MetricsRecord& r : recs) ++event_counts_[r.kind];
  ++cycle_;
  return report;
}

void Simulation::check_invariants(const CycleReport& report) {
  for (const RegionSpec& spec : scenario_.memory_map.regions()) {
    const RegionSnapshot snap = dpr_->snapshot(spec.name).value();
    const auto& r = snap.roles;
    if (r.write == r.read || r.write == r.scrub || r.read == r.scrub || r.write > 2 || r.read > 2 || r.scrub > 2) {
      throw InvariantViolation("region '" + spec.name + "': buffer roles are not a bijection");
    }
    const Bytes& scrubbed = snap.buffers[r.scrub];
    if (std::any_of(scrubbed.begin(), scrubbed.end(), [this](std::uint8_t b) { return b != dpr_->scrub_value(); })) {
      throw InvariantViolation("region '" + spec.name + "': scrub buffer holds data");
    }
  }

  std::vector<RegionRead> reads = report.hub.reads;
  std::sort(reads.begin(), reads.end());
  if (!reference_reads_) {
    reference_reads_ = reads;
  } else if (reads != *reference_reads_) {
    throw InvariantViolation("hub read budget changed at cycle " + std::to_string(report.cycle));
  }

  const HorusCycleOutput& h = report.horus;
  if (h.before.mode == SafetyMode::Cutoff && h.step.state.mode != SafetyMode::Cutoff) {
    throw InvariantViolation("left CUTOFF");
  }
  if (h.before.parachute_triggered && !h.step.state.parachute_triggered) {
    throw InvariantViolation("parachute flag reset");
  }
  if (h.step.state.mode == SafetyMode::Cutoff && !h.step.state.parachute_triggered) {
    throw InvariantViolation("CUTOFF without parachute");
  }
}

MetricsRecord Simulation::summary() const {
  nlohmann::ordered_json counts = nlohmann::ordered_json::object();
  for (const auto& [kind, n] : event_counts_) counts[kind] = n;
  const SafetyState& s = horus_->state();
  return record(cycle_, "summary",
                {{"scenario", scenario_.name},
                 {"seed", scenario_.seed},
                 {"cycles", cycle_},
                 {"events", counts},
                 {"base_station",
                  {{"frames_received", base_.frames_received},
                   {"frames_clean", base_.frames_clean},
                   {"frames_with_crc_fail", base_.frames_with_crc_fail},
                   {"malformed", base_.malformed},
                   {"crc_fail_objects", base_.crc_fail_objects}}},
                 {"final_mode", to_string(s.mode)},
                 {"parachute", s.parachute_triggered}});
}

void Simulation::run(std::ostream& metrics) {
  while (!finished()) {
    const CycleReport report = step();
    for (const MetricsRecord& r : report.records) metrics << r.to_line() << '\n';
  }
  metrics << summary().to_line() << '\n';
}

}  // namespace mcc
