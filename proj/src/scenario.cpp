#include "mcc/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "mcc/wire_codec.hpp"

namespace mcc {

namespace {

using nlohmann::json;

struct ParseFailure {
  std::string message;
};

[[noreturn]] void fail(const std::string& field, const std::string& problem) {
  throw ParseFailure{field + ": " + problem};
}

void reject_unknown_keys(const json& obj, const std::string& field, std::initializer_list<std::string_view> known) {
  for (const auto& [key, value] : obj.items()) {
    bool found = false;
    for (std::string_view k : known) found = found || k == key;
    if (!found) fail(field.empty() ? key : field + "." + key, "unknown key");
  }
}

const json& require_object(const json& j, const std::string& field) {
  if (!j.is_object()) fail(field, "expected an object");
  return j;
}

std::uint64_t as_u64(const json& j, const std::string& field) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer()) {
    const auto v = j.get<std::int64_t>();
    if (v < 0) fail(field, "must be non-negative");
    return static_cast<std::uint64_t>(v);
  }
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    try {
      std::size_t used = 0;
      const std::uint64_t v = std::stoull(s, &used, 0);
      if (used == s.size()) return v;
    } catch (const std::exception&) {
    }
  }
  fail(field, "expected a non-negative integer");
}

double as_double(const json& j, const std::string& field) {
  if (!j.is_number()) fail(field, "expected a number");
  return j.get<double>();
}

bool as_bool(const json& j, const std::string& field) {
  if (!j.is_boolean()) fail(field, "expected true or false");
  return j.get<bool>();
}

std::string as_string(const json& j, const std::string& field) {
  if (!j.is_string()) fail(field, "expected a string");
  return j.get<std::string>();
}

FunctionId as_function(const json& j, const std::string& field) {
  const auto f = function_from_string(as_string(j, field));
  if (!f) fail(field, "unknown function (base_station, horus, flight_controller, active_load)");
  return *f;
}

std::uint32_t as_u32(const json& j, const std::string& field) {
  const std::uint64_t v = as_u64(j, field);
  if (v > 0xffffffffull) fail(field, "does not fit in 32 bits");
  return static_cast<std::uint32_t>(v);
}

template <typename T, typename Fn>
void optional_field(const json& obj, const char* key, const std::string& prefix, T& out, Fn convert) {
  if (auto it = obj.find(key); it != obj.end()) out = convert(*it, prefix.empty() ? key : prefix + "." + key);
}

/// Either {"frame_hex": "..."} or {"fill": b, "length": n}.
Bytes parse_frame_bytes(const json& j, const std::string& field, std::optional<std::size_t> default_length) {
  if (auto it = j.find("frame_hex"); it != j.end()) {
    auto bytes = from_hex(as_string(*it, field + ".frame_hex"));
    if (!bytes) fail(field + ".frame_hex", "invalid hex");
    return *bytes;
  }
  if (auto it = j.find("payload_hex"); it != j.end()) {
    auto bytes = from_hex(as_string(*it, field + ".payload_hex"));
    if (!bytes) fail(field + ".payload_hex", "invalid hex");
    return *bytes;
  }
  if (auto it = j.find("fill"); it != j.end()) {
    const std::uint64_t fill = as_u64(*it, field + ".fill");
    if (fill > 0xff) fail(field + ".fill", "must be a byte value");
    std::size_t length = 0;
    if (auto len = j.find("length"); len != j.end()) {
      length = as_u64(*len, field + ".length");
    } else if (default_length) {
      length = *default_length;
    } else {
      fail(field + ".length", "required with fill");
    }
    return Bytes(length, static_cast<std::uint8_t>(fill));
  }
  fail(field, "needs frame_hex/payload_hex or fill");
}

FaultModel parse_fault_model(const json& j, const std::string& field) {
  require_object(j, field);
  reject_unknown_keys(j, field,
                      {"bit_flip_probability", "drop_probability", "duplicate_probability", "freeze", "babble", "seed"});
  FaultModel m;
  optional_field(j, "bit_flip_probability", field, m.bit_flip_probability, as_double);
  optional_field(j, "drop_probability", field, m.drop_probability, as_double);
  optional_field(j, "duplicate_probability", field, m.duplicate_probability, as_double);
  optional_field(j, "freeze", field, m.freeze, as_bool);
  optional_field(j, "seed", field, m.seed, as_u64);
  if (auto it = j.find("babble"); it != j.end()) {
    const std::string bf = field + ".babble";
    require_object(*it, bf);
    reject_unknown_keys(*it, bf, {"frame_hex", "fill", "length", "period"});
    BabbleConfig b;
    b.frame = parse_frame_bytes(*it, bf, std::nullopt);
    optional_field(*it, "period", bf, b.period, as_u32);
    m.babble = std::move(b);
  }
  const std::string bad = m.validate();
  if (!bad.empty()) fail(field + "." + bad, "out of range");
  return m;
}

void parse_events(const json& events, Scenario& s, std::vector<std::pair<std::size_t, json>>& deferred_downlinks) {
  if (!events.is_array()) fail("events", "expected an array");
  for (std::size_t i = 0; i < events.size(); ++i) {
    const json& e = events[i];
    const std::string field = "events[" + std::to_string(i) + "]";
    require_object(e, field);
    const auto type_it = e.find("type");
    if (type_it == e.end()) fail(field + ".type", "missing");
    const std::string type = as_string(*type_it, field + ".type");
    if (type == "freeze") {
      reject_unknown_keys(e, field, {"type", "cycle", "channel"});
      FreezeEvent f;
      if (!e.contains("cycle") || !e.contains("channel")) fail(field, "freeze needs cycle and channel");
      f.cycle = as_u64(e.at("cycle"), field + ".cycle");
      f.channel = as_string(e.at("channel"), field + ".channel");
      s.freezes.push_back(f);
    } else if (type == "babble") {
      reject_unknown_keys(e, field, {"type", "channel", "start", "end", "frame_hex", "fill", "length", "period"});
      if (!e.contains("channel") || !e.contains("start") || !e.contains("end")) {
        fail(field, "babble needs channel, start and end");
      }
      BabbleWindow w;
      w.channel = as_string(e.at("channel"), field + ".channel");
      w.start = as_u64(e.at("start"), field + ".start");
      w.end = as_u64(e.at("end"), field + ".end");
      w.babble.frame = parse_frame_bytes(e, field, std::nullopt);
      optional_field(e, "period", field, w.babble.period, as_u32);
      s.babbles.push_back(std::move(w));
    } else if (type == "receiver_fault") {
      reject_unknown_keys(e, field, {"type", "receiver", "start", "end"});
      if (!e.contains("receiver") || !e.contains("start") || !e.contains("end")) {
        fail(field, "receiver_fault needs receiver, start and end");
      }
      ReceiverFaultWindow w;
      w.receiver = as_u64(e.at("receiver"), field + ".receiver");
      w.start = as_u64(e.at("start"), field + ".start");
      w.end = as_u64(e.at("end"), field + ".end");
      s.receiver_faults.push_back(w);
    } else if (type == "downlink") {
      reject_unknown_keys(e, field, {"type", "cycle", "source", "region", "payload_hex", "fill", "length"});
      deferred_downlinks.emplace_back(i, e);
    } else {
      fail(field + ".type", "unknown event type '" + type + "'");
    }
  }
}

Scenario parse(const json& root) {
  require_object(root, "scenario");
  reject_unknown_keys(root, "", {"name", "seed", "cycles", "receivers", "redundant_controller", "thresholds",
                                 "memory_map", "envelope", "path", "channels", "events"});
  Scenario s;
  optional_field(root, "name", "", s.name, as_string);
  optional_field(root, "seed", "", s.seed, as_u64);
  optional_field(root, "cycles", "", s.cycles, as_u64);
  optional_field(root, "redundant_controller", "", s.redundant_controller, as_bool);

  if (auto it = root.find("receivers"); it != root.end()) {
    require_object(*it, "receivers");
    reject_unknown_keys(*it, "receivers", {"count", "horizontal_noise_m", "vertical_noise_m"});
    optional_field(*it, "count", "receivers", s.receivers, as_u64);
    optional_field(*it, "horizontal_noise_m", "receivers", s.horizontal_noise_m, as_double);
    optional_field(*it, "vertical_noise_m", "receivers", s.vertical_noise_m, as_double);
  }
  if (!is_supported_receiver_count(s.receivers)) fail("receivers.count", "must be one of 1, 2, 3, 5");

  if (auto it = root.find("thresholds"); it != root.end()) {
    require_object(*it, "thresholds");
    reject_unknown_keys(*it, "thresholds", {"epsilon_horizontal_m", "epsilon_vertical_m", "stale_threshold",
                                            "grace_cycles", "expected_increment_ms"});
    Thresholds& t = s.thresholds;
    optional_field(*it, "epsilon_horizontal_m", "thresholds", t.epsilon_horizontal_m, as_double);
    optional_field(*it, "epsilon_vertical_m", "thresholds", t.epsilon_vertical_m, as_double);
    optional_field(*it, "stale_threshold", "thresholds", t.stale_threshold, as_u32);
    optional_field(*it, "grace_cycles", "thresholds", t.grace_cycles, as_u32);
    optional_field(*it, "expected_increment_ms", "thresholds", t.expected_increment_ms, as_u32);
  }

  if (auto it = root.find("memory_map"); it != root.end()) {
    if (!it->is_array()) fail("memory_map", "expected an array");
    std::vector<RegionSpec> regions;
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string field = "memory_map[" + std::to_string(i) + "]";
      const json& r = require_object((*it)[i], field);
      reject_unknown_keys(r, field, {"name", "offset", "length", "producer", "consumer", "reserved"});
      for (const char* key : {"name", "offset", "length", "producer", "consumer"}) {
        if (!r.contains(key)) fail(field + "." + key, "missing");
      }
      RegionSpec spec;
      spec.name = as_string(r.at("name"), field + ".name");
      spec.offset = as_u32(r.at("offset"), field + ".offset");
      spec.length = as_u32(r.at("length"), field + ".length");
      spec.producer = as_function(r.at("producer"), field + ".producer");
      spec.consumer = as_function(r.at("consumer"), field + ".consumer");
      optional_field(r, "reserved", field, spec.reserved, as_bool);
      regions.push_back(std::move(spec));
    }
    auto map = MemoryMap::make(std::move(regions));
    if (!map) fail("memory_map", map.error());
    s.memory_map = std::move(map).value();
  } else {
    s.memory_map = MemoryMap::default_map(s.receivers);
  }

  if (auto it = root.find("envelope"); it != root.end()) {
    require_object(*it, "envelope");
    reject_unknown_keys(*it, "envelope", {"polygon", "altitude_m"});
    if (!it->contains("polygon") || !it->at("polygon").is_array()) fail("envelope.polygon", "expected an array");
    std::vector<GeoPoint> poly;
    const json& p = it->at("polygon");
    for (std::size_t i = 0; i < p.size(); ++i) {
      const std::string field = "envelope.polygon[" + std::to_string(i) + "]";
      if (!p[i].is_array() || p[i].size() != 2) fail(field, "expected [latitude, longitude]");
      poly.push_back({as_double(p[i][0], field), as_double(p[i][1], field)});
    }
    double lo = 0.0, hi = 120.0;
    if (auto alt = it->find("altitude_m"); alt != it->end()) {
      if (!alt->is_array() || alt->size() != 2) fail("envelope.altitude_m", "expected [min, max]");
      lo = as_double((*alt)[0], "envelope.altitude_m");
      hi = as_double((*alt)[1], "envelope.altitude_m");
    }
    auto env = FlightEnvelope::make(std::move(poly), lo, hi);
    if (!env) throw ParseFailure{env.error()};
    s.envelope = std::move(env).value();
  }

  if (auto it = root.find("path"); it != root.end()) {
    if (!it->is_array()) fail("path", "expected an array");
    s.path.clear();
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string field = "path[" + std::to_string(i) + "]";
      const json& pt = require_object((*it)[i], field);
      reject_unknown_keys(pt, field, {"cycle", "lat", "lon", "alt"});
      for (const char* key : {"cycle", "lat", "lon", "alt"}) {
        if (!pt.contains(key)) fail(field + "." + key, "missing");
      }
      s.path.push_back({as_u64(pt.at("cycle"), field + ".cycle"), as_double(pt.at("lat"), field + ".lat"),
                        as_double(pt.at("lon"), field + ".lon"), as_double(pt.at("alt"), field + ".alt")});
    }
  }

  if (auto it = root.find("channels"); it != root.end()) {
    require_object(*it, "channels");
    for (const auto& [name, model] : it->items()) {
      s.channels[name] = parse_fault_model(model, "channels." + name);
    }
  }

  std::vector<std::pair<std::size_t, json>> downlinks;
  if (auto it = root.find("events"); it != root.end()) parse_events(*it, s, downlinks);
  for (const auto& [i, e] : downlinks) {
    const std::string field = "events[" + std::to_string(i) + "]";
    if (!e.contains("cycle") || !e.contains("region")) fail(field, "downlink needs cycle and region");
    DownlinkEvent d;
    d.cycle = as_u64(e.at("cycle"), field + ".cycle");
    d.region = as_string(e.at("region"), field + ".region");
    if (e.contains("source")) d.source = as_function(e.at("source"), field + ".source");
    const auto idx = s.memory_map.index_of(d.region);
    if (!idx) fail(field + ".region", "unknown region '" + d.region + "'");
    d.payload = parse_frame_bytes(e, field, s.memory_map.at(*idx).length);
    s.downlinks.push_back(std::move(d));
  }

  const std::string problem = s.validate();
  if (!problem.empty()) throw ParseFailure{problem};
  return s;
}

}  // namespace

FlightEnvelope default_envelope() {
  return FlightEnvelope::make({{47.49, 8.71}, {47.49, 8.73}, {47.51, 8.73}, {47.51, 8.71}}, 0.0, 120.0).value();
}

std::vector<std::string> Scenario::channel_names() const {
  std::vector<std::string> names;
  for (std::size_t k = 0; k < receivers; ++k) names.push_back("gps" + std::to_string(k));
  names.insert(names.end(), {"rfid", "radio_up", "radio_down"});
  return names;
}

std::string Scenario::validate() const {
  if (!is_supported_receiver_count(receivers)) return "receivers.count: must be one of 1, 2, 3, 5";
  if (cycles == 0) return "cycles: must be positive";
  if (!(horizontal_noise_m >= 0.0)) return "receivers.horizontal_noise_m: must be non-negative";
  if (!(vertical_noise_m >= 0.0)) return "receivers.vertical_noise_m: must be non-negative";
  if (!(thresholds.epsilon_horizontal_m > 0.0)) return "thresholds.epsilon_horizontal_m: must be positive";
  if (!(thresholds.epsilon_vertical_m > 0.0)) return "thresholds.epsilon_vertical_m: must be positive";
  if (thresholds.stale_threshold == 0) return "thresholds.stale_threshold: must be positive";
  if (thresholds.expected_increment_ms == 0) return "thresholds.expected_increment_ms: must be positive";

  const auto horus = memory_map.index_of("horus_profile");
  if (!horus) return "memory_map: needs a 'horus_profile' region";
  const RegionSpec& hp = memory_map.at(*horus);
  if (hp.length != profile_size(receivers)) {
    return "memory_map.horus_profile.length: must be " + std::to_string(profile_size(receivers)) + " for " +
           std::to_string(receivers) + " receivers";
  }
  if (hp.producer != FunctionId::Horus || hp.consumer != FunctionId::FlightController) {
    return "memory_map.horus_profile: producer must be horus and consumer flight_controller";
  }

  if (path.empty()) return "path: needs at least one point";
  for (std::size_t i = 0; i < path.size(); ++i) {
    const PathPoint& p = path[i];
    if (i > 0 && p.cycle <= path[i - 1].cycle) return "path[" + std::to_string(i) + "].cycle: must increase";
    if (!(std::abs(p.latitude) <= 90.0) || !(std::abs(p.longitude) <= 180.0) || !std::isfinite(p.altitude)) {
      return "path[" + std::to_string(i) + "]: coordinates out of range";
    }
  }

  const std::vector<std::string> names = channel_names();
  const std::set<std::string> known(names.begin(), names.end());
  for (const auto& [name, model] : channels) {
    if (!known.contains(name)) return "channels." + name + ": unknown channel";
    const std::string bad = model.validate();
    if (!bad.empty()) return "channels." + name + "." + bad + ": out of range";
  }
  for (std::size_t i = 0; i < freezes.size(); ++i) {
    if (!known.contains(freezes[i].channel)) return "events.freeze[" + std::to_string(i) + "].channel: unknown";
  }
  for (std::size_t i = 0; i < babbles.size(); ++i) {
    const BabbleWindow& b = babbles[i];
    const std::string f = "events.babble[" + std::to_string(i) + "]";
    if (!known.contains(b.channel)) return f + ".channel: unknown";
    if (b.start >= b.end) return f + ": start must precede end";
    if (b.babble.frame.empty()) return f + ".frame: empty";
    if (b.babble.period == 0) return f + ".period: must be positive";
  }
  for (std::size_t i = 0; i < receiver_faults.size(); ++i) {
    const ReceiverFaultWindow& w = receiver_faults[i];
    const std::string f = "events.receiver_fault[" + std::to_string(i) + "]";
    if (w.receiver >= receivers) return f + ".receiver: out of range";
    if (w.start >= w.end) return f + ": start must precede end";
  }
  for (std::size_t i = 0; i < downlinks.size(); ++i) {
    if (!memory_map.index_of(downlinks[i].region)) {
      return "events.downlink[" + std::to_string(i) + "].region: unknown";
    }
  }
  return {};
}

Result<Scenario, ConfigError> parse_scenario(std::string_view json_text) {
  try {
    const json root = json::parse(json_text);
    return parse(root);
  } catch (const json::parse_error& e) {
    return ConfigError{std::string("scenario: invalid JSON: ") + e.what()};
  } catch (const ParseFailure& f) {
    return ConfigError{f.message};
  }
}

Result<Scenario, ConfigError> load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) return ConfigError{"scenario: cannot open '" + path.string() + "'"};
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str());
}

}  // namespace mcc
