#include "doctest.h"
#include "mcc/hub.hpp"

using namespace mcc;

namespace {

using F = FunctionId;
using L = CriticalityLevel;

Bytes sealed_profile(std::uint32_t timestamp) {
  HorusProfile p;
  p.reported.timestamp = timestamp;
  p.reported.identifier = object_id::kReportedPosition;
  p.reported.status = status_bits::kValidFix;
  p.reported.latitude = 47.5;
  p.reported.longitude = 8.72;
  p.reported = seal(p.reported);
  for (std::size_t k = 0; k < 3; ++k) {
    GpsPositionObject g;
    g.timestamp = timestamp;
    g.identifier = object_id::gps(k);
    g.status = status_bits::kValidFix;
    p.receivers.push_back(g);
  }
  return serialize_profile(p).vector();
}

void publish(ActiveDpr& dpr, const Bytes& profile) {
  REQUIRE(dpr.write("horus_profile", profile).ok());
  dpr.rotate("horus_profile");
}

}  // namespace

TEST_CASE("criticality matrix: all 16 pairs") {
  const PermissionMatrix m = PermissionMatrix::standard();
  const L expected[4][4] = {
      // to:  BS                 HORUS           FC                 AL
      {L::Forbidden, L::Forbidden, L::SafetyRelevant, L::NonCritical},       // from BS
      {L::SafetyRelevant, L::Forbidden, L::SafetyRelevant, L::Forbidden},    // from HORUS
      {L::SafetyRelevant, L::Forbidden, L::Forbidden, L::NonCritical},       // from FC
      {L::NonCritical, L::Forbidden, L::NonCritical, L::Forbidden},          // from AL
  };
  std::size_t permitted = 0;
  for (F s : kAllFunctions) {
    for (F d : kAllFunctions) {
      const L want = expected[static_cast<int>(s)][static_cast<int>(d)];
      CHECK(m.level(s, d) == want);
      const auto r = check_permission(m, s, d);
      CHECK(r.ok() == (want != L::Forbidden));
      if (r.ok()) {
        ++permitted;
      } else {
        CHECK(r.error() == Denial{s, d});
      }
    }
  }
  CHECK(permitted == 8);
  CHECK(m.permitted_count() == 8);
  CHECK(PermissionMatrix{}.permitted_count() == 0);
}

TEST_CASE("named matrix cases") {
  const PermissionMatrix m = PermissionMatrix::standard();
  CHECK_FALSE(check_permission(m, F::BaseStation, F::Horus).ok());
  CHECK(check_permission(m, F::Horus, F::BaseStation).value() == L::SafetyRelevant);
  CHECK_FALSE(check_permission(m, F::ActiveLoad, F::ActiveLoad).ok());
  CHECK(L::Forbidden < L::NonCritical);
  CHECK(L::NonCritical < L::SafetyRelevant);
}

TEST_CASE("downlink framing") {
  const Bytes enc = encode_downlink({F::BaseStation, 2, Bytes(64, 7)});
  CHECK(enc.size() == 8 + 64 + 4);
  const auto dec = decode_downlink(enc).value();
  CHECK(dec.source == F::BaseStation);
  CHECK(dec.region_index == 2);
  CHECK(dec.payload == Bytes(64, 7));
  Bytes bad = enc;
  bad[20] ^= 1;
  CHECK(decode_downlink(bad).error() == DownlinkError::CrcMismatch);
  CHECK(decode_downlink(Bytes(11)).error() == DownlinkError::TooShort);
  CHECK(decode_downlink(encode_downlink({static_cast<F>(9), 0, {}})).error() == DownlinkError::UnknownSource);
}

TEST_CASE("nominal cycle: one 244-byte read and one 244-byte uplink") {
  ActiveDpr dpr(MemoryMap::default_map(3));
  CommHub hub(dpr);
  SerialChannel up("radio_up", "fc->base", {});
  const Bytes profile = sealed_profile(0);
  publish(dpr, profile);
  const auto rep = hub.cycle(0, up, {});

  CHECK(rep.reads == std::vector<RegionRead>{{"horus_profile", 244}, {"active_hold", 64}});
  REQUIRE(rep.uplinks.size() == 1);
  CHECK(rep.uplinks[0].payload.size() == 244);
  CHECK(rep.uplinks[0].payload == profile);  // forwarded verbatim
  CHECK(rep.uplinks[0].source == F::Horus);
  CHECK(rep.uplinks[0].level == L::SafetyRelevant);
  REQUIRE(rep.delivered_to_base.size() == 1);
  const auto parsed = parse_uplink(rep.delivered_to_base[0], dpr.map()).value();
  CHECK(parsed.payload == profile);
  CHECK(parse_profile(parsed.payload, 3).value().all_valid());
  CHECK(dpr.total_counters().bytes_written == 244);
}

TEST_CASE("uplinks are ordered safety-relevant first") {
  // extra region the active load produces for the hub
  std::vector<RegionSpec> regions = {
      {"telemetry", 0x000, 16, F::ActiveLoad, F::FlightController, false},
      {"horus_profile", 0x100, 244, F::Horus, F::FlightController, false},
  };
  ActiveDpr dpr(MemoryMap::make(regions).value());
  CommHub hub(dpr);
  SerialChannel up("radio_up", "x", {});
  Bytes t(16, 3);
  store_le<std::uint32_t>(t.data(), 0);
  dpr.write("telemetry", t);
  dpr.rotate("telemetry");
  publish(dpr, sealed_profile(0));
  const auto rep = hub.cycle(0, up, {});
  REQUIRE(rep.uplinks.size() == 2);
  CHECK(rep.uplinks[0].region == "horus_profile");
  CHECK(rep.uplinks[1].region == "telemetry");
  CHECK(rep.uplinks[1].level == L::NonCritical);
}

TEST_CASE("downlink to HORUS is denied and writes nothing") {
  ActiveDpr dpr(MemoryMap::default_map(3));
  CommHub hub(dpr);
  SerialChannel up("radio_up", "x", {});
  const Bytes frame = encode_downlink({F::BaseStation, 0, Bytes(244, 0x42)});
  const auto rep = hub.cycle(0, up, std::vector<Bytes>{frame});
  REQUIRE(rep.downlink.has_value());
  CHECK_FALSE(rep.downlink->written);
  CHECK(rep.downlink->dropped == DownlinkError::Denied);
  CHECK(rep.downlink->denial == Denial{F::BaseStation, F::Horus});
  CHECK(rep.downlink->bytes_written == 0);
  CHECK(dpr.counters("horus_profile").value().bytes_written == 0);
  CHECK(dpr.total_counters().bytes_written == 0);
}

TEST_CASE("downlink to the active load is written; one per cycle") {
  ActiveDpr dpr(MemoryMap::default_map(3));
  CommHub hub(dpr);
  SerialChannel up("radio_up", "x", {});
  const Bytes ok = encode_downlink({F::BaseStation, 2, Bytes(64, 0x42)});
  const Bytes extra = encode_downlink({F::BaseStation, 2, Bytes(64, 0x43)});
  const auto rep = hub.cycle(0, up, std::vector<Bytes>{ok, extra});
  REQUIRE(rep.downlink.has_value());
  CHECK(rep.downlink->written);
  CHECK(rep.downlink->bytes_written == 64);
  CHECK(rep.downlink_discarded == 1);
  CHECK(dpr.snapshot("downlink").value().buffers[dpr.snapshot("downlink").value().roles.read] == Bytes(64, 0x42));

  const auto wrong = hub.cycle(1, up, std::vector<Bytes>{encode_downlink({F::BaseStation, 2, Bytes(63)})});
  CHECK(wrong.downlink->dropped == DownlinkError::WrongLength);
  const auto reserved = hub.cycle(2, up, std::vector<Bytes>{encode_downlink({F::BaseStation, 1, Bytes(64)})});
  CHECK(reserved.downlink->dropped == DownlinkError::NotWritable);
  const auto unknown = hub.cycle(3, up, std::vector<Bytes>{encode_downlink({F::BaseStation, 9, Bytes(64)})});
  CHECK(unknown.downlink->dropped == DownlinkError::UnknownRegion);
}

TEST_CASE("position for control") {
  ActiveDpr dpr(MemoryMap::default_map(3));
  CommHub hub(dpr);
  SerialChannel up("radio_up", "x", {});
  CHECK(hub.read_position_for_control().error() == PositionRefusal::NeverWritten);
  hub.cycle(0, up, {});
  CHECK(hub.read_position_for_control().error() == PositionRefusal::NeverWritten);

  publish(dpr, sealed_profile(0));
  hub.cycle(1, up, {});
  const GeoPoint p = hub.read_position_for_control().value();
  CHECK(p.latitude == 47.5);
  CHECK(p.longitude == 8.72);
  const auto reads_before = dpr.total_counters().reads;
  hub.read_position_for_control();
  CHECK(dpr.total_counters().reads == reads_before);

  // frozen timestamp: stale once three unchanged reads pile up
  for (int i = 0; i < 3; ++i) {
    publish(dpr, sealed_profile(0));
    hub.cycle(2 + i, up, {});
  }
  CHECK(hub.read_position_for_control().error() == PositionRefusal::StalePosition);

  Bytes flipped = sealed_profile(100);
  flipped[layout::reported::kLongitude + 2] ^= 0x08;
  publish(dpr, flipped);
  hub.cycle(10, up, {});
  CHECK(hub.read_position_for_control().error() == PositionRefusal::PositionCrcMismatch);
}

TEST_CASE("hub forwards content verbatim, corrupted or not") {
  ActiveDpr dpr(MemoryMap::default_map(3));
  CommHub hub(dpr);
  SerialChannel up("radio_up", "x", {});
  Bytes corrupted = sealed_profile(0);
  corrupted[100] ^= 0xff;
  publish(dpr, corrupted);
  const auto rep = hub.cycle(0, up, {});
  REQUIRE(rep.uplinks.size() == 1);
  CHECK(rep.uplinks[0].payload == corrupted);
}
