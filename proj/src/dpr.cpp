#include "mcc/dpr.hpp"

#include <algorithm>
#include <set>

namespace mcc {

std::string_view to_string(DprError e) {
  switch (e) {
    case DprError::UnknownRegion: return "unknown_region";
    case DprError::WrongLength: return "wrong_length";
    case DprError::RoleViolation: return "role_violation";
  }
  return "unknown";
}

std::string_view to_string(Freshness f) {
  switch (f) {
    case Freshness::Fresh: return "fresh";
    case Freshness::Stale: return "stale";
    case Freshness::NeverWritten: return "never_written";
    case Freshness::Missing: return "missing";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// MemoryMap

Result<MemoryMap, std::string> MemoryMap::make(std::vector<RegionSpec> regions) {
  if (regions.empty()) return std::string("memory map has no regions");
  std::set<std::string> names;
  for (const RegionSpec& r : regions) {
    if (r.name.empty()) return std::string("region with empty name");
    if (!names.insert(r.name).second) return "duplicate region name '" + r.name + "'";
    if (r.length == 0) return "region '" + r.name + "' has zero length";
    if (static_cast<std::uint64_t>(r.offset) + r.length > 0x1'0000'0000ull) {
      return "region '" + r.name + "' exceeds the 32-bit address space";
    }
  }
  std::sort(regions.begin(), regions.end(), [](const RegionSpec& a, const RegionSpec& b) { return a.offset < b.offset; });
  for (std::size_t i = 1; i < regions.size(); ++i) {
    const RegionSpec& prev = regions[i - 1];
    if (static_cast<std::uint64_t>(prev.offset) + prev.length > regions[i].offset) {
      return "region '" + regions[i].name + "' overlaps '" + prev.name + "'";
    }
  }
  return MemoryMap(std::move(regions));
}

MemoryMap MemoryMap::default_map(std::size_t receivers) {
  const auto profile_len = static_cast<std::uint32_t>(64 + 60 * receivers);
  std::uint32_t next = 0x0100;
  if (profile_len > next) next = (profile_len + 0x7f) & ~0x7fu;
  std::vector<RegionSpec> regions = {
      {"horus_profile", 0x0000, profile_len, FunctionId::Horus, FunctionId::FlightController, false},
      {"active_hold", next, 64, FunctionId::ActiveLoad, FunctionId::FlightController, true},
      {"downlink", next + 0x80, 64, FunctionId::FlightController, FunctionId::ActiveLoad, false},
  };
  return make(std::move(regions)).value();
}

std::optional<std::size_t> MemoryMap::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < regions_.size(); ++i) {
    if (regions_[i].name == name) return i;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// TripleBuffer

TripleBuffer::TripleBuffer(std::size_t length, std::uint8_t scrub_value) : scrub_value_(scrub_value) {
  for (Bytes& b : buffers_) b.assign(length, scrub_value);
}

bool TripleBuffer::roles_are_bijection() const {
  const std::uint8_t w = roles_.write, r = roles_.read, s = roles_.scrub;
  return w < 3 && r < 3 && s < 3 && w != r && w != s && r != s;
}

void TripleBuffer::store(ByteView payload) {
  Bytes& dst = buffers_[roles_.write];
  std::copy(payload.begin(), payload.end(), dst.begin());
}

Bytes TripleBuffer::load() const { return buffers_[roles_.read]; }

TripleBuffer::Roles TripleBuffer::rotate() {
  roles_ = Roles{roles_.scrub, roles_.write, roles_.read};
  std::fill(buffers_[roles_.scrub].begin(), buffers_[roles_.scrub].end(), scrub_value_);
  return roles_;
}

Result<Ack, DprError> TripleBuffer::scrub(std::size_t index) {
  if (index >= 3 || index != roles_.scrub) return DprError::RoleViolation;
  std::fill(buffers_[index].begin(), buffers_[index].end(), scrub_value_);
  return Ack{};
}

bool TripleBuffer::is_scrubbed(std::size_t index) const {
  const Bytes& b = buffers_.at(index);
  return std::all_of(b.begin(), b.end(), [this](std::uint8_t v) { return v == scrub_value_; });
}

// ---------------------------------------------------------------------------
// FreshnessTracker

FreshnessTracker::Observation FreshnessTracker::observe(std::uint32_t timestamp) {
  if (last_ && *last_ == timestamp) return unchanged_observation(Freshness::Fresh);
  Observation obs;
  obs.state = Freshness::Fresh;
  obs.gap = last_.has_value() && static_cast<std::uint32_t>(timestamp - *last_) != config_.expected_increment_ms;
  last_ = timestamp;
  unchanged_ = 0;
  return obs;
}

FreshnessTracker::Observation FreshnessTracker::observe_missing() {
  return unchanged_observation(Freshness::Missing);
}

FreshnessTracker::Observation FreshnessTracker::unchanged_observation(Freshness below_threshold) {
  ++unchanged_;
  Observation obs;
  obs.unchanged_reads = unchanged_;
  obs.state = unchanged_ >= config_.stale_threshold ? Freshness::Stale : below_threshold;
  return obs;
}

// ---------------------------------------------------------------------------
// ProducerPort

Result<Ack, DprError> ProducerPort::write(ByteView payload) const { return dpr_->write_at(index_, payload); }
Result<TripleBuffer::Roles, DprError> ProducerPort::rotate() const { return dpr_->rotate_at(index_); }
const RegionSpec& ProducerPort::region() const { return dpr_->map().at(index_); }

// ---------------------------------------------------------------------------
// ActiveDpr

ActiveDpr::ActiveDpr(MemoryMap map, FreshnessConfig freshness, std::uint8_t scrub_value)
    : map_(std::move(map)), scrub_value_(scrub_value) {
  regions_.reserve(map_.regions().size());
  for (const RegionSpec& spec : map_.regions()) {
    regions_.push_back(std::make_unique<Region>(spec.length, scrub_value, freshness));
  }
}

ActiveDpr::Region* ActiveDpr::find(std::string_view name) {
  const auto idx = map_.index_of(name);
  return idx ? regions_[*idx].get() : nullptr;
}

const ActiveDpr::Region* ActiveDpr::find(std::string_view name) const {
  const auto idx = map_.index_of(name);
  return idx ? regions_[*idx].get() : nullptr;
}

Result<Ack, DprError> ActiveDpr::write_at(std::size_t index, ByteView payload) {
  Region& r = *regions_.at(index);
  std::lock_guard lock(r.mutex);
  if (payload.size() != r.buffer.length()) {
    ++r.counters.rejected_writes;
    return DprError::WrongLength;
  }
  r.buffer.store(payload);
  r.write_pending = true;
  ++r.counters.writes;
  r.counters.bytes_written += payload.size();
  return Ack{};
}

Result<TripleBuffer::Roles, DprError> ActiveDpr::rotate_at(std::size_t index) {
  Region& r = *regions_.at(index);
  std::lock_guard lock(r.mutex);
  ++r.counters.rotations;
  if (r.write_pending) r.ever_published = true;
  r.write_pending = false;
  return r.buffer.rotate();
}

Result<Ack, DprError> ActiveDpr::write(std::string_view region, ByteView payload) {
  const auto idx = map_.index_of(region);
  if (!idx) return DprError::UnknownRegion;
  return write_at(*idx, payload);
}

Result<TripleBuffer::Roles, DprError> ActiveDpr::rotate(std::string_view region) {
  const auto idx = map_.index_of(region);
  if (!idx) return DprError::UnknownRegion;
  return rotate_at(*idx);
}

Result<ReadReport, DprError> ActiveDpr::read(std::string_view region) {
  Region* r = find(region);
  if (r == nullptr) return DprError::UnknownRegion;
  std::lock_guard lock(r->mutex);

  ReadReport report;
  report.bytes = r->buffer.load();
  ++r->counters.reads;
  r->counters.bytes_read += report.bytes.size();

  const bool scrubbed = std::all_of(report.bytes.begin(), report.bytes.end(),
                                    [this](std::uint8_t v) { return v == scrub_value_; });
  if (scrubbed && !r->ever_published) {
    report.freshness = Freshness::NeverWritten;
    return report;
  }
  FreshnessTracker::Observation obs;
  if (scrubbed || report.bytes.size() < 4) {
    obs = r->freshness.observe_missing();
  } else {
    report.timestamp = load_le<std::uint32_t>(report.bytes.data());
    obs = r->freshness.observe(report.timestamp);
  }
  report.freshness = obs.state;
  report.gap = obs.gap;
  report.unchanged_reads = obs.unchanged_reads;
  return report;
}

Result<Ack, DprError> ActiveDpr::scrub(std::string_view region, std::size_t buffer_index) {
  Region* r = find(region);
  if (r == nullptr) return DprError::UnknownRegion;
  std::lock_guard lock(r->mutex);
  return r->buffer.scrub(buffer_index);
}

Result<ProducerPort, DprError> ActiveDpr::producer_port(std::string_view region) {
  const auto idx = map_.index_of(region);
  if (!idx) return DprError::UnknownRegion;
  return ProducerPort(this, *idx);
}

Result<RegionSnapshot, DprError> ActiveDpr::snapshot(std::string_view region) const {
  const auto idx = map_.index_of(region);
  if (!idx) return DprError::UnknownRegion;
  const Region& r = *regions_[*idx];
  std::lock_guard lock(r.mutex);
  RegionSnapshot snap{map_.at(*idx), r.buffer.roles(), {}, r.counters};
  for (std::size_t i = 0; i < 3; ++i) {
    const ByteView b = r.buffer.buffer(i);
    snap.buffers[i].assign(b.begin(), b.end());
  }
  return snap;
}

Result<RegionCounters, DprError> ActiveDpr::counters(std::string_view region) const {
  const Region* r = find(region);
  if (r == nullptr) return DprError::UnknownRegion;
  std::lock_guard lock(r->mutex);
  return r->counters;
}

RegionCounters ActiveDpr::total_counters() const {
  RegionCounters total;
  for (const auto& r : regions_) {
    std::lock_guard lock(r->mutex);
    total.writes += r->counters.writes;
    total.rejected_writes += r->counters.rejected_writes;
    total.rotations += r->counters.rotations;
    total.reads += r->counters.reads;
    total.bytes_written += r->counters.bytes_written;
    total.bytes_read += r->counters.bytes_read;
  }
  return total;
}

}  // namespace mcc
