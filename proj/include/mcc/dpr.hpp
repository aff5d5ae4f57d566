#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mcc/bytes.hpp"
#include "mcc/functions.hpp"
#include "mcc/result.hpp"

namespace mcc {

enum class DprError : std::uint8_t { UnknownRegion, WrongLength, RoleViolation };

std::string_view to_string(DprError e);

struct RegionSpec {
  std::string name;
  std::uint32_t offset = 0;
  std::uint32_t length = 0;
  FunctionId producer = FunctionId::FlightController;
  FunctionId consumer = FunctionId::FlightController;
  /// Allocated but without a defined object layout.
  bool reserved = false;
};

/// Fixed set of non-overlapping regions, validated once at construction.
class MemoryMap {
 public:
  /// Error string names the offending region.
  static Result<MemoryMap, std::string> make(std::vector<RegionSpec> regions);

  /// horus_profile @0x0000, active_hold @0x0100 (reserved), downlink @0x0180.
  /// The profile region is sized for `receivers`; the later regions move up
  /// to the next 0x80 boundary if the profile does not fit below 0x0100.
  static MemoryMap default_map(std::size_t receivers = 3);

  const std::vector<RegionSpec>& regions() const { return regions_; }
  std::optional<std::size_t> index_of(std::string_view name) const;
  const RegionSpec& at(std::size_t index) const { return regions_.at(index); }

 private:
  explicit MemoryMap(std::vector<RegionSpec> regions) : regions_(std::move(regions)) {}
  std::vector<RegionSpec> regions_;
};

/// Modified triple buffer: one buffer is written, one is read, the third is
/// scrubbed to a constant.
class TripleBuffer {
 public:
  struct Roles {
    std::uint8_t write;
    std::uint8_t read;
    std::uint8_t scrub;
    bool operator==(const Roles&) const = default;
  };

  TripleBuffer(std::size_t length, std::uint8_t scrub_value);

  std::size_t length() const { return buffers_[0].size(); }
  std::uint8_t scrub_value() const { return scrub_value_; }
  Roles roles() const { return roles_; }
  bool roles_are_bijection() const;

  /// Whole-buffer store into the write-role buffer. Length is the caller's
  /// responsibility (ActiveDpr gates it).
  void store(ByteView payload);
  Bytes load() const;

  /// write -> read, scrub -> write, read -> scrub; the new scrub buffer is
  /// fully scrubbed before this returns.
  Roles rotate();

  /// RoleViolation unless `index` currently holds the scrub role.
  Result<Ack, DprError> scrub(std::size_t index);

  ByteView buffer(std::size_t index) const { return buffers_.at(index); }
  bool is_scrubbed(std::size_t index) const;

 private:
  std::array<Bytes, 3> buffers_;
  Roles roles_{2, 0, 1};
  std::uint8_t scrub_value_;
};

enum class Freshness : std::uint8_t {
  Fresh,
  Stale,
  NeverWritten,
  /// Read buffer holds only the scrub constant although the region has been
  /// written before: nothing arrived since the last rotation.
  Missing,
};

std::string_view to_string(Freshness f);

struct FreshnessConfig {
  std::uint32_t expected_increment_ms = 10;
  std::uint32_t stale_threshold = 3;
};

/// Uses the timestamp at offset 0 of a region as a frame counter.
class FreshnessTracker {
 public:
  struct Observation {
    Freshness state = Freshness::NeverWritten;
    /// Timestamp advanced by something other than the expected increment.
    bool gap = false;
    std::uint32_t unchanged_reads = 0;
  };

  explicit FreshnessTracker(FreshnessConfig config = {}) : config_(config) {}

  Observation observe(std::uint32_t timestamp);
  /// A read that carried no timestamp at all; counts as unchanged.
  Observation observe_missing();

  std::uint32_t unchanged_reads() const { return unchanged_; }
  std::optional<std::uint32_t> last_timestamp() const { return last_; }
  const FreshnessConfig& config() const { return config_; }

 private:
  Observation unchanged_observation(Freshness below_threshold);

  FreshnessConfig config_;
  std::optional<std::uint32_t> last_;
  std::uint32_t unchanged_ = 0;
};

struct ReadReport {
  Bytes bytes;
  Freshness freshness = Freshness::NeverWritten;
  bool gap = false;
  std::uint32_t timestamp = 0;
  std::uint32_t unchanged_reads = 0;
};

struct RegionCounters {
  std::uint64_t writes = 0;
  std::uint64_t rejected_writes = 0;
  std::uint64_t rotations = 0;
  std::uint64_t reads = 0;
  std::uint64_t bytes_written = 0;
  std::uint64_t bytes_read = 0;
};

struct RegionSnapshot {
  RegionSpec spec;
  TripleBuffer::Roles roles;
  std::array<Bytes, 3> buffers;
  RegionCounters counters;
};

class ActiveDpr;

/// Write-and-rotate handle for one region. Has no read path, so a function
/// holding only a port cannot observe DPR contents.
class ProducerPort {
 public:
  Result<Ack, DprError> write(ByteView payload) const;
  Result<TripleBuffer::Roles, DprError> rotate() const;
  const RegionSpec& region() const;

 private:
  friend class ActiveDpr;
  ProducerPort(ActiveDpr* dpr, std::size_t index) : dpr_(dpr), index_(index) {}
  ActiveDpr* dpr_;
  std::size_t index_;
};

/// Emulated active dual-ported RAM. Each region has its own lock, so one
/// producer and one consumer may operate on a region concurrently; a read
/// always observes one complete write.
class ActiveDpr {
 public:
  explicit ActiveDpr(MemoryMap map, FreshnessConfig freshness = {}, std::uint8_t scrub_value = 0x00);

  ActiveDpr(const ActiveDpr&) = delete;
  ActiveDpr& operator=(const ActiveDpr&) = delete;

  const MemoryMap& map() const { return map_; }
  std::uint8_t scrub_value() const { return scrub_value_; }

  /// Rejected whole on a length mismatch.
  Result<Ack, DprError> write(std::string_view region, ByteView payload);
  Result<TripleBuffer::Roles, DprError> rotate(std::string_view region);
  /// Copy of the read-role buffer plus a freshness verdict from the timestamp
  /// at region offset 0.
  Result<ReadReport, DprError> read(std::string_view region);
  Result<Ack, DprError> scrub(std::string_view region, std::size_t buffer_index);

  Result<ProducerPort, DprError> producer_port(std::string_view region);
  Result<RegionSnapshot, DprError> snapshot(std::string_view region) const;
  Result<RegionCounters, DprError> counters(std::string_view region) const;
  /// Sum over all regions.
  RegionCounters total_counters() const;

 private:
  friend class ProducerPort;

  struct Region {
    Region(std::size_t length, std::uint8_t scrub, FreshnessConfig cfg) : buffer(length, scrub), freshness(cfg) {}
    mutable std::mutex mutex;
    TripleBuffer buffer;
    FreshnessTracker freshness;
    RegionCounters counters;
    /// A write is pending until the next rotation makes it readable.
    bool write_pending = false;
    bool ever_published = false;
  };

  Result<Ack, DprError> write_at(std::size_t index, ByteView payload);
  Result<TripleBuffer::Roles, DprError> rotate_at(std::size_t index);
  Region* find(std::string_view name);
  const Region* find(std::string_view name) const;

  MemoryMap map_;
  std::uint8_t scrub_value_;
  std::vector<std::unique_ptr<Region>> regions_;
};

}  // namespace mcc
