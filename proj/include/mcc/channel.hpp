#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "mcc/bytes.hpp"
#include "mcc/result.hpp"
#include "mcc/rng.hpp"

namespace mcc {

/// Unsolicited traffic: `frame` is appended to the output on every cycle that
/// is a multiple of `period`.
struct BabbleConfig {
  Bytes frame;
  std::uint32_t period = 1;
};

struct FaultModel {
  double bit_flip_probability = 0.0;  // per bit
  double drop_probability = 0.0;      // per frame
  double duplicate_probability = 0.0; // per frame
  /// Re-deliver the last delivered frame instead of new input, from cycle 0.
  bool freeze = false;
  std::optional<BabbleConfig> babble;
  std::uint64_t seed = 0;

  /// Empty string when valid, else the name of the offending field.
  std::string validate() const;
};

enum class ChannelError : std::uint8_t { NothingToFreeze };

std::string_view to_string(ChannelError e);

/// One entry per transmit call, including drops.
struct DeliveryRecord {
  std::uint64_t cycle = 0;
  std::size_t bytes_in = 0;
  bool dropped = false;
  bool duplicated = false;
  bool frozen = false;
  /// Bits flipped in each legitimate copy (0, 1 or 2 entries).
  std::vector<std::uint32_t> flipped_bits;
  std::uint32_t babble_frames = 0;
  /// Total frames handed to the receiver, babble included.
  std::uint32_t delivered = 0;

  std::uint32_t legitimate_copies() const { return dropped ? 0u : (duplicated ? 2u : 1u); }
  bool any_fault() const;
};

/// Deterministic byte pipe. Faults are applied in a fixed order per call:
/// drop, duplicate, per-bit flips, freeze substitution, babble.
///
/// Random draws per call: one for drop, one for duplicate, then (only when
/// bit_flip_probability > 0) one per bit of each legitimate copy, bit i being
/// byte i/8 mask 1 << (i%8). All draws come from std::mt19937_64 seeded with
/// FaultModel::seed and are mapped to [0,1) with unit_interval().
class SerialChannel {
 public:
  SerialChannel(std::string name, std::string direction, FaultModel model);

  const std::string& name() const { return name_; }
  const std::string& direction() const { return direction_; }
  const FaultModel& model() const { return model_; }

  /// Throws std::invalid_argument on an empty frame.
  std::vector<Bytes> transmit(ByteView frame, std::uint64_t cycle);

  /// From `from_cycle` on, every legitimate delivery is replaced by the last
  /// frame delivered before the freeze took effect.
  Result<Ack, ChannelError> freeze_channel(std::uint64_t from_cycle);
  bool frozen_at(std::uint64_t cycle) const;

  /// Overrides the model's babble setting (timed babble windows).
  void set_babble(std::optional<BabbleConfig> babble) { babble_ = std::move(babble); }
  const std::optional<BabbleConfig>& babble() const { return babble_; }

  const std::vector<DeliveryRecord>& log() const { return log_; }
  const DeliveryRecord& last_record() const { return log_.back(); }

 private:
  double draw() { return unit_interval(rng_()); }

  std::string name_;
  std::string direction_;
  FaultModel model_;
  std::optional<BabbleConfig> babble_;
  std::mt19937_64 rng_;
  std::optional<std::uint64_t> freeze_from_;
  std::optional<Bytes> last_delivered_;
  std::optional<Bytes> frozen_frame_;
  std::vector<DeliveryRecord> log_;
};

}  // namespace mcc
