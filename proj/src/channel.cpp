#include "mcc/channel.hpp"

#include <stdexcept>

namespace mcc {

namespace {
bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }
}  // namespace

std::string FaultModel::validate() const {
  if (!is_probability(bit_flip_probability)) return "bit_flip_probability";
  if (!is_probability(drop_probability)) return "drop_probability";
  if (!is_probability(duplicate_probability)) return "duplicate_probability";
  if (babble) {
    if (babble->frame.empty()) return "babble.frame";
    if (babble->period == 0) return "babble.period";
  }
  return {};
}

std::string_view to_string(ChannelError e) {
  switch (e) {
    case ChannelError::NothingToFreeze: return "nothing_to_freeze";
  }
  return "unknown";
}

bool DeliveryRecord::any_fault() const {
  if (dropped || duplicated || frozen || babble_frames > 0) return true;
  for (std::uint32_t f : flipped_bits) {
    if (f > 0) return true;
  }
  return false;
}

SerialChannel::SerialChannel(std::string name, std::string direction, FaultModel model)
    : name_(std::move(name)), direction_(std::move(direction)), model_(std::move(model)), rng_(model_.seed) {
  const std::string bad = model_.validate();
  if (!bad.empty()) throw std::invalid_argument("channel '" + name_ + "': invalid fault model field " + bad);
  babble_ = model_.babble;
}

bool SerialChannel::frozen_at(std::uint64_t cycle) const {
  return model_.freeze || (freeze_from_ && cycle >= *freeze_from_);
}

Result<Ack, ChannelError> SerialChannel::freeze_channel(std::uint64_t from_cycle) {
  if (!last_delivered_) return ChannelError::NothingToFreeze;
  freeze_from_ = from_cycle;
  return Ack{};
}

std::vector<Bytes> SerialChannel::transmit(ByteView frame, std::uint64_t cycle) {
  if (frame.empty()) throw std::invalid_argument("SerialChannel::transmit: empty frame");

  DeliveryRecord rec;
  rec.cycle = cycle;
  rec.bytes_in = frame.size();

  const double u_drop = draw();
  const double u_dup = draw();
  rec.dropped = u_drop < model_.drop_probability;
  rec.duplicated = !rec.dropped && u_dup < model_.duplicate_probability;

  std::vector<Bytes> out;
  for (std::uint32_t copy = 0; copy < rec.legitimate_copies(); ++copy) {
    Bytes bytes(frame.begin(), frame.end());
    std::uint32_t flips = 0;
    if (model_.bit_flip_probability > 0.0) {
      const std::size_t bits = bytes.size() * 8;
      for (std::size_t i = 0; i < bits; ++i) {
        if (draw() < model_.bit_flip_probability) {
          bytes[i >> 3] ^= static_cast<std::uint8_t>(1u << (i & 7u));
          ++flips;
        }
      }
    }
    rec.flipped_bits.push_back(flips);
    out.push_back(std::move(bytes));
  }

  if (frozen_at(cycle) && !out.empty()) {
    if (!frozen_frame_) frozen_frame_ = last_delivered_ ? *last_delivered_ : out.front();
    for (Bytes& b : out) b = *frozen_frame_;
    rec.frozen = true;
  } else if (!out.empty()) {
    last_delivered_ = out.back();
  }

  if (babble_ && cycle % babble_->period == 0) {
    out.push_back(babble_->frame);
    rec.babble_frames = 1;
  }

  rec.delivered = static_cast<std::uint32_t>(out.size());
  log_.push_back(std::move(rec));
  return out;
}

}  // namespace mcc
