#pragma once

#include <stdexcept>
#include <utility>
#include <variant>

namespace mcc {

/// Value-or-error return used across the codec, DPR and hub operations.
/// Failures that are expected outcomes (a CRC mismatch, an unknown region)
/// travel as E; contract violations throw.
template <typename T, typename E>
class Result {
 public:
  Result(T value) : v_(std::in_place_index<0>, std::move(value)) {}  // NOLINT
  Result(E error) : v_(std::in_place_index<1>, std::move(error)) {}  // NOLINT

  bool ok() const { return v_.index() == 0; }
  explicit operator bool() const { return ok(); }

  const T& value() const& {
    if (!ok()) throw std::logic_error("Result::value() on error");
    return std::get<0>(v_);
  }
  T& value() & {
    if (!ok()) throw std::logic_error("Result::value() on error");
    return std::get<0>(v_);
  }
  T&& value() && {
    if (!ok()) throw std::logic_error("Result::value() on error");
    return std::get<0>(std::move(v_));
  }

  const E& error() const {
    if (ok()) throw std::logic_error("Result::error() on value");
    return std::get<1>(v_);
  }

 private:
  std::variant<T, E> v_;
};

struct Ack {};

}  // namespace mcc
