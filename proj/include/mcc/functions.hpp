#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

namespace mcc {

/// On-board functions (plus the ground station) that exchange data.
enum class FunctionId : std::uint8_t {
  BaseStation = 0,
  Horus = 1,
  FlightController = 2,
  ActiveLoad = 3,
};

inline constexpr std::size_t kFunctionCount = 4;
inline constexpr std::array<FunctionId, kFunctionCount> kAllFunctions = {
    FunctionId::BaseStation, FunctionId::Horus, FunctionId::FlightController, FunctionId::ActiveLoad};

constexpr std::string_view to_string(FunctionId f) {
  switch (f) {
    case FunctionId::BaseStation: return "base_station";
    case FunctionId::Horus: return "horus";
    case FunctionId::FlightController: return "flight_controller";
    case FunctionId::ActiveLoad: return "active_load";
  }
  return "unknown";
}

constexpr std::optional<FunctionId> function_from_string(std::string_view s) {
  for (FunctionId f : kAllFunctions) {
    if (to_string(f) == s) return f;
  }
  return std::nullopt;
}

constexpr std::optional<FunctionId> function_from_index(std::uint32_t i) {
  if (i >= kFunctionCount) return std::nullopt;
  return static_cast<FunctionId>(i);
}

}  // namespace mcc
