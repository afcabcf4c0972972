#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "sdac/formula.hpp"

namespace sdac {

enum class Status { Sat, Unsat, Unknown };

inline constexpr std::string_view to_string(Status s) {
  switch (s) {
    case Status::Sat: return "sat";
    case Status::Unsat: return "unsat";
    case Status::Unknown: return "unknown";
  }
  return "?";
}

using Cost = std::uint64_t;

// Cost budget for a solve attempt; nullopt means unlimited.
using Budget = std::optional<Cost>;

inline constexpr Budget kUnlimited = std::nullopt;

struct SolveOutcome {
  Status status = Status::Unknown;
  Cost cost = 0;
  Model model;  // populated for Sat when the backend reports one

  bool decided() const noexcept { return status != Status::Unknown; }
  bool operator==(const SolveOutcome&) const = default;
};

}  // namespace sdac
