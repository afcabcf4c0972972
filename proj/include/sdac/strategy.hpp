#pragma once

// Discrete solver-configuration spaces: a list of parameters, each with a
// default token and one or more alternative tokens, plus an optional cap on
// how many parameters may leave their default at once.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "sdac/error.hpp"

namespace sdac {

struct ParamDef {
  std::string name;
  std::string default_value;
  std::vector<std::string> alternatives;
};

// One point of a StrategySpace: choice[i] == 0 selects parameter i's default,
// choice[i] == j > 0 selects alternatives[j - 1].
struct Strategy {
  std::vector<std::uint8_t> choice;

  auto operator<=>(const Strategy&) const = default;
  bool operator==(const Strategy&) const = default;
};

struct StrategyHash {
  std::size_t operator()(const Strategy& s) const noexcept {
    std::size_t h = 0xcbf29ce484222325ull;
    for (auto c : s.choice) h = (h ^ c) * 0x100000001b3ull;
    return h;
  }
};

inline constexpr std::size_t kDefaultEnumerationCeiling = 1'000'000;

class StrategySpace {
 public:
  StrategySpace(std::vector<ParamDef> params, std::optional<std::size_t> max_deviations)
      : params_(std::move(params)), max_deviations_(max_deviations) {
    std::set<std::string> names;
    for (const auto& p : params_) {
      if (p.name.empty()) throw InvalidSpace("parameter with empty name");
      if (!names.insert(p.name).second) throw InvalidSpace("duplicate parameter '" + p.name + "'");
      if (p.alternatives.empty()) throw InvalidSpace("parameter '" + p.name + "' has no alternatives");
      if (p.alternatives.size() > 254) throw InvalidSpace("too many alternatives for '" + p.name + "'");
      std::set<std::string> values{p.default_value};
      for (const auto& alt : p.alternatives) {
        if (!values.insert(alt).second) {
          throw InvalidSpace("parameter '" + p.name + "' repeats value '" + alt + "'");
        }
      }
    }
  }

  const std::vector<ParamDef>& params() const noexcept { return params_; }
  std::optional<std::size_t> max_deviations() const noexcept { return max_deviations_; }

  std::size_t cap() const noexcept {
    return max_deviations_.value_or(std::numeric_limits<std::size_t>::max());
  }

  Strategy default_strategy() const { return Strategy{std::vector<std::uint8_t>(params_.size(), 0)}; }

  std::size_t index_of(std::string_view name) const {
    for (std::size_t i = 0; i < params_.size(); ++i)
      if (params_[i].name == name) return i;
    throw InvalidSpace("unknown parameter '" + std::string(name) + "'");
  }

  const std::string& value(const Strategy& s, std::size_t param) const {
    const auto& p = params_.at(param);
    auto c = s.choice.at(param);
    return c == 0 ? p.default_value : p.alternatives.at(c - 1);
  }

  bool conforms(const Strategy& s) const {
    if (s.choice.size() != params_.size()) return false;
    std::size_t dev = 0;
    for (std::size_t i = 0; i < params_.size(); ++i) {
      if (s.choice[i] > params_[i].alternatives.size()) return false;
      dev += s.choice[i] != 0;
    }
    return dev <= cap();
  }

  // Builds a strategy from name=value overrides; unspecified parameters keep
  // their default.
  Strategy make(const std::map<std::string, std::string>& overrides) const {
    Strategy s = default_strategy();
    for (const auto& [name, val] : overrides) {
      auto i = index_of(name);
      const auto& p = params_[i];
      if (val == p.default_value) continue;
      auto it = std::find(p.alternatives.begin(), p.alternatives.end(), val);
      if (it == p.alternatives.end()) {
        throw InvalidSpace("value '" + val + "' is not allowed for '" + name + "'");
      }
      s.choice[i] = static_cast<std::uint8_t>(it - p.alternatives.begin() + 1);
    }
    if (!conforms(s)) throw InvalidSpace("strategy exceeds the deviation cap");
    return s;
  }

  // "name=value,name=value" over non-default parameters; "default" for σ0.
  std::string to_string(const Strategy& s) const {
    std::string out;
    for (std::size_t i = 0; i < params_.size(); ++i) {
      if (s.choice.at(i) == 0) continue;
      if (!out.empty()) out += ',';
      out += params_[i].name + "=" + value(s, i);
    }
    return out.empty() ? "default" : out;
  }

  Strategy parse(std::string_view text) const {
    std::map<std::string, std::string> overrides;
    if (text == "default" || text.empty()) return default_strategy();
    std::size_t pos = 0;
    while (pos <= text.size()) {
      auto end = text.find(',', pos);
      if (end == std::string_view::npos) end = text.size();
      auto item = text.substr(pos, end - pos);
      auto eq = item.find('=');
      if (eq == std::string_view::npos) throw InvalidSpace("expected name=value, got '" + std::string(item) + "'");
      overrides[std::string(item.substr(0, eq))] = std::string(item.substr(eq + 1));
      pos = end + 1;
    }
    return make(overrides);
  }

 private:
  std::vector<ParamDef> params_;
  std::optional<std::size_t> max_deviations_;
};

inline std::size_t deviation_count(const StrategySpace& space, const Strategy& s) {
  (void)space;
  std::size_t n = 0;
  for (auto c : s.choice) n += c != 0;
  return n;
}

// Closed-form |enumerate(space)|: coefficients of Π (1 + |alts_p|·x) summed up
// to the cap. Saturates at SIZE_MAX.
inline std::size_t space_size(const StrategySpace& space) {
  const auto& params = space.params();
  const std::size_t cap = std::min(space.cap(), params.size());
  constexpr auto kMax = std::numeric_limits<std::size_t>::max();
  auto sat_add = [](std::size_t a, std::size_t b) { return a > kMax - b ? kMax : a + b; };
  auto sat_mul = [](std::size_t a, std::size_t b) { return (b && a > kMax / b) ? kMax : a * b; };
  std::vector<std::size_t> coeff(cap + 1, 0);
  coeff[0] = 1;
  for (const auto& p : params) {
    for (std::size_t k = cap; k >= 1; --k)
      coeff[k] = sat_add(coeff[k], sat_mul(coeff[k - 1], p.alternatives.size()));
  }
  std::size_t total = 0;
  for (auto c : coeff) total = sat_add(total, c);
  return total;
}

// All strategies in lexicographic choice order; the default strategy first.
inline std::vector<Strategy> enumerate(const StrategySpace& space,
                                       std::size_t ceiling = kDefaultEnumerationCeiling) {
  const auto total = space_size(space);
  if (total > ceiling) {
    throw SpaceTooLarge("strategy space has " + std::to_string(total) +
                        " members, above the enumeration ceiling " + std::to_string(ceiling));
  }
  const auto& params = space.params();
  std::vector<Strategy> out;
  out.reserve(total);
  Strategy cur = space.default_strategy();
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t dev) {
    if (i == params.size()) {
      out.push_back(cur);
      return;
    }
    cur.choice[i] = 0;
    rec(i + 1, dev);
    if (dev < space.cap()) {
      for (std::size_t a = 1; a <= params[i].alternatives.size(); ++a) {
        cur.choice[i] = static_cast<std::uint8_t>(a);
        rec(i + 1, dev + 1);
      }
    }
    cur.choice[i] = 0;
  };
  rec(0, 0);
  return out;
}

// Every conforming strategy that differs from `s` in 1..k positions, in
// lexicographic choice order.
inline std::vector<Strategy> neighbors(const StrategySpace& space, const Strategy& s, std::size_t k) {
  const auto& params = space.params();
  const std::size_t cap = space.cap();
  std::size_t base_dev = deviation_count(space, s);
  std::vector<Strategy> out;
  Strategy cur = s;
  // Walk positions left to right; at each either keep s's value or change it.
  std::function<void(std::size_t, std::size_t, std::size_t)> rec = [&](std::size_t i,
                                                                      std::size_t changed,
                                                                      std::size_t dev) {
    if (i == params.size()) {
      if (changed > 0 && dev <= cap) out.push_back(cur);
      return;
    }
    const auto original = s.choice[i];
    for (std::size_t v = 0; v <= params[i].alternatives.size(); ++v) {
      const bool change = v != original;
      if (change && changed == k) continue;
      std::size_t d = dev - (original != 0) + (v != 0);
      cur.choice[i] = static_cast<std::uint8_t>(v);
      rec(i + 1, changed + change, d);
    }
    cur.choice[i] = original;
  };
  rec(0, 0, base_dev);
  return out;
}

// Uniform over the conforming strategies (rejection from the uniform product).
template <class Rng>
Strategy sample_uniform(const StrategySpace& space, Rng& rng) {
  const auto& params = space.params();
  Strategy s = space.default_strategy();
  if (space.cap() == 0 || params.empty()) return s;
  for (;;) {
    std::size_t dev = 0;
    for (std::size_t i = 0; i < params.size(); ++i) {
      std::uniform_int_distribution<std::size_t> pick(0, params[i].alternatives.size());
      s.choice[i] = static_cast<std::uint8_t>(pick(rng));
      dev += s.choice[i] != 0;
    }
    if (dev <= space.cap()) return s;
  }
}

template <class Rng>
const Strategy& sample_uniform(const std::vector<Strategy>& pool, Rng& rng) {
  if (pool.empty()) throw InvalidSpace("cannot sample from an empty strategy pool");
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  return pool[pick(rng)];
}

// Nine branching-related kissat options, at most four deviating by default.
inline StrategySpace kissat_strategy_space(std::optional<std::size_t> max_deviations = 4) {
  return StrategySpace(
      {
          {"bump", "1", {"0"}},
          {"bumpreasons", "1", {"0"}},
          {"chrono", "1", {"0"}},
          {"eliminate", "1", {"0"}},
          {"forcephase", "0", {"1"}},
          {"phase", "1", {"0"}},
          {"stable", "1", {"0", "2"}},
          {"target", "1", {"0"}},
          {"tumble", "1", {"0"}},
      },
      max_deviations);
}

// Marabou split-frequency and branching heuristic options, uncapped.
inline StrategySpace marabou_strategy_space() {
  return StrategySpace(
      {
          {"pl-split-freq", "10", {"1", "2", "5"}},
          {"branch", "pseudo-impact", {"babsr", "polarity"}},
      },
      std::nullopt);
}

// The subset of the kissat space the embedded CDCL solver understands.
inline StrategySpace mini_cdcl_strategy_space(std::optional<std::size_t> max_deviations = std::nullopt) {
  return StrategySpace(
      {
          {"bump", "1", {"0"}},
          {"forcephase", "0", {"1"}},
          {"phase", "1", {"0"}},
          {"stable", "1", {"0", "2"}},
          {"tumble", "1", {"0"}},
      },
      max_deviations);
}

}  // namespace sdac
