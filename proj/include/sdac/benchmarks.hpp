#pragma once

// Deterministic benchmark families for desk-scale experiments.

#include <cstdint>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "sdac/error.hpp"
#include "sdac/formula.hpp"

namespace sdac {

struct Php {
  std::uint32_t pigeons = 0;
  std::uint32_t holes = 0;
};

struct XorMiter {
  std::uint32_t width = 0;
  std::uint64_t seed = 0;
};

struct Random3Cnf {
  std::uint32_t vars = 0;
  std::uint32_t clauses = 0;
  std::uint64_t seed = 0;
};

using BenchmarkFamily = std::variant<Php, XorMiter, Random3Cnf>;

// Pigeonhole: every pigeon sits somewhere, no hole holds two. Unsat iff p > h.
inline Formula php_formula(std::uint32_t pigeons, std::uint32_t holes) {
  if (pigeons == 0 || holes == 0) throw Error("pigeonhole needs positive sizes");
  Formula f;
  f.num_vars = pigeons * holes;
  auto x = [holes](std::uint32_t i, std::uint32_t j) { return Literal::positive(i * holes + j); };
  for (std::uint32_t i = 0; i < pigeons; ++i) {
    Clause c;
    for (std::uint32_t j = 0; j < holes; ++j) c.push_back(x(i, j));
    f.clauses.push_back(std::move(c));
  }
  for (std::uint32_t j = 0; j < holes; ++j)
    for (std::uint32_t i = 0; i < pigeons; ++i)
      for (std::uint32_t k = i + 1; k < pigeons; ++k) f.clauses.push_back({~x(i, j), ~x(k, j)});
  return f;
}

// Miter of two prefix-XOR circuits over the same inputs, asserting that their
// outputs differ (unsatisfiable by construction). Circuit A is a chain of XOR
// gates. Circuit B computes the same parity with a seeded mix of stages: a
// plain XOR step, an XNOR step tracking the negated prefix, or a pairwise step
// that first combines two inputs and then folds them in (plain or negated).
// Both circuits use one variable per input, so width w yields 3w - 2
// variables. Variables are numbered stage by stage, which makes the file order
// a good static branching order.
inline Formula xor_miter_formula(std::uint32_t width, std::uint64_t seed) {
  if (width < 2) throw Error("xor miter needs width >= 2");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick_stage(0, 3);
  Formula f;
  auto fresh = [&f]() { return Literal::positive(f.num_vars++); };
  auto xor_gate = [&f](Literal z, Literal p, Literal q) {
    f.clauses.push_back({~z, p, q});
    f.clauses.push_back({~z, ~p, ~q});
    f.clauses.push_back({z, ~p, q});
    f.clauses.push_back({z, p, ~q});
  };

  Literal x = fresh();
  Literal a = x;  // A's running prefix
  Literal b = x;  // literal equal to B's running prefix
  auto step_a = [&](Literal input) {
    Literal next = fresh();
    xor_gate(next, a, input);
    a = next;
  };
  // Folds `operand` into B, optionally through an XNOR gate.
  auto fold_b = [&](Literal operand, bool negated) {
    Literal z = fresh();
    if (negated) {
      xor_gate(~z, b, operand);
      b = ~z;
    } else {
      xor_gate(z, b, operand);
      b = z;
    }
  };

  for (std::uint32_t r = 1; r < width;) {
    const int stage = pick_stage(rng);
    if (stage >= 2 && r + 1 < width) {
      Literal x1 = fresh();
      step_a(x1);
      Literal x2 = fresh();
      step_a(x2);
      Literal pair = fresh();
      xor_gate(pair, x1, x2);
      fold_b(pair, stage == 3);
      r += 2;
    } else {
      x = fresh();
      step_a(x);
      fold_b(x, stage % 2 == 1);
      r += 1;
    }
  }
  f.clauses.push_back({a, b});
  f.clauses.push_back({~a, ~b});
  return f;
}

// Uniform random 3-CNF over distinct variables per clause.
inline Formula random_3cnf_formula(std::uint32_t vars, std::uint32_t clauses, std::uint64_t seed) {
  if (vars < 3) throw Error("random 3-CNF needs at least 3 variables");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Var> pick_var(0, vars - 1);
  std::bernoulli_distribution sign(0.5);
  Formula f;
  f.num_vars = vars;
  for (std::uint32_t i = 0; i < clauses; ++i) {
    Clause c;
    while (c.size() < 3) {
      Var v = pick_var(rng);
      bool dup = false;
      for (Literal l : c) dup |= l.var() == v;
      if (dup) continue;
      c.push_back(sign(rng) ? Literal::negative(v) : Literal::positive(v));
    }
    f.clauses.push_back(std::move(c));
  }
  return f;
}

inline Formula gen_benchmark(const BenchmarkFamily& family) {
  return std::visit(
      [](const auto& fam) -> Formula {
        using T = std::decay_t<decltype(fam)>;
        if constexpr (std::is_same_v<T, Php>) {
          return php_formula(fam.pigeons, fam.holes);
        } else if constexpr (std::is_same_v<T, XorMiter>) {
          return xor_miter_formula(fam.width, fam.seed);
        } else {
          return random_3cnf_formula(fam.vars, fam.clauses, fam.seed);
        }
      },
      family);
}

}  // namespace sdac
