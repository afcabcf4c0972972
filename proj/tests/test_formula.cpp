#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "sdac/benchmarks.hpp"
#include "sdac/formula.hpp"

using namespace sdac;

namespace {

Clause clause(std::initializer_list<int> lits) {
  Clause c;
  for (int l : lits) c.push_back(Literal::from_dimacs(l));
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Naive evaluation kept apart from the library's satisfies().
bool eval_clause(const Clause& c, std::uint64_t bits) {
  for (Literal l : c) {
    bool v = (bits >> l.var()) & 1u;
    if (v != l.is_negative()) return true;
  }
  return false;
}

bool sat_by_enumeration(const Formula& f) {
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << f.num_vars); ++bits) {
    bool all = true;
    for (const auto& c : f.clauses) all = all && eval_clause(c, bits);
    if (all) return true;
  }
  return false;
}

Formula random_formula(std::mt19937_64& rng, Var vars, std::size_t clauses) {
  Formula f;
  f.num_vars = vars;
  std::uniform_int_distribution<int> len(1, 3);
  std::uniform_int_distribution<Var> var(0, vars - 1);
  for (std::size_t i = 0; i < clauses; ++i) {
    Clause c;
    for (int k = len(rng); k > 0; --k) c.push_back(rng() & 1 ? Literal::positive(var(rng)) : Literal::negative(var(rng)));
    f.clauses.push_back(c);
  }
  return f;
}

}  // namespace

TEST(Literal, DimacsMapping) {
  auto l = Literal::from_dimacs(-3);
  EXPECT_EQ(l.var(), 2u);
  EXPECT_TRUE(l.is_negative());
  EXPECT_EQ((~l).dimacs(), 3);
  EXPECT_EQ(l.code(), 5u);
  EXPECT_THROW(Literal::from_dimacs(0), Error);
}

TEST(ParseDimacs, SimpleFormula) {
  auto f = parse_dimacs("p cnf 2 2\n1 2 0\n-1 0\n");
  EXPECT_EQ(f.num_vars, 2u);
  ASSERT_EQ(f.clauses.size(), 2u);
  EXPECT_EQ(f.clauses[0], clause({1, 2}));
  EXPECT_EQ(f.clauses[1], clause({-1}));
}

TEST(ParseDimacs, NoClauses) {
  auto f = parse_dimacs("p cnf 1 0\n");
  EXPECT_EQ(f.num_vars, 1u);
  EXPECT_TRUE(f.clauses.empty());
}

TEST(ParseDimacs, LiteralOutOfRange) {
  try {
    parse_dimacs("p cnf 1 1\n2 0\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.kind(), ParseError::Kind::LiteralOutOfRange);
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(ParseDimacs, HeaderErrors) {
  for (const char* text : {"1 2 0\n", "p cnf x 1\n", "p dnf 1 1\n1 0\n", "p cnf 1 1\np cnf 1 1\n", ""}) {
    try {
      parse_dimacs(text);
      FAIL() << "accepted: " << text;
    } catch (const ParseError& e) {
      EXPECT_EQ(e.kind(), ParseError::Kind::MalformedHeader) << text;
    }
  }
}

TEST(ParseDimacs, UnterminatedClause) {
  try {
    parse_dimacs("p cnf 3 1\n1 2\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.kind(), ParseError::Kind::UnterminatedClause);
  }
}

TEST(ParseDimacs, MalformedToken) {
  try {
    parse_dimacs("p cnf 3 1\n1 x 0\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.kind(), ParseError::Kind::MalformedToken);
  }
}

TEST(ParseDimacs, ClauseCountMismatchWarns) {
  std::vector<std::string> warnings;
  auto f = parse_dimacs("p cnf 2 5\n1 0\n", &warnings);
  EXPECT_EQ(f.clauses.size(), 1u);
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("5"), std::string::npos);
}

TEST(ParseDimacs, EmptyClauseIsKept) {
  auto f = parse_dimacs("p cnf 2 2\n0\n1 2 0\n");
  ASSERT_EQ(f.clauses.size(), 2u);
  EXPECT_TRUE(f.clauses[0].empty());
  EXPECT_TRUE(f.has_empty_clause());
  EXPECT_FALSE(brute_force_sat(f));
}

TEST(WriteIcnf, Example) {
  Formula f{1, {clause({1})}};
  std::vector<Cube> cubes{Cube::from_dimacs({-1})};
  EXPECT_EQ(write_icnf(f, cubes), "p inccnf\n1 0\na -1 0\n");
}

TEST(WriteIcnf, NoCubes) {
  Formula f{2, {clause({1, -2})}};
  EXPECT_EQ(write_icnf(f, {}), "p inccnf\n1 -2 0\n");
}

TEST(WriteIcnf, RejectsOutOfRangeCube) {
  Formula f{1, {clause({1})}};
  std::vector<Cube> cubes{Cube::from_dimacs({2})};
  EXPECT_THROW(write_icnf(f, cubes), Error);
}

TEST(ParseIcnf, MalformedCubeLine) {
  for (const char* text : {"p inccnf\na 1 2\n", "p inccnf\na 1 -1 0\n", "p inccnf\na x 0\n"}) {
    try {
      parse_icnf(text);
      FAIL() << text;
    } catch (const ParseError& e) {
      EXPECT_EQ(e.kind(), ParseError::Kind::MalformedCubeLine) << text;
    }
  }
}

TEST(ParseIcnf, RandomRoundTrip) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    Var vars = 1 + rng() % 20;
    auto f = random_formula(rng, vars, rng() % 15);
    std::vector<Cube> cubes;
    for (int i = rng() % 5; i > 0; --i) {
      std::vector<Literal> lits;
      for (Var v = 0; v < vars; ++v)
        if (rng() % 4 == 0) lits.push_back(rng() & 1 ? Literal::positive(v) : Literal::negative(v));
      cubes.emplace_back(lits);
    }
    auto text = write_icnf(f, cubes);
    auto back = parse_icnf(text);
    EXPECT_EQ(back.formula, f);
    EXPECT_EQ(back.cubes, cubes);
    EXPECT_EQ(write_icnf(back.formula, back.cubes), text);
  }
}

TEST(Dimacs, RandomRoundTrip) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    auto f = random_formula(rng, 1 + rng() % 30, rng() % 30);
    auto text = write_dimacs(f);
    EXPECT_EQ(parse_dimacs(text), f);
    EXPECT_EQ(write_dimacs(parse_dimacs(text)), text);
  }
}

TEST(Corpus, RoundTripsBitExact) {
  std::size_t files = 0;
  for (const auto& entry : std::filesystem::directory_iterator(std::string(SDAC_TEST_DATA) + "/corpus")) {
    ++files;
    const auto name = entry.path().filename().string();
    const auto text = slurp(entry.path());
    const bool icnf = entry.path().extension() == ".icnf";
    const bool canonical = name.rfind("canon-", 0) == 0;
    std::string once, twice;
    if (icnf) {
      auto p = parse_icnf(text);
      once = write_icnf(p.formula, p.cubes);
      auto q = parse_icnf(once);
      EXPECT_EQ(q, p) << name;
      twice = write_icnf(q.formula, q.cubes);
    } else {
      auto f = parse_dimacs(text);
      once = write_dimacs(f);
      auto g = parse_dimacs(once);
      EXPECT_EQ(g, f) << name;
      twice = write_dimacs(g);
    }
    EXPECT_EQ(twice, once) << name;
    if (canonical) {
      EXPECT_EQ(once, text) << name;
    }
  }
  EXPECT_EQ(files, 50u);
}

TEST(Cube, RejectsRepeatedVariables) {
  EXPECT_THROW(Cube::from_dimacs({1, -1}), InvalidCube);
  EXPECT_THROW(Cube::from_dimacs({2, 3, 2}), InvalidCube);
  EXPECT_NO_THROW(Cube::from_dimacs({1, -2, 3}));
  EXPECT_TRUE(Cube{}.empty());
}

TEST(Cube, RandomMultisetsRejectedIffRepeated) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<Literal> lits;
    std::vector<int> seen(6, 0);
    bool repeated = false;
    for (int i = rng() % 6; i > 0; --i) {
      int v = static_cast<int>(rng() % 5) + 1;
      repeated |= seen[v]++ > 0;
      lits.push_back(Literal::from_dimacs(rng() & 1 ? v : -v));
    }
    if (repeated) {
      EXPECT_THROW(Cube{lits}, InvalidCube);
    } else {
      EXPECT_NO_THROW(Cube{lits});
    }
  }
}

TEST(Conjoin, AppendsUnits) {
  Formula f{2, {clause({1, 2})}};
  EXPECT_EQ(conjoin(f, Cube{}), f);
  auto g = conjoin(f, Cube::from_dimacs({-1}));
  ASSERT_EQ(g.clauses.size(), 2u);
  EXPECT_EQ(g.clauses[1], clause({-1}));
  EXPECT_EQ(f.clauses.size(), 1u);
  EXPECT_EQ(conjoin(conjoin(f, Cube::from_dimacs({-1})), Cube::from_dimacs({2})),
            conjoin(f, Cube::from_dimacs({-1, 2})));
  EXPECT_THROW(conjoin(f, Cube::from_dimacs({3})), Error);
}

TEST(BruteForce, Examples) {
  EXPECT_FALSE(brute_force_sat(Formula{1, {clause({1}), clause({-1})}}));
  auto m = brute_force_sat(Formula{2, {clause({1, 2}), clause({-1, 2})}});
  ASSERT_TRUE(m);
  EXPECT_TRUE((*m)[1]);
  EXPECT_TRUE(brute_force_sat(Formula{}));
}

TEST(BruteForce, Pigeonhole) {
  auto f = php_formula(4, 3);
  // 4 "some hole" clauses + 3 holes * C(4,2) exclusion clauses.
  EXPECT_EQ(f.clauses.size(), 4u + 3u * 6u);
  EXPECT_EQ(f.num_vars, 12u);
  EXPECT_FALSE(brute_force_sat(f));
  auto g = php_formula(3, 3);
  auto m = brute_force_sat(g);
  ASSERT_TRUE(m);
  EXPECT_TRUE(satisfies(g, *m));
}

TEST(BruteForce, TooManyVariables) {
  Formula f;
  f.num_vars = kBruteForceMaxVars + 1;
  EXPECT_THROW(brute_force_sat(f), TooManyVariables);
}

TEST(BruteForce, AgreesWithNaiveEnumeration) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    auto f = random_formula(rng, 1 + rng() % 10, rng() % 40);
    auto m = brute_force_sat(f);
    EXPECT_EQ(m.has_value(), sat_by_enumeration(f));
    if (m) {
      EXPECT_TRUE(satisfies(f, *m));
    }
  }
}

TEST(BruteForce, RestrictionCannotCreateModels) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 300; ++trial) {
    Var vars = 2 + rng() % 8;
    auto f = random_formula(rng, vars, rng() % 30);
    std::vector<Literal> lits;
    for (Var v = 0; v < vars; ++v)
      if (rng() % 3 == 0) lits.push_back(rng() & 1 ? Literal::positive(v) : Literal::negative(v));
    if (brute_force_sat(conjoin(f, Cube(lits)))) {
      EXPECT_TRUE(brute_force_sat(f));
    }
  }
}

TEST(Benchmarks, XorMiterIsUnsat) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    auto f = xor_miter_formula(8, seed);
    EXPECT_EQ(f.num_vars, 22u);
    EXPECT_FALSE(brute_force_sat(f)) << "seed " << seed;
  }
  EXPECT_NE(xor_miter_formula(12, 1).clauses, xor_miter_formula(12, 2).clauses);
}

TEST(Benchmarks, Deterministic) {
  EXPECT_EQ(random_3cnf_formula(20, 80, 4), random_3cnf_formula(20, 80, 4));
  EXPECT_EQ(gen_benchmark(Php{4, 3}), php_formula(4, 3));
  for (const auto& c : random_3cnf_formula(10, 50, 1).clauses) {
    ASSERT_EQ(c.size(), 3u);
    EXPECT_NE(c[0].var(), c[1].var());
    EXPECT_NE(c[1].var(), c[2].var());
    EXPECT_NE(c[0].var(), c[2].var());
  }
}
