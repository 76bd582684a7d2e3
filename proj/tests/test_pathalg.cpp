#include <gtest/gtest.h>

#include "dbf/pathalg.hpp"
#include "dbf/table1.hpp"

using namespace dbf;

namespace {

// Shortest-pv with path(∞̄) deliberately reporting [] instead of ⊥.
class LeakyPathAlgebra : public ShortestPathsPv {
 public:
  using ShortestPathsPv::ShortestPathsPv;
  SimplePath path(const pv_weight& x) const { return x.is_inf ? SimplePath::trivial() : x.path; }
};

// Lexicographic comparison of origin-first node sequences, written out directly.
bool lex_leq(const std::vector<NodeId>& a, const std::vector<NodeId>& b) {
  for (std::size_t k = 0; k < a.size() && k < b.size(); ++k) {
    if (a[k] != b[k]) return a[k] < b[k];
  }
  return a.size() <= b.size();
}

}  // namespace

TEST(PathAlg, ShortestPvPassesP1ToP3Exhaustively) {
  const auto alg = make_shortest_paths_pv_algebra(3, 4);
  const auto report = check_path_axioms(alg, 3, exhaustive_mode{});
  for (const auto& [name, st] : report.entries) {
    EXPECT_EQ(st.state, status::holds) << name;
    EXPECT_GT(st.cases, 0u);
  }
  const auto axioms = check_routing_axioms(alg, exhaustive_mode{});
  EXPECT_FALSE(axioms.any_failed());
}

TEST(PathAlg, ExtensionExamples) {
  const auto alg = make_shortest_paths_pv_algebra(3, 8);
  const auto f1 = alg.parse_policy(0, 1, "add:1");
  EXPECT_EQ(alg.extend(0, 1, f1, alg.trivial()), alg.parse_weight("1:0<1"));
  EXPECT_EQ(alg.extend(0, 1, f1, alg.parse_weight("2:1<0")), alg.invalid());
  EXPECT_EQ(alg.extend(0, 1, f1, alg.parse_weight("2:2<0")), alg.invalid());
  EXPECT_EQ(alg.extend(0, 1, alg.invalid_policy(0, 1), alg.trivial()), alg.invalid());
}

TEST(PathAlg, ChoiceMatchesDirectComparator) {
  const auto alg = make_shortest_paths_pv_algebra(3, 2);
  const auto a = alg.parse_weight("2:0<1<2");
  const auto b = alg.parse_weight("2:0<2");
  const auto expected = lex_leq(a.path.nodes(), b.path.nodes()) ? a : b;
  EXPECT_EQ(alg.choose(a, b), expected);
  EXPECT_EQ(alg.choose(b, a), expected);
  for (const auto& x : alg.weights()) {
    for (const auto& y : alg.weights()) {
      pv_weight want;
      if (x.is_inf) want = y;
      else if (y.is_inf) want = x;
      else if (x.length != y.length) want = x.length < y.length ? x : y;
      else want = lex_leq(x.path.nodes(), y.path.nodes()) ? x : y;
      ASSERT_EQ(alg.choose(x, y), want) << alg.render(x) << " ⊕ " << alg.render(y);
    }
  }
}

TEST(PathAlg, LeakyPathFailsP1AtInvalid) {
  const LeakyPathAlgebra alg(3, 2);
  const auto report = check_path_axioms(alg, 3, exhaustive_mode{});
  const auto& p1 = report.at("P1");
  ASSERT_EQ(p1.state, status::fails);
  ASSERT_TRUE(p1.witness);
  EXPECT_EQ(p1.witness->weights.at(0), "inf");
}

TEST(PathAlg, NonPathAlgebraRaisesNoPathFunction) {
  const auto sp = make_table1_algebra(table1_kind::shortest, 4);
  try {
    check_path_axioms(sp, 3, exhaustive_mode{});
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::no_path_function);
  }
}

TEST(PathAlg, SampledModeAgreesWithExhaustive) {
  const auto alg = make_shortest_paths_pv_algebra(4, 6);
  const auto report = check_path_axioms(alg, 4, sampled_mode{9, 5000});
  for (const auto& [name, st] : report.entries) EXPECT_EQ(st.state, status::sampled) << name;
}

TEST(PathAlg, IncreasingImpliesStrictlyIncreasing) {
  // Zero-length links let a lexicographically smaller path win after
  // extension, so the full catalog is not increasing; the report must never
  // claim increasing while denying strict increase.
  for (std::uint64_t cap : {2, 3}) {
    const auto alg = make_shortest_paths_pv_algebra(3, cap);
    const auto props = check_properties(alg, exhaustive_mode{});
    EXPECT_TRUE(props.at("increasing").failed());
    EXPECT_FALSE(props.at("increasing").ok() && props.at("strictly_increasing").failed());
    const auto& w = props.at("increasing").witness;
    ASSERT_TRUE(w);
    EXPECT_EQ(w->policies.at(0), "add:0");

    restricted<ShortestPathsPv> positive(alg, alg.weights(), {alg.parse_policy(0, 0, "add:1"), alg.parse_policy(0, 0, "add:2")});
    const auto pos = check_properties(positive, exhaustive_mode{});
    EXPECT_EQ(pos.at("increasing").state, status::holds);
    EXPECT_EQ(pos.at("strictly_increasing").state, status::holds);
  }
}

TEST(PathAlg, WeightsRoundTripAndCount) {
  const auto alg = make_shortest_paths_pv_algebra(3, 4);
  const auto ws = alg.weights();
  // 13 simple paths over 3 routers, lengths 0..4, plus ∞.
  EXPECT_EQ(ws.size(), 13u * 5u + 1u);
  for (const auto& x : ws) EXPECT_EQ(alg.parse_weight(alg.render(x)), x);
}
