#include <gtest/gtest.h>

#include <random>
#include <set>

#include "dbf/topology.hpp"

using namespace dbf;

namespace {

// Independent validator: contiguity of the edge list and no repeated node.
bool well_formed(const SimplePath& p) {
  if (!p.is_valid()) return p.nodes().empty();
  const auto es = p.edges();
  std::set<NodeId> seen;
  if (es.empty()) return p.nodes().empty();
  seen.insert(es.front().from);
  for (std::size_t k = 0; k < es.size(); ++k) {
    if (k > 0 && es[k - 1].to != es[k].from) return false;
    if (!seen.insert(es[k].to).second) return false;
  }
  return true;
}

SimplePath path_of(std::initializer_list<Edge> es) {
  std::vector<Edge> v(es);
  return SimplePath::from_edges(v);
}

}  // namespace

TEST(Topology, AlignmentExamples) {
  EXPECT_TRUE(is_aligned({0, 1}, SimplePath::trivial()));
  EXPECT_TRUE(is_aligned({0, 1}, path_of({{1, 2}})));
  EXPECT_FALSE(is_aligned({0, 1}, path_of({{2, 3}})));
  EXPECT_FALSE(is_aligned({0, 1}, SimplePath::invalid()));
}

TEST(Topology, ConcatExamples) {
  EXPECT_EQ(concat({0, 1}, SimplePath::trivial()), path_of({{0, 1}}));
  EXPECT_EQ(concat({0, 1}, path_of({{1, 2}})), path_of({{0, 1}, {1, 2}}));
  try {
    concat({2, 0}, path_of({{0, 1}, {1, 2}}));
    FAIL() << "expected WouldFormCycle";
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::would_form_cycle);
  }
}

TEST(Topology, ConcatErrors) {
  try {
    concat({0, 1}, path_of({{2, 3}}));
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::misaligned_edge);
  }
  try {
    concat({0, 1}, SimplePath::invalid());
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::invalid_path);
  }
  try {
    concat({3, 3}, SimplePath::trivial());
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::would_form_cycle);
  }
}

TEST(Topology, ContainsNode) {
  EXPECT_FALSE(contains_node(SimplePath::invalid(), 3));
  EXPECT_TRUE(contains_node(path_of({{0, 1}, {1, 2}}), 1));
  EXPECT_FALSE(contains_node(path_of({{0, 1}, {1, 2}}), 3));
  EXPECT_FALSE(contains_node(SimplePath::trivial(), 0));
}

TEST(Topology, StripConsecutiveDuplicates) {
  using V = std::vector<NodeId>;
  EXPECT_EQ(strip_consecutive_duplicates(V{0, 0, 0, 1, 2}), (V{0, 1, 2}));
  EXPECT_EQ(strip_consecutive_duplicates(V{}), V{});
  EXPECT_EQ(strip_consecutive_duplicates(V{0, 1, 1, 0}), (V{0, 1, 0}));
}

TEST(Topology, StripIsIdempotentOnRandomInputs) {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 2000; ++k) {
    std::vector<NodeId> raw(rng() % 12);
    for (auto& v : raw) v = rng() % 3;
    const auto once = strip_consecutive_duplicates(raw);
    EXPECT_EQ(strip_consecutive_duplicates(once), once);
  }
}

TEST(Topology, RandomConcatChainsStayWellFormed) {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 2000; ++k) {
    SimplePath p;
    for (int step = 0; step < 8; ++step) {
      const NodeId to = p.origin().value_or(rng() % 6);
      const Edge e{static_cast<NodeId>(rng() % 6), to};
      const std::size_t before = p.length();
      try {
        p = concat(e, p);
        EXPECT_EQ(p.length(), before + 1);
      } catch (const error& err) {
        EXPECT_EQ(err.code(), errc::would_form_cycle);
      }
      ASSERT_TRUE(well_formed(p)) << to_string(p);
    }
  }
}

TEST(Topology, Rendering) {
  EXPECT_EQ(to_string(SimplePath::invalid()), "⊥");
  EXPECT_EQ(to_string(SimplePath::trivial()), "[]");
  EXPECT_EQ(to_string(path_of({{0, 1}, {1, 2}})), "0<1<2");
  EXPECT_EQ(parse_simple_path("0<1<2"), path_of({{0, 1}, {1, 2}}));
  EXPECT_EQ(parse_simple_path("[]"), SimplePath::trivial());
  EXPECT_EQ(parse_simple_path("⊥"), SimplePath::invalid());
}

TEST(Topology, ParseErrorsCarryPosition) {
  try {
    parse_simple_path("0<x");
    FAIL();
  } catch (const parse_error& e) {
    EXPECT_EQ(e.position(), 2u);
  }
  try {
    parse_simple_path("0<1<0");
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::would_form_cycle);
  }
}

TEST(Topology, OrderPutsBottomLastAndPrefixFirst) {
  EXPECT_LT(SimplePath::trivial(), parse_simple_path("0<1"));
  EXPECT_LT(parse_simple_path("0<1"), parse_simple_path("0<1<2"));
  EXPECT_LT(parse_simple_path("0<1<2"), parse_simple_path("0<2"));
  EXPECT_LT(parse_simple_path("2<0"), SimplePath::invalid());
}
