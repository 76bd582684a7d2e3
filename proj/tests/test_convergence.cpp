#include <gtest/gtest.h>

#include "dbf/convergence.hpp"
#include "dbf/pathalg.hpp"
#include "dbf/table1.hpp"
#include "dbf/table_algebra.hpp"

using namespace dbf;

namespace {

using SP = Table1Algebra;
using Asg = Assignment<nat_inf>;

AdjacencyMatrix<SP> random_topology(const SP& alg, std::size_t n, rng_type& rng, std::uint64_t lo, std::uint64_t hi,
                                    double density = 0.5) {
  auto M = empty_topology(alg, n);
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = 0; j < n; ++j)
      if (i != j && coin(rng, density)) M(i, j) = alg.parse_policy(i, j, "add:" + std::to_string(uniform_u64(rng, lo, hi)));
  return M;
}

// The two-router {0,1,∞} instance with unit links both ways.
struct Tiny {
  SP alg{table1_kind::shortest, 1};
  AdjacencyMatrix<SP> M = [this] {
    auto m = empty_topology(alg, 2);
    m(0, 1) = alg.parse_policy(0, 1, "add:1");
    m(1, 0) = alg.parse_policy(1, 0, "add:1");
    return m;
  }();
};

// Heights recomputed from the literal definitions: adjacency over V × S
// followed by Warshall's transitive closure.
template <class A>
std::vector<std::size_t> warshall_heights(const A& alg, const AdjacencyMatrix<A>& M, const std::vector<weight_t<A>>& ws) {
  const std::size_t n = M.size();
  const std::size_t m = ws.size();
  const std::size_t V = n * m;
  std::vector<std::vector<char>> R(V, std::vector<char>(V, 0));
  for (std::size_t a = 0; a < V; ++a) {
    for (std::size_t b = 0; b < V; ++b) {
      const NodeId ia = a / m, ib = b / m;
      const auto& x = ws[a % m];
      const auto& y = ws[b % m];
      const bool ext = x != alg.invalid() && alg.extend(ib, ia, M(ib, ia), x) == y;
      const bool pref = ia == ib && alg.choose(x, y) == x && x != y;
      R[a][b] = ext || pref;
    }
  }
  for (std::size_t k = 0; k < V; ++k)
    for (std::size_t a = 0; a < V; ++a)
      if (R[a][k])
        for (std::size_t b = 0; b < V; ++b)
          if (R[k][b]) R[a][b] = 1;
  std::vector<std::size_t> h(V, 0);
  for (std::size_t a = 0; a < V; ++a) {
    EXPECT_FALSE(R[a][a]) << "assignment reaches itself";
    for (std::size_t b = 0; b < V; ++b) h[a] += R[a][b];
  }
  return h;
}

std::vector<RoutingState<SP>> all_states(const SP& alg, std::size_t n) {
  const auto ws = alg.weights();
  std::vector<RoutingState<SP>> out;
  std::size_t total = 1;
  for (std::size_t k = 0; k < n * n; ++k) total *= ws.size();
  for (std::size_t code = 0; code < total; ++code) {
    RoutingState<SP> X(n, alg.invalid());
    std::size_t c = code;
    for (std::size_t k = 0; k < n * n; ++k) {
      X(k / n, k % n) = ws[c % ws.size()];
      c /= ws.size();
    }
    out.push_back(X);
  }
  return out;
}

}  // namespace

TEST(Convergence, RelationExamples) {
  const SP alg(table1_kind::shortest, 16);
  auto M = empty_topology(alg, 2);
  M(0, 1) = alg.parse_policy(0, 1, "add:1");
  const nat_inf inf = alg.invalid();
  EXPECT_FALSE(prefers(alg, Asg{0, nat_inf{2}}, Asg{1, nat_inf{2}}));
  EXPECT_TRUE(prefers(alg, Asg{0, alg.trivial()}, Asg{0, inf}));
  EXPECT_TRUE(prefers(alg, Asg{0, nat_inf{4}}, Asg{0, nat_inf{4}}));
  EXPECT_FALSE(strictly_prefers(alg, Asg{0, nat_inf{4}}, Asg{0, nat_inf{4}}));

  EXPECT_TRUE(extends(alg, M, Asg{1, nat_inf{2}}, Asg{0, nat_inf{3}}));
  EXPECT_FALSE(extends(alg, M, Asg{1, inf}, Asg{0, inf}));
  EXPECT_TRUE(threatens(alg, M, Asg{1, nat_inf{2}}, Asg{0, nat_inf{5}}));
  EXPECT_FALSE(threatens(alg, M, Asg{1, nat_inf{2}}, Asg{0, nat_inf{2}}));
  for (std::uint64_t x = 0; x <= 16; ++x) {
    EXPECT_FALSE(threatens(alg, M, Asg{1, inf}, Asg{0, nat_inf{x}}));
    // The reverse link is f∞, so nothing at router 0 extends to router 1.
    for (std::uint64_t y = 0; y <= 16; ++y) EXPECT_FALSE(extends(alg, M, Asg{0, nat_inf{y}}, Asg{1, nat_inf{x}}));
  }
}

TEST(Convergence, ExtensionImpliesThreat) {
  const SP alg(table1_kind::shortest, 6);
  rng_type rng(5);
  for (int k = 0; k < 20; ++k) {
    const auto M = random_topology(alg, 3, rng, 0, 3);
    for (NodeId i = 0; i < 3; ++i)
      for (NodeId j = 0; j < 3; ++j)
        for (const auto& y : alg.weights())
          for (const auto& x : alg.weights())
            if (extends(alg, M, Asg{j, y}, Asg{i, x})) {
              EXPECT_TRUE(threatens(alg, M, Asg{j, y}, Asg{i, x}));
            }
  }
}

TEST(Convergence, StrictlyIncreasingTopologiesAreFree) {
  const SP alg(table1_kind::shortest, 8, 1);
  ASSERT_EQ(check_properties(alg, exhaustive_mode{}).at("strictly_increasing").state, status::holds);
  rng_type rng(11);
  for (int k = 0; k < 50; ++k) {
    const std::size_t n = 2 + uniform_index(rng, 4);
    const auto report = is_free(alg, random_topology(alg, n, rng, 1, 8, 0.7));
    EXPECT_TRUE(report.free);
    EXPECT_TRUE(report.cycle.empty());
  }
  EXPECT_TRUE(is_free(alg, empty_topology(alg, 4)).free);
}

TEST(Convergence, ZeroWeightCycleIsNotFree) {
  const SP alg(table1_kind::shortest, 4);
  auto M = empty_topology(alg, 2);
  M(0, 1) = alg.parse_policy(0, 1, "add:0");
  M(1, 0) = alg.parse_policy(1, 0, "add:0");
  const auto report = is_free(alg, M);
  ASSERT_FALSE(report.free);
  ASSERT_GE(report.cycle.size(), 2u);
  for (std::size_t k = 0; k < report.cycle.size(); ++k) {
    EXPECT_TRUE(threatens(alg, M, report.cycle[k], report.cycle[(k + 1) % report.cycle.size()]));
  }
}

TEST(Convergence, GadgetIsNotFreeWithReplayableWitness) {
  const auto g = make_nonfree_gadget();
  const auto& alg = g.algebra;
  const auto M = parse_topology(alg, g.adjacency);
  const auto report = is_free(alg, M);
  ASSERT_FALSE(report.free);
  ASSERT_FALSE(report.cycle.empty());
  // Replay every link with the raw primitives instead of `threatens`.
  for (std::size_t k = 0; k < report.cycle.size(); ++k) {
    const auto& a = report.cycle[k];
    const auto& b = report.cycle[(k + 1) % report.cycle.size()];
    ASSERT_NE(a.weight, alg.invalid());
    ASSERT_NE(b.weight, alg.invalid());
    const auto z = alg.extend(b.router, a.router, M(b.router, a.router), a.weight);
    EXPECT_EQ(alg.choose(z, b.weight), z) << alg.render(a.weight) << " -> " << alg.render(b.weight);
  }
  EXPECT_THROW(dislodgement_height(alg, M), error);
  try {
    dislodgement_height(alg, M);
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::not_free);
  }
}

TEST(Convergence, UncappedAlgebraIsNotEnumerable) {
  const SP alg(table1_kind::shortest, std::nullopt);
  try {
    is_free(alg, empty_topology(alg, 2));
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::not_enumerable);
  }
}

TEST(Convergence, HeightsMatchWarshallClosure) {
  const SP alg(table1_kind::shortest, 4, 1);
  rng_type rng(13);
  for (int k = 0; k < 15; ++k) {
    const std::size_t n = 2 + uniform_index(rng, 2);
    const auto M = random_topology(alg, n, rng, 1, 3, 0.6);
    const auto H = dislodgement_height(alg, M);
    const auto expect = warshall_heights(alg, M, H.graph.weights);
    ASSERT_EQ(H.h, expect);
    const std::size_t bound = n * H.graph.weights.size() - 1;
    for (std::size_t v : H.h) EXPECT_LE(v, bound);
    // H1/H2 on every edge of the digraph.
    for (const auto& arc : H.graph.arcs) EXPECT_LT(H.h[arc.to], H.h[arc.from]);
    // Sinks have height zero.
    const auto succ = H.graph.successors();
    for (std::size_t v = 0; v < succ.size(); ++v)
      if (succ[v].empty()) {
        EXPECT_EQ(H.h[v], 0u);
      }
  }
}

TEST(Convergence, DistanceVectorStrictContractionOnAllPairs) {
  const Tiny t;
  const auto oracle = dv_dissimilarity(t.alg, t.M);
  const auto expect_h = warshall_heights(t.alg, t.M, oracle.heights().graph.weights);
  const auto states = all_states(t.alg, 2);
  ASSERT_EQ(states.size(), 81u);

  auto r = [&](NodeId i, const nat_inf& x, const nat_inf& y) -> std::size_t {
    if (x == y) return 0;
    const auto& g = oracle.heights().graph;
    return 1 + std::max(expect_h[*g.find(i, x)], expect_h[*g.find(i, y)]);
  };
  auto D = [&](const RoutingState<SP>& X, const RoutingState<SP>& Y) {
    std::size_t out = 0;
    for (NodeId i = 0; i < 2; ++i)
      for (NodeId j = 0; j < 2; ++j) out = std::max(out, r(i, X(i, j), Y(i, j)));
    return out;
  };

  std::size_t pairs = 0;
  for (const auto& X : states) {
    EXPECT_EQ(oracle.D(X, X), 0u);
    for (const auto& Y : states) {
      ASSERT_EQ(oracle.D(X, Y), D(X, Y));
      if (X == Y) continue;
      EXPECT_GT(oracle.D(X, Y), 0u);
      EXPECT_LT(oracle.D(step(t.alg, t.M, X), step(t.alg, t.M, Y)), oracle.D(X, Y));
      ++pairs;
    }
  }
  EXPECT_EQ(pairs, 81u * 80u);
}

TEST(Convergence, AmcoExhaustiveOnTinyInstance) {
  const Tiny t;
  const NetworkOverEpochs<SP> N{t.M};
  const auto report = check_amco(t.alg, N, 0, NodeSet::all(2), exhaustive_mode{});
  ASSERT_TRUE(report.established);
  EXPECT_EQ(report.dissimilarity, "distance-vector");
  for (const auto& [name, st] : report.conditions.entries) {
    EXPECT_EQ(st.state, status::holds) << name;
    EXPECT_GT(st.cases, 0u) << name;
  }
  ASSERT_TRUE(report.fixed_point);
  EXPECT_EQ(*report.fixed_point, "[[0,1],[1,0]]");
}

TEST(Convergence, AmcoWithPartialParticipation) {
  const SP alg(table1_kind::shortest, 2, 1);
  auto M = empty_topology(alg, 3);
  for (NodeId i = 0; i < 3; ++i)
    for (NodeId j = 0; j < 3; ++j)
      if (i != j) M(i, j) = alg.parse_policy(i, j, "add:1");
  const auto report = check_amco(alg, NetworkOverEpochs<SP>{M}, 0, NodeSet::of(3, {0, 2}), exhaustive_mode{});
  ASSERT_TRUE(report.established);
  EXPECT_FALSE(report.conditions.any_failed());
  EXPECT_EQ(report.conditions.at("D5").state, status::holds);
}

TEST(Convergence, AmcoNotEstablishedOnGadget) {
  const auto g = make_nonfree_gadget();
  const NetworkOverEpochs<TableAlgebra> N{parse_topology(g.algebra, g.adjacency)};
  const auto report = check_amco(g.algebra, N, 0, NodeSet::all(3), exhaustive_mode{});
  EXPECT_FALSE(report.established);
  EXPECT_NE(report.reason.find("NotFree"), std::string::npos);
  for (const auto& [name, st] : report.conditions.entries) EXPECT_EQ(st.state, status::not_applicable) << name;
}

// ---------------------------------------------------------------------------
// Path-vector consistency

namespace {

using PV = ShortestPathsPv;

AdjacencyMatrix<PV> pv_topology(const PV& alg, std::size_t n, rng_type& rng, std::uint64_t lo, std::uint64_t hi) {
  AdjacencyMatrix<PV> M(n, alg.invalid_policy(0, 0));
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = 0; j < n; ++j)
      if (i != j && coin(rng, 0.7)) M(i, j) = alg.parse_policy(i, j, "add:" + std::to_string(uniform_u64(rng, lo, hi)));
  return M;
}

}  // namespace

TEST(Convergence, WeightOfPathExamples) {
  const PV alg(3, 10);
  AdjacencyMatrix<PV> M(3, alg.parse_policy(0, 0, "add:1"));
  EXPECT_EQ(weight_of_path(alg, M, SimplePath::invalid()), alg.invalid());
  EXPECT_EQ(weight_of_path(alg, M, SimplePath::trivial()), alg.trivial());
  EXPECT_EQ(weight_of_path(alg, M, SimplePath::from_nodes({0, 1, 2})), alg.parse_weight("2:0<1<2"));
  EXPECT_TRUE(is_consistent(alg, M, alg.invalid()));
  EXPECT_TRUE(is_consistent(alg, M, alg.trivial()));
  EXPECT_FALSE(is_consistent(alg, M, alg.parse_weight("5:0<1<2")));
}

TEST(Convergence, EpochChangeMakesWeightsInconsistent) {
  const PV alg(3, 20);
  AdjacencyMatrix<PV> M0(3, alg.parse_policy(0, 0, "add:1"));
  AdjacencyMatrix<PV> M1 = M0;
  M1(1, 2) = alg.parse_policy(1, 2, "add:4");
  const auto out = run_synchronous(alg, M0, identity_state(alg, 3), 20);
  ASSERT_TRUE(std::holds_alternative<Converged<pv_weight>>(out));
  const auto& X = std::get<Converged<pv_weight>>(out).state;
  EXPECT_TRUE(is_consistent(alg, M0, X(1, 2)));
  EXPECT_FALSE(is_consistent(alg, M1, X(1, 2)));
  EXPECT_TRUE(is_consistent(alg, M1, X(2, 1)));
}

TEST(Convergence, OperationsPreserveConsistency) {
  const PV alg(4, 30);
  rng_type rng(19);
  for (int k = 0; k < 100; ++k) {
    const auto M = pv_topology(alg, 4, rng, 1, 5);
    const auto C = consistent_weights(alg, M);
    for (const auto& x : C) ASSERT_TRUE(is_consistent(alg, M, x));
    const auto& x = C[uniform_index(rng, C.size())];
    const auto& y = C[uniform_index(rng, C.size())];
    EXPECT_TRUE(is_consistent(alg, M, alg.choose(x, y)));
    const NodeId i = uniform_index(rng, 4), j = uniform_index(rng, 4);
    EXPECT_TRUE(is_consistent(alg, M, alg.extend(i, j, M(i, j), x)));
    RoutingState<PV> X(4, alg.invalid());
    for (NodeId a = 0; a < 4; ++a)
      for (NodeId b = 0; b < 4; ++b) X(a, b) = C[uniform_index(rng, C.size())];
    const auto Y = step(alg, M, X);
    EXPECT_FALSE(min_inconsistent_length(alg, M, Y).has_value());
  }
}

TEST(Convergence, InconsistentEntriesAreFlushed) {
  const std::size_t n = 4;
  const PV alg(n, 40);
  rng_type rng(23);
  for (int k = 0; k < 100; ++k) {
    const auto M = pv_topology(alg, n, rng, 1, 6);
    RoutingState<PV> X(n, alg.invalid());
    for (NodeId a = 0; a < n; ++a)
      for (NodeId b = 0; b < n; ++b) X(a, b) = alg.sample_weight(rng);
    auto s = min_inconsistent_length(alg, M, X);
    std::size_t steps = 0;
    while (s) {
      X = step(alg, M, X);
      ++steps;
      const auto next = min_inconsistent_length(alg, M, X);
      if (next) {
        EXPECT_GT(*next, *s);
      }
      s = next;
    }
    EXPECT_LE(steps, n);
  }
}

TEST(Convergence, PathVectorDissimilarityLayers) {
  const std::size_t n = 3;
  const PV alg(n, 12);
  rng_type rng(29);
  for (int k = 0; k < 10; ++k) {
    const auto M = pv_topology(alg, n, rng, 1, 4);
    const auto oracle = pv_dissimilarity(alg, M);
    const auto C = consistent_weights(alg, M);
    for (const auto& x : C) EXPECT_EQ(oracle.h_inconsistent(x), 0u);
    std::size_t worst_consistent = 0;
    for (NodeId i = 0; i < n; ++i)
      for (const auto& x : C)
        for (const auto& y : C) worst_consistent = std::max(worst_consistent, oracle.r(i, x, y));
    EXPECT_LE(worst_consistent, 1 + oracle.max_height());
    for (int s = 0; s < 200; ++s) {
      const auto x = alg.sample_weight(rng);
      const bool consistent = is_consistent(alg, M, x);
      EXPECT_EQ(oracle.h_inconsistent(x) == 0, consistent);
      if (consistent) continue;
      EXPECT_GE(oracle.h_inconsistent(x), 1u);
      EXPECT_LE(oracle.h_inconsistent(x), n + 1);
      const auto& y = C[uniform_index(rng, C.size())];
      for (NodeId i = 0; i < n; ++i) {
        EXPECT_GT(oracle.r(i, x, y), oracle.max_height());
        EXPECT_GT(oracle.r(i, x, y), worst_consistent);
        EXPECT_LE(oracle.r(i, x, y), oracle.bound());
      }
    }
  }
}

TEST(Convergence, AmcoPathVectorExhaustiveTwoRouters) {
  const PV alg(2, 2);
  AdjacencyMatrix<PV> M(2, alg.invalid_policy(0, 0));
  M(0, 1) = alg.parse_policy(0, 1, "add:1");
  M(1, 0) = alg.parse_policy(1, 0, "add:1");
  const auto report = check_amco(alg, NetworkOverEpochs<PV>{M}, 0, NodeSet::all(2), exhaustive_mode{});
  ASSERT_TRUE(report.established);
  EXPECT_EQ(report.dissimilarity, "path-vector");
  for (const auto& [name, st] : report.conditions.entries) EXPECT_EQ(st.state, status::holds) << name;
}

TEST(Convergence, AmcoPathVectorSampled) {
  const PV alg(4, 30);
  rng_type rng(31);
  for (int k = 0; k < 3; ++k) {
    const auto M = pv_topology(alg, 4, rng, 1, 5);
    const auto report = check_amco(alg, NetworkOverEpochs<PV>{M}, 0, NodeSet::all(4), sampled_mode{static_cast<std::uint64_t>(k), 1000});
    ASSERT_TRUE(report.established);
    for (const auto& [name, st] : report.conditions.entries) {
      EXPECT_EQ(st.state, status::sampled) << name << (st.witness ? " " + st.witness->detail : std::string());
    }
  }
}
