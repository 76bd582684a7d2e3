#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "dbf/asyncsim.hpp"
#include "dbf/protocol.hpp"
#include "dbf/table1.hpp"

using namespace dbf;

namespace {

using SP = Table1Algebra;

Schedule load_fig1() {
  std::ifstream in(std::string(DBF_FIXTURE_DIR) + "/fig1_schedule.txt");
  EXPECT_TRUE(in.good());
  return read_schedule(in);
}

// The three period definitions, transcribed literally over the finite horizon.
bool is_expiry(const Schedule& s, NodeId i, std::size_t t1, std::size_t t2) {
  if (s.eta[t1] != s.eta[t2]) return false;
  for (std::size_t t = std::max<std::size_t>(t2, 1); t <= s.horizon; ++t)
    for (NodeId j = 0; j < s.n; ++j)
      if (s.b(t, i, j) < t1) return false;
  return true;
}

bool is_activation(const Schedule& s, NodeId i, std::size_t t1, std::size_t t2) {
  if (s.eta[t1] != s.eta[t2]) return false;
  for (std::size_t t = std::max<std::size_t>(t1, 1); t <= t2; ++t)
    if (s.alpha[t].contains(i)) return true;
  return false;
}

bool is_pseudocycle(const Schedule& s, std::size_t t1, std::size_t t2) {
  if (s.eta[t1] != s.eta[t2]) return false;
  for (NodeId i : s.rho(t1).members()) {
    bool found = false;
    for (std::size_t t = t1; t <= t2 && !found; ++t) found = is_expiry(s, i, t1, t) && is_activation(s, i, t, t2);
    if (!found) return false;
  }
  return true;
}

AdjacencyMatrix<SP> random_topology(const SP& alg, std::size_t n, rng_type& rng) {
  auto M = empty_topology(alg, n);
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = 0; j < n; ++j)
      if (i != j && coin(rng, 0.6)) M(i, j) = alg.parse_policy(i, j, "add:" + std::to_string(uniform_u64(rng, 1, 5)));
  return M;
}

RoutingState<SP> random_state(const SP& alg, std::size_t n, rng_type& rng) {
  RoutingState<SP> X(n, alg.invalid());
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = 0; j < n; ++j) X(i, j) = alg.sample_weight(rng);
  return X;
}

}  // namespace

TEST(AsyncSim, Fig1FixtureIsValid) {
  const auto s = load_fig1();
  const std::vector<std::size_t> row{0, 0, 2, 1, 1, 1, 1, 7, 8, 7};
  for (std::size_t t = 1; t <= 10; ++t) EXPECT_EQ(s.b(t, 0, 1), row[t - 1]);
  EXPECT_TRUE(validate_schedule(s).empty());
}

TEST(AsyncSim, Fig1PerturbationViolatesS1) {
  auto s = load_fig1();
  s.b(5, 0, 1) = 7;
  const auto v = validate_schedule(s);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].rule, "S1");
  EXPECT_EQ(v[0].t, 5u);
}

TEST(AsyncSim, DecreasingEpochViolatesS2) {
  auto s = synchronous_schedule(2, 5);
  s.pi.push_back(NodeSet::all(2));
  s.eta = {0, 0, 1, 0, 0, 0};
  const auto v = validate_schedule(s);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].rule, "S2");
  EXPECT_EQ(v[0].t, 3u);
}

TEST(AsyncSim, ParticipatingTopology) {
  const SP alg(table1_kind::shortest, 16);
  rng_type rng(1);
  NetworkOverEpochs<SP> N{random_topology(alg, 3, rng)};
  N[0](0, 1) = alg.parse_policy(0, 1, "add:2");
  N[0](1, 0) = alg.parse_policy(1, 0, "add:3");
  N[0](2, 0) = alg.parse_policy(2, 0, "add:1");
  EXPECT_EQ(participating_topology(alg, N, 0, NodeSet::all(3)), N[0]);
  EXPECT_EQ(participating_topology(alg, N, 0, NodeSet(3)), empty_topology(alg, 3));
  const auto P = participating_topology(alg, N, 0, NodeSet::of(3, {0, 1}));
  EXPECT_EQ(P(0, 1), N[0](0, 1));
  EXPECT_EQ(P(1, 0), N[0](1, 0));
  for (NodeId k = 0; k < 3; ++k) {
    EXPECT_EQ(P(2, k), alg.invalid_policy(2, k));
    EXPECT_EQ(P(k, 2), alg.invalid_policy(k, 2));
  }
  try {
    participating_topology(alg, N, 1, NodeSet::all(3));
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::epoch_out_of_range);
  }
}

TEST(AsyncSim, DeltaUnderSynchronousScheduleIsSigma) {
  const SP alg(table1_kind::shortest, 16);
  rng_type rng(99);
  for (int k = 0; k < 60; ++k) {
    const std::size_t n = 1 + uniform_index(rng, 5);
    const std::size_t T = uniform_index(rng, 21);
    NetworkOverEpochs<SP> N{random_topology(alg, n, rng)};
    const auto X0 = random_state(alg, n, rng);
    const auto delta = run_delta(alg, N, synchronous_schedule(n, T), X0);
    std::vector<RoutingState<SP>> sigma{X0};
    for (std::size_t t = 1; t <= T; ++t) sigma.push_back(step(alg, N[0], sigma.back()));
    ASSERT_EQ(delta.size(), sigma.size());
    for (std::size_t t = 0; t <= T; ++t) ASSERT_EQ(delta[t], sigma[t]) << "t=" << t;
  }
}

TEST(AsyncSim, NonParticipantsHoldIdentityRows) {
  const SP alg(table1_kind::shortest, 16);
  rng_type rng(7);
  for (int k = 0; k < 30; ++k) {
    const std::size_t n = 4;
    ScheduleParams p;
    p.seed = k;
    p.horizon = 30;
    p.activation = 0.7;
    p.delay_bound = 3;
    p.loss = 0.2;
    p.epoch_starts = {12};
    p.participants = {{0, 1, 2}, {1, 3}};
    const auto g = generate_schedule(p, n);
    NetworkOverEpochs<SP> N{random_topology(alg, n, rng), random_topology(alg, n, rng)};
    const auto delta = run_delta(alg, N, g.schedule, random_state(alg, n, rng));
    const auto I = identity_state(alg, n);
    for (std::size_t t = 0; t <= p.horizon; ++t) {
      for (NodeId i = 0; i < n; ++i) {
        if (!g.schedule.rho(t).contains(i)) {
          for (NodeId j = 0; j < n; ++j) ASSERT_EQ(delta[t](i, j), I(i, j));
        }
      }
    }
  }
}

TEST(AsyncSim, RunDeltaRejectsInvalidSchedules) {
  const SP alg(table1_kind::shortest, 16);
  auto s = synchronous_schedule(2, 4);
  s.b(3, 0, 1) = 3;
  NetworkOverEpochs<SP> N{empty_topology(alg, 2)};
  try {
    run_delta(alg, N, s, identity_state(alg, 2));
    FAIL();
  } catch (const error& e) {
    EXPECT_EQ(e.code(), errc::invalid_schedule);
  }
}

TEST(AsyncSim, SynchronousScheduleHasUnitPseudocycles) {
  for (std::size_t T : {1u, 5u, 17u}) {
    const auto s = synchronous_schedule(3, T);
    const auto cycles = find_pseudocycles(s);
    ASSERT_EQ(cycles.size(), T);
    for (std::size_t t = 0; t < T; ++t) {
      EXPECT_EQ(cycles[t], (Interval{t, t + 1}));
      EXPECT_TRUE(is_pseudocycle(s, t, t + 1));
    }
  }
}

TEST(AsyncSim, SilentRouterBlocksPseudocycles) {
  auto s = synchronous_schedule(3, 12);
  for (std::size_t t = 1; t <= 12; ++t) s.alpha[t] = NodeSet::of(3, {1, 2});
  EXPECT_TRUE(find_pseudocycles(s).empty());
}

TEST(AsyncSim, EvenActivationsGiveEvenBoundaries) {
  auto s = blank_schedule(1, 12);
  for (std::size_t t = 1; t <= 12; ++t) {
    s.b(t, 0, 0) = t - 1;
    if (t % 2 == 0) s.alpha[t].insert(0);
  }
  const auto cycles = find_pseudocycles(s);
  ASSERT_EQ(cycles.size(), 6u);
  for (std::size_t k = 0; k < 6; ++k) EXPECT_EQ(cycles[k], (Interval{2 * k, 2 * k + 2}));
}

TEST(AsyncSim, GreedyDecompositionAgreesWithDefinitions) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    ScheduleParams p;
    p.seed = seed;
    p.horizon = 25;
    p.activation = 0.6;
    p.delay_bound = 1 + seed % 4;
    p.loss = 0.15;
    p.duplication = 0.1;
    if (seed % 3 == 0) p.epoch_starts = {10};
    const std::size_t n = 1 + seed % 3;
    if (seed % 5 == 0) p.participants = {{0, n - 1}};
    const auto g = generate_schedule(p, n);
    const auto& s = g.schedule;
    std::size_t cursor = 0;
    for (const auto& iv : g.pseudocycles) {
      ASSERT_TRUE(is_pseudocycle(s, iv.start, iv.end)) << seed;
      ASSERT_LT(iv.start, iv.end);
      for (std::size_t t = iv.start + 1; t < iv.end; ++t) ASSERT_FALSE(is_pseudocycle(s, iv.start, t)) << seed;
      // A jump past the cursor is only allowed when nothing starting there closes.
      if (iv.start != cursor) {
        for (std::size_t t = cursor + 1; t <= s.horizon; ++t) ASSERT_FALSE(is_pseudocycle(s, cursor, t)) << seed;
        ASSERT_NE(s.eta[cursor], s.eta[iv.start]) << seed;
      }
      cursor = iv.end;
    }
    for (std::size_t t = cursor + 1; t <= s.horizon; ++t) ASSERT_FALSE(is_pseudocycle(s, cursor, t)) << seed;
  }
}

TEST(AsyncSim, DegenerateParametersGiveSynchronousSchedule) {
  ScheduleParams p;
  p.seed = 5;
  p.horizon = 15;
  const auto g = generate_schedule(p, 3);
  EXPECT_EQ(g.schedule, synchronous_schedule(3, 15));
  EXPECT_EQ(g.pseudocycles.size(), 15u);
}

TEST(AsyncSim, TotalLossFreezesBeta) {
  ScheduleParams p;
  p.seed = 5;
  p.horizon = 15;
  p.loss = 1.0;
  const auto g = generate_schedule(p, 3);
  for (std::size_t t = 1; t <= 15; ++t)
    for (auto b : g.schedule.beta[t]) EXPECT_EQ(b, 0u);
  // Only the opening interval qualifies: an expiry period starting at time 0
  // is vacuous, and no later one can ever close.
  ASSERT_EQ(g.pseudocycles.size(), 1u);
  EXPECT_EQ(g.pseudocycles[0], (Interval{0, 1}));
}

TEST(AsyncSim, GenerationIsSeedDeterministic) {
  ScheduleParams p;
  p.horizon = 40;
  p.activation = 0.5;
  p.delay_bound = 5;
  p.loss = 0.2;
  p.duplication = 0.1;
  p.seed = 1234;
  const auto a = generate_schedule(p, 4);
  const auto b = generate_schedule(p, 4);
  EXPECT_EQ(schedule_to_string(a.schedule), schedule_to_string(b.schedule));
  p.seed = 1235;
  EXPECT_NE(schedule_to_string(generate_schedule(p, 4).schedule), schedule_to_string(a.schedule));
}

TEST(AsyncSim, GeneratedTracesValidateAndRoundTrip) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    ScheduleParams p;
    p.seed = seed;
    p.horizon = 30;
    p.activation = 0.5;
    p.delay_bound = 6;
    p.loss = 0.3;
    p.duplication = 0.2;
    p.epoch_starts = {7, 20};
    p.participants = {{0, 1}, {}, {0, 1, 2}};
    const auto g = generate_schedule(p, 3);
    EXPECT_TRUE(validate_schedule(g.schedule).empty());
    std::stringstream ss;
    write_schedule(ss, g.schedule);
    EXPECT_EQ(read_schedule(ss), g.schedule);
  }
}

TEST(AsyncSim, TwoNodeFreeInstanceReachesSynchronousFixedPoint) {
  const SP alg(table1_kind::shortest, 16, 1);
  auto M = empty_topology(alg, 2);
  M(0, 1) = alg.parse_policy(0, 1, "add:2");
  M(1, 0) = alg.parse_policy(1, 0, "add:3");
  const auto sync = run_synchronous(alg, M, identity_state(alg, 2), 100);
  ASSERT_TRUE(std::holds_alternative<Converged<nat_inf>>(sync));
  const auto fixed = std::get<Converged<nat_inf>>(sync).state;
  rng_type rng(3);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    ScheduleParams p;
    p.seed = seed;
    p.horizon = 200;
    p.activation = 0.5;
    p.delay_bound = 5;
    p.loss = 0.2;
    p.duplication = 0.1;
    const auto g = generate_schedule(p, 2);
    ASSERT_GE(g.pseudocycles.size(), 20u);
    const auto delta = run_delta(alg, NetworkOverEpochs<SP>{M}, g.schedule, random_state(alg, 2, rng));
    EXPECT_EQ(delta.back(), fixed) << "seed " << seed;
  }
}
