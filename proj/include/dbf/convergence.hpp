#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "dbf/algebra.hpp"
#include "dbf/asyncsim.hpp"
#include "dbf/error.hpp"
#include "dbf/protocol.hpp"
#include "dbf/topology.hpp"

namespace dbf {

/// Router `router` currently using `weight`.
template <class W>
struct Assignment {
  NodeId router = 0;
  W weight;
  friend bool operator==(const Assignment&, const Assignment&) = default;
};

template <RoutingAlgebra A>
bool prefers(const A& alg, const Assignment<weight_t<A>>& a, const Assignment<weight_t<A>>& b) {
  return a.router == b.router && leq(alg, a.weight, b.weight);
}

template <RoutingAlgebra A>
bool strictly_prefers(const A& alg, const Assignment<weight_t<A>>& a, const Assignment<weight_t<A>>& b) {
  return a.router == b.router && lt(alg, a.weight, b.weight);
}

/// a = (j, y) is extended by b = (i, x) across link (i, j).
template <RoutingAlgebra A>
bool extends(const A& alg, const AdjacencyMatrix<A>& M, const Assignment<weight_t<A>>& a,
             const Assignment<weight_t<A>>& b) {
  if (a.weight == alg.invalid()) return false;
  return alg.extend(b.router, a.router, M(b.router, a.router), a.weight) == b.weight;
}

template <RoutingAlgebra A>
bool threatens(const A& alg, const AdjacencyMatrix<A>& M, const Assignment<weight_t<A>>& a,
               const Assignment<weight_t<A>>& b) {
  if (a.weight == alg.invalid()) return false;
  return leq(alg, alg.extend(b.router, a.router, M(b.router, a.router), a.weight), b.weight);
}

enum class relation { extends, strictly_prefers, threatens };

/// Assignments over V × `weights`, with vertex id router * |weights| + index.
template <class W>
struct AssignmentDigraph {
  struct Arc {
    std::size_t from = 0;
    std::size_t to = 0;
    relation tag = relation::extends;
  };

  std::size_t n = 0;
  std::vector<W> weights;
  std::unordered_map<W, std::size_t, weight_hasher<W>> index;
  std::vector<Arc> arcs;

  [[nodiscard]] std::size_t vertex_count() const noexcept { return n * weights.size(); }
  [[nodiscard]] std::size_t id(NodeId i, std::size_t k) const noexcept { return i * weights.size() + k; }
  [[nodiscard]] std::optional<std::size_t> find(NodeId i, const W& x) const {
    auto it = index.find(x);
    if (it == index.end()) return std::nullopt;
    return id(i, it->second);
  }
  [[nodiscard]] Assignment<W> vertex(std::size_t v) const { return {v / weights.size(), weights[v % weights.size()]}; }

  [[nodiscard]] std::vector<std::vector<std::size_t>> successors() const {
    std::vector<std::vector<std::size_t>> out(vertex_count());
    for (const auto& a : arcs) out[a.from].push_back(a.to);
    return out;
  }
};

namespace detail {

template <class W>
AssignmentDigraph<W> blank_digraph(std::size_t n, std::vector<W> weights) {
  AssignmentDigraph<W> g;
  g.n = n;
  g.weights = std::move(weights);
  for (std::size_t k = 0; k < g.weights.size(); ++k) g.index.emplace(g.weights[k], k);
  constexpr std::size_t limit = 1u << 16;
  if (g.vertex_count() > limit) {
    throw error(errc::too_large, std::to_string(g.vertex_count()) + " assignments exceed the analysis limit of " +
                                     std::to_string(limit));
  }
  return g;
}

/// Some directed cycle as a vertex list, or nullopt when the graph is acyclic.
inline std::optional<std::vector<std::size_t>> find_cycle(const std::vector<std::vector<std::size_t>>& succ) {
  const std::size_t V = succ.size();
  std::vector<char> color(V, 0);  // 0 unseen, 1 on stack, 2 done
  std::vector<std::pair<std::size_t, std::size_t>> stack;
  for (std::size_t root = 0; root < V; ++root) {
    if (color[root] != 0) continue;
    stack.push_back({root, 0});
    color[root] = 1;
    while (!stack.empty()) {
      auto& [v, next] = stack.back();
      if (next == succ[v].size()) {
        color[v] = 2;
        stack.pop_back();
        continue;
      }
      const std::size_t w = succ[v][next++];
      if (color[w] == 1) {
        std::vector<std::size_t> cycle;
        auto it = std::find_if(stack.begin(), stack.end(), [&](const auto& e) { return e.first == w; });
        for (; it != stack.end(); ++it) cycle.push_back(it->first);
        return cycle;
      }
      if (color[w] == 0) {
        color[w] = 1;
        stack.push_back({w, 0});
      }
    }
  }
  return std::nullopt;
}

/// Number of vertices reachable in one or more steps, for an acyclic graph.
inline std::vector<std::size_t> reach_counts(const std::vector<std::vector<std::size_t>>& succ) {
  const std::size_t V = succ.size();
  const std::size_t words = (V + 63) / 64;
  std::vector<std::uint64_t> bits(V * words, 0);
  std::vector<char> done(V, 0);
  std::vector<std::pair<std::size_t, std::size_t>> stack;
  auto row = [&](std::size_t v) { return bits.data() + v * words; };
  for (std::size_t root = 0; root < V; ++root) {
    if (done[root]) continue;
    stack.push_back({root, 0});
    while (!stack.empty()) {
      auto& [v, next] = stack.back();
      if (next < succ[v].size()) {
        const std::size_t w = succ[v][next++];
        if (!done[w]) stack.push_back({w, 0});
        continue;
      }
      std::uint64_t* mine = row(v);
      for (std::size_t w : succ[v]) {
        const std::uint64_t* theirs = row(w);
        for (std::size_t k = 0; k < words; ++k) mine[k] |= theirs[k];
        mine[w / 64] |= std::uint64_t{1} << (w % 64);
      }
      done[v] = 1;
      stack.pop_back();
    }
  }
  std::vector<std::size_t> out(V, 0);
  for (std::size_t v = 0; v < V; ++v) {
    const std::uint64_t* r = row(v);
    for (std::size_t k = 0; k < words; ++k) out[v] += static_cast<std::size_t>(std::popcount(r[k]));
  }
  return out;
}

template <RoutingAlgebra A>
std::vector<weight_t<A>> enumerated_carrier(const A& alg) {
  if constexpr (EnumerableAlgebra<A>) {
    if (alg.enumerable()) return alg.weights();
  }
  throw error(errc::not_enumerable, "the carrier is not enumerable; cap the algebra or restrict it to a finite domain");
}

template <RoutingAlgebra A>
std::string render_assignments(const A& alg, const std::vector<Assignment<weight_t<A>>>& as) {
  std::string out;
  for (const auto& a : as) {
    if (!out.empty()) out += " -> ";
    out += "(" + std::to_string(a.router) + "," + alg.render(a.weight) + ")";
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Freeness

template <RoutingAlgebra A>
AssignmentDigraph<weight_t<A>> threatens_digraph(const A& alg, const AdjacencyMatrix<A>& M,
                                                 std::vector<weight_t<A>> weights) {
  std::erase(weights, alg.invalid());
  auto g = detail::blank_digraph(M.size(), std::move(weights));
  const std::size_t m = g.weights.size();
  for (NodeId j = 0; j < g.n; ++j) {
    for (std::size_t ky = 0; ky < m; ++ky) {
      for (NodeId i = 0; i < g.n; ++i) {
        const auto z = alg.extend(i, j, M(i, j), g.weights[ky]);
        for (std::size_t kx = 0; kx < m; ++kx) {
          if (leq(alg, z, g.weights[kx])) g.arcs.push_back({g.id(j, ky), g.id(i, kx), relation::threatens});
        }
      }
    }
  }
  return g;
}

template <class W>
struct FreeReport {
  bool free = true;
  std::size_t assignments = 0;
  std::size_t threats = 0;
  /// Each assignment threatens the next, and the last threatens the first.
  std::vector<Assignment<W>> cycle;
};

/// Free iff no cycle of non-invalid assignments each threatening the next.
template <RoutingAlgebra A>
FreeReport<weight_t<A>> is_free(const A& alg, const AdjacencyMatrix<A>& M) {
  const auto g = threatens_digraph(alg, M, detail::enumerated_carrier(alg));
  FreeReport<weight_t<A>> report;
  report.assignments = g.vertex_count();
  report.threats = g.arcs.size();
  if (auto cycle = detail::find_cycle(g.successors())) {
    report.free = false;
    for (std::size_t v : *cycle) report.cycle.push_back(g.vertex(v));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Dislodgement order and heights

/// Edges ⇝ ∪ ≺⊕ over V × `weights`. Extensions that leave `weights` are
/// reported as an error because the heights would then be undefined.
template <RoutingAlgebra A>
AssignmentDigraph<weight_t<A>> dislodgement_digraph(const A& alg, const AdjacencyMatrix<A>& M,
                                                    std::vector<weight_t<A>> weights) {
  auto g = detail::blank_digraph(M.size(), std::move(weights));
  const std::size_t m = g.weights.size();
  for (NodeId j = 0; j < g.n; ++j) {
    for (std::size_t ky = 0; ky < m; ++ky) {
      if (g.weights[ky] == alg.invalid()) continue;
      for (NodeId i = 0; i < g.n; ++i) {
        const auto x = alg.extend(i, j, M(i, j), g.weights[ky]);
        auto it = g.index.find(x);
        if (it == g.index.end()) {
          throw error(errc::not_enumerable, "extension of " + alg.render(g.weights[ky]) + " across (" +
                                                std::to_string(i) + "," + std::to_string(j) + ") gives " +
                                                alg.render(x) + ", outside the analysed set");
        }
        g.arcs.push_back({g.id(j, ky), g.id(i, it->second), relation::extends});
      }
    }
  }
  for (NodeId i = 0; i < g.n; ++i)
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = 0; b < m; ++b)
        if (a != b && lt(alg, g.weights[a], g.weights[b]))
          g.arcs.push_back({g.id(i, a), g.id(i, b), relation::strictly_prefers});
  return g;
}

template <class W>
struct Heights {
  AssignmentDigraph<W> graph;
  std::vector<std::size_t> h;
  std::size_t max_height = 0;

  [[nodiscard]] std::optional<std::size_t> at(NodeId i, const W& x) const {
    auto v = graph.find(i, x);
    if (!v) return std::nullopt;
    return h[*v];
  }
};

template <RoutingAlgebra A>
Heights<weight_t<A>> heights_over(const A& alg, const AdjacencyMatrix<A>& M, std::vector<weight_t<A>> weights) {
  Heights<weight_t<A>> out{dislodgement_digraph(alg, M, std::move(weights)), {}, 0};
  const auto succ = out.graph.successors();
  if (auto cycle = detail::find_cycle(succ)) {
    std::vector<Assignment<weight_t<A>>> as;
    for (std::size_t v : *cycle) as.push_back(out.graph.vertex(v));
    throw error(errc::not_free, "the dislodgement digraph has a cycle " + detail::render_assignments(alg, as));
  }
  out.h = detail::reach_counts(succ);
  if (!out.h.empty()) out.max_height = *std::max_element(out.h.begin(), out.h.end());
  return out;
}

/// h(a) = number of assignments a can dislodge, over the whole carrier.
template <RoutingAlgebra A>
Heights<weight_t<A>> dislodgement_height(const A& alg, const AdjacencyMatrix<A>& M) {
  return heights_over(alg, M, detail::enumerated_carrier(alg));
}

// ---------------------------------------------------------------------------
// Consistency

template <PathAlgebra A>
weight_t<A> weight_of_path(const A& alg, const AdjacencyMatrix<A>& M, const SimplePath& p) {
  if (!p.is_valid()) return alg.invalid();
  const auto& v = p.nodes();
  weight_t<A> w = alg.trivial();
  for (std::size_t k = v.size(); k-- > 1;) w = alg.extend(v[k - 1], v[k], M(v[k - 1], v[k]), w);
  return w;
}

template <PathAlgebra A>
bool is_consistent(const A& alg, const AdjacencyMatrix<A>& M, const weight_t<A>& x) {
  return weight_of_path(alg, M, alg.path(x)) == x;
}

/// C^A: the weights of every simple path over the instance, plus ∞̄.
template <PathAlgebra A>
std::vector<weight_t<A>> consistent_weights(const A& alg, const AdjacencyMatrix<A>& M) {
  std::vector<weight_t<A>> out{alg.invalid()};
  std::unordered_set<weight_t<A>, weight_hasher<weight_t<A>>> seen{alg.invalid()};
  for (const auto& p : all_simple_paths(M.size())) {
    auto w = weight_of_path(alg, M, p);
    if (seen.insert(w).second) out.push_back(std::move(w));
  }
  return out;
}

/// Length of the shortest path among inconsistent entries of X, if any.
template <PathAlgebra A>
std::optional<std::size_t> min_inconsistent_length(const A& alg, const AdjacencyMatrix<A>& M,
                                                   const RoutingState<A>& X) {
  std::optional<std::size_t> best;
  for (NodeId i = 0; i < X.size(); ++i)
    for (NodeId j = 0; j < X.size(); ++j)
      if (!is_consistent(alg, M, X(i, j))) {
        const std::size_t len = alg.path(X(i, j)).length();
        if (!best || len < *best) best = len;
      }
  return best;
}

// ---------------------------------------------------------------------------
// Dissimilarity functions

/// r_i, d_i and D for one configuration. In path-vector mode the heights only
/// cover the consistent weights and inconsistent ones are scored by path length.
template <RoutingAlgebra A>
class DissimilarityOracle {
 public:
  using W = weight_t<A>;

  DissimilarityOracle(A alg, AdjacencyMatrix<A> M, NodeSet p, Heights<W> heights, bool path_vector)
      : alg_(std::move(alg)), M_(std::move(M)), p_(std::move(p)), heights_(std::move(heights)),
        path_vector_(path_vector) {}

  [[nodiscard]] bool path_vector() const noexcept { return path_vector_; }
  [[nodiscard]] const Heights<W>& heights() const noexcept { return heights_; }
  [[nodiscard]] const NodeSet& participants() const noexcept { return p_; }
  [[nodiscard]] std::size_t n() const noexcept { return M_.size(); }

  /// H for distance-vector, H_C for path-vector.
  [[nodiscard]] std::size_t max_height() const noexcept { return heights_.max_height; }
  [[nodiscard]] std::size_t max_inconsistent_height() const noexcept { return n() + 1; }

  [[nodiscard]] bool consistent(const W& x) const {
    return !path_vector_ || heights_.graph.index.contains(x);
  }

  [[nodiscard]] std::size_t h(NodeId i, const W& x) const {
    auto v = heights_.at(i, x);
    if (!v) throw error(errc::not_enumerable, alg_.render(x) + " has no height in this configuration");
    return *v;
  }

  [[nodiscard]] std::size_t h_inconsistent(const W& x) const {
    if (consistent(x)) return 0;
    if constexpr (PathAlgebra<A>) {
      return 1 + (n() - alg_.path(x).length());
    }
    return 0;
  }

  [[nodiscard]] std::size_t r(NodeId i, const W& x, const W& y) const {
    if (x == y) return 0;
    if (consistent(x) && consistent(y)) return 1 + std::max(h(i, x), h(i, y));
    return 1 + max_height() + std::max(h_inconsistent(x), h_inconsistent(y));
  }

  [[nodiscard]] std::size_t d(NodeId i, std::span<const W> x, std::span<const W> y) const {
    std::size_t out = 0;
    for (std::size_t j = 0; j < x.size(); ++j) out = std::max(out, r(i, x[j], y[j]));
    return out;
  }

  [[nodiscard]] std::size_t D(const RoutingState<A>& X, const RoutingState<A>& Y) const {
    std::size_t out = 0;
    for (NodeId i : p_.members()) out = std::max(out, d(i, X.row(i), Y.row(i)));
    return out;
  }

  /// Largest value r_i can take.
  [[nodiscard]] std::size_t bound() const noexcept {
    return path_vector_ ? 1 + max_height() + max_inconsistent_height() : 1 + max_height();
  }

 private:
  A alg_;
  AdjacencyMatrix<A> M_;
  NodeSet p_;
  Heights<W> heights_;
  bool path_vector_;
};

template <RoutingAlgebra A>
DissimilarityOracle<A> dv_dissimilarity(const A& alg, const AdjacencyMatrix<A>& M, std::optional<NodeSet> p = {}) {
  auto heights = dislodgement_height(alg, M);
  return DissimilarityOracle<A>(alg, M, p.value_or(NodeSet::all(M.size())), std::move(heights), false);
}

template <PathAlgebra A>
DissimilarityOracle<A> pv_dissimilarity(const A& alg, const AdjacencyMatrix<A>& M, std::optional<NodeSet> p = {}) {
  auto heights = heights_over(alg, M, consistent_weights(alg, M));
  return DissimilarityOracle<A>(alg, M, p.value_or(NodeSet::all(M.size())), std::move(heights), true);
}

// ---------------------------------------------------------------------------
// AMCO conditions

struct AmcoReport {
  /// False when no dissimilarity could be built, e.g. a non-free topology.
  bool established = false;
  std::string reason;
  std::string dissimilarity;
  std::size_t bound = 0;
  std::size_t max_height = 0;
  std::optional<std::string> fixed_point;
  Report conditions;
};

namespace detail {

template <RoutingAlgebra A>
std::string render_state_inline(const A& alg, const RoutingState<A>& X) {
  std::string out = "[";
  for (NodeId i = 0; i < X.size(); ++i) {
    out += i ? ",[" : "[";
    for (NodeId j = 0; j < X.size(); ++j) out += (j ? "," : "") + alg.render(X(i, j));
    out += "]";
  }
  return out + "]";
}

/// Calls `visit` on every state whose participating rows range over `pool`
/// and whose other rows are the identity; stops early when visit returns false.
template <RoutingAlgebra A, class Visit>
void for_each_accordant(const A& alg, std::size_t n, const NodeSet& p, const std::vector<weight_t<A>>& pool,
                        Visit&& visit) {
  std::vector<std::pair<NodeId, NodeId>> cells;
  for (NodeId i : p.members())
    for (NodeId j = 0; j < n; ++j) cells.push_back({i, j});
  double total = 1;
  for (std::size_t k = 0; k < cells.size(); ++k) total *= static_cast<double>(pool.size());
  if (total > 2e6) {
    throw error(errc::too_large, "exhaustive AMCO check would visit " + std::to_string(static_cast<std::uint64_t>(total)) +
                                     " states; use sampled mode");
  }
  RoutingState<A> X = identity_state(alg, n);
  std::vector<std::size_t> digit(cells.size(), 0);
  for (std::size_t k = 0; k < cells.size(); ++k) X(cells[k].first, cells[k].second) = pool[0];
  while (true) {
    if (!visit(X)) return;
    std::size_t k = 0;
    for (; k < cells.size(); ++k) {
      if (++digit[k] < pool.size()) {
        X(cells[k].first, cells[k].second) = pool[digit[k]];
        break;
      }
      digit[k] = 0;
      X(cells[k].first, cells[k].second) = pool[0];
    }
    if (k == cells.size()) return;
  }
}

}  // namespace detail

/// Checks D1-D5 for F over A^{ep}. Path algebras use the consistent/inconsistent
/// construction; other algebras use the heights over the full carrier.
template <RoutingAlgebra A>
AmcoReport check_amco(const A& alg, const NetworkOverEpochs<A>& N, std::size_t e, const NodeSet& p,
                      const check_mode& mode) {
  using W = weight_t<A>;
  const bool sampled = std::holds_alternative<sampled_mode>(mode);
  const AdjacencyMatrix<A> M = participating_topology(alg, N, e, p);
  const std::size_t n = M.size();

  AmcoReport out;
  out.conditions.mode = sampled ? "sampled" : "exhaustive";
  if (sampled) out.conditions.seed = std::get<sampled_mode>(mode).seed;

  std::optional<DissimilarityOracle<A>> oracle;
  try {
    if constexpr (PathAlgebra<A>) {
      oracle.emplace(pv_dissimilarity(alg, M, p));
      out.dissimilarity = "path-vector";
    } else {
      oracle.emplace(dv_dissimilarity(alg, M, p));
      out.dissimilarity = "distance-vector";
    }
  } catch (const error& err) {
    if (err.code() != errc::not_free) throw;
    out.reason = err.what();
    for (const char* name : {"D1", "D2", "D3", "D4", "D5"}) out.conditions.entries.emplace_back(name, PropertyStatus{});
    return out;
  }
  out.established = true;
  out.bound = oracle->bound();
  out.max_height = oracle->max_height();

  // Pool of entry values for exhaustive enumeration and sampling.
  std::vector<W> pool;
  std::vector<W> consistent;
  if (!sampled) pool = detail::enumerated_carrier(alg);
  if constexpr (PathAlgebra<A>) consistent = consistent_weights(alg, M);
  else if constexpr (EnumerableAlgebra<A>) {
    if (alg.enumerable()) consistent = alg.weights();
  }
  rng_type rng(sampled ? std::get<sampled_mode>(mode).seed : 0);
  const std::size_t cases = sampled ? std::get<sampled_mode>(mode).cases : 0;
  auto draw = [&]() -> W {
    if (!consistent.empty() && coin(rng, 0.5)) return consistent[uniform_index(rng, consistent.size())];
    return detail::draw_weight(alg, rng);
  };
  auto random_state = [&](bool accordant) {
    RoutingState<A> X = identity_state(alg, n);
    for (NodeId i = 0; i < n; ++i)
      if (!accordant || p.contains(i))
        for (NodeId j = 0; j < n; ++j) X(i, j) = draw();
    return X;
  };
  auto is_accordant = [&](const RoutingState<A>& X) {
    const auto I = identity_state(alg, n);
    for (NodeId i = 0; i < n; ++i)
      if (!p.contains(i) && !std::ranges::equal(X.row(i), I.row(i))) return false;
    return true;
  };
  auto state_text = [&](const RoutingState<A>& X) { return detail::render_state_inline(alg, X); };

  detail::law_tracker d1(sampled), d2(sampled), d3(sampled), d4(sampled), d5(sampled);
  const std::vector<NodeId> members = p.members();

  auto pair_laws = [&](const W& x, const W& y) {
    for (NodeId i : members) {
      const std::size_t v = oracle->r(i, x, y);
      if (d1.open()) {
        if ((v == 0) == (x == y)) d1.pass();
        else d1.fail(detail::make_witness(alg, {x, y}, "r_" + std::to_string(i) + " = " + std::to_string(v)));
      }
      if (d2.open()) {
        if (v <= out.bound) d2.pass();
        else d2.fail(detail::make_witness(alg, {x, y}, "r_" + std::to_string(i) + " = " + std::to_string(v) +
                                                           " exceeds " + std::to_string(out.bound)));
      }
    }
  };

  std::optional<RoutingState<A>> fixed;
  {
    const std::size_t budget = [&] {
      if constexpr (EnumerableAlgebra<A>) {
        if (alg.enumerable()) return default_max_t(alg, n);
      }
      return 10 * n * n + 10;
    }();
    const auto outcome = run_synchronous(alg, M, identity_state(alg, n), budget);
    if (const auto* c = std::get_if<Converged<W>>(&outcome)) {
      fixed = c->state;
      out.fixed_point = state_text(c->state);
    }
  }

  auto orbit_laws = [&](const RoutingState<A>& X) {
    const auto FX = step(alg, M, X);
    if (d3.open() && !(FX == X)) {
      const auto FFX = step(alg, M, FX);
      const std::size_t before = oracle->D(X, FX);
      const std::size_t after = oracle->D(FX, FFX);
      if (before > after) d3.pass();
      else {
        Witness w;
        w.detail = "X=" + state_text(X) + " D(X,FX)=" + std::to_string(before) + " D(FX,FFX)=" + std::to_string(after);
        d3.fail(std::move(w));
      }
    }
    if (fixed && d4.open() && !(X == *fixed)) {
      const std::size_t before = oracle->D(*fixed, X);
      const std::size_t after = oracle->D(*fixed, FX);
      if (before > after) d4.pass();
      else {
        Witness w;
        w.detail = "X=" + state_text(X) + " D(X*,X)=" + std::to_string(before) + " D(X*,FX)=" + std::to_string(after);
        d4.fail(std::move(w));
      }
    }
    return d3.open() || d4.open();
  };

  auto accordancy_law = [&](const RoutingState<A>& X) {
    if (is_accordant(step(alg, M, X))) d5.pass();
    else {
      Witness w;
      w.detail = "X=" + state_text(X);
      d5.fail(std::move(w));
    }
    return d5.open();
  };

  if (sampled) {
    for (std::size_t c = 0; c < cases; ++c) {
      const W x = draw();
      pair_laws(x, coin(rng, 0.25) ? x : draw());
      orbit_laws(random_state(true));
      if (d5.open()) accordancy_law(random_state(false));
    }
  } else {
    for (const auto& x : pool)
      for (const auto& y : pool) pair_laws(x, y);
    detail::for_each_accordant(alg, n, p, pool, orbit_laws);
    detail::for_each_accordant(alg, n, NodeSet::all(n), pool, accordancy_law);
  }

  auto& entries = out.conditions.entries;
  entries.emplace_back("D1", d1.finish());
  entries.emplace_back("D2", d2.finish());
  entries.emplace_back("D3", d3.finish());
  auto d4s = d4.finish();
  if (!fixed) d4s = PropertyStatus{status::not_applicable, 0, std::nullopt};
  entries.emplace_back("D4", d4s);
  entries.emplace_back("D5", d5.finish());
  return out;
}

}  // namespace dbf
