#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "dbf/algebra.hpp"
#include "dbf/error.hpp"
#include "dbf/table1.hpp"
#include "dbf/topology.hpp"

namespace dbf {

using PathAlgebraReport = Report;

namespace detail {

template <PathAlgebra A>
void check_p3_case(const A& alg, const Edge& e, const policy_t<A>& f, const weight_t<A>& x, law_tracker& p3) {
  if (!p3.open()) return;
  const SimplePath px = alg.path(x);
  const weight_t<A> fx = alg.extend(e.from, e.to, f, x);
  const SimplePath pfx = alg.path(fx);
  std::string problem;
  if (!px.is_valid() || px.contains(e.from) || !px.aligned_with(e) || e.from == e.to) {
    if (pfx.is_valid()) problem = "extension across a looping or misaligned edge kept a path";
  } else if (fx != alg.invalid()) {
    // A policy may still filter the route; when it does not, the path must grow by exactly (i,j).
    if (pfx != px.prepend(e)) problem = "path(f(x)) is not (i,j) :: path(x)";
  }
  if (problem.empty()) {
    p3.pass();
  } else {
    Witness w = make_witness(alg, {x, fx}, problem + "; path(x) = " + to_string(px) + ", path(f(x)) = " + to_string(pfx), e, std::optional(f));
    p3.fail(std::move(w));
  }
}

}  // namespace detail

/// Checks P1-P3 over every edge of an n-router instance.
template <PathAlgebra A>
PathAlgebraReport check_path_axioms(const A& alg, std::size_t n, const check_mode& mode) {
  using W = weight_t<A>;
  const bool sampled = std::holds_alternative<sampled_mode>(mode);
  detail::law_tracker p1(sampled), p2(sampled), p3(sampled);
  const W inf = alg.invalid();
  const W zero = alg.trivial();

  auto single = [&](const W& x) {
    if (p1.open()) {
      const bool bottom = !alg.path(x).is_valid();
      if ((x == inf) == bottom) p1.pass();
      else p1.fail(detail::make_witness(alg, {x}, x == inf ? "path(∞̄) is not ⊥" : "a valid weight stores ⊥"));
    }
    if (p2.open()) {
      if (x != zero || alg.path(x).is_trivial()) p2.pass();
      else p2.fail(detail::make_witness(alg, {x}, "path(0̄) is " + to_string(alg.path(x))));
    }
  };

  PathAlgebraReport report;
  if (sampled) {
    const auto& sm = std::get<sampled_mode>(mode);
    report.mode = "sampled";
    report.seed = sm.seed;
    rng_type rng(sm.seed);
    const std::size_t m = std::max<std::size_t>(n, 1);
    for (std::size_t k = 0; k < sm.cases; ++k) {
      const W x = detail::draw_weight(alg, rng);
      single(x);
      const Edge e{uniform_index(rng, m), uniform_index(rng, m)};
      detail::check_p3_case(alg, e, alg.sample_policy(e.from, e.to, rng), x, p3);
    }
  } else {
    if constexpr (EnumerableAlgebra<A>) {
      report.mode = "exhaustive";
      if (!alg.enumerable()) throw error(errc::not_enumerable, "carrier is not enumerable; cap the algebra or use sampled mode");
      const auto vs = alg.weights();
      for (const W& x : vs) single(x);
      for (NodeId i = 0; i < n; ++i) {
        for (NodeId j = 0; j < n; ++j) {
          for (const auto& f : alg.policies(i, j)) {
            for (const W& x : vs) detail::check_p3_case(alg, Edge{i, j}, f, x, p3);
          }
        }
      }
    } else {
      throw error(errc::not_enumerable, "exhaustive mode needs an enumerable algebra");
    }
  }
  report.entries.emplace_back("P1", p1.finish());
  report.entries.emplace_back("P2", p2.finish());
  report.entries.emplace_back("P3", p3.finish());
  return report;
}

template <RoutingAlgebra A>
  requires(!PathAlgebra<A>)
PathAlgebraReport check_path_axioms(const A&, std::size_t, const check_mode&) {
  throw error(errc::no_path_function, "this algebra does not define a path function");
}

// ---------------------------------------------------------------------------
// Shortest-paths path-vector algebra

struct pv_weight {
  bool is_inf = false;
  std::uint64_t length = 0;
  SimplePath path;

  static pv_weight inf() { return {true, 0, SimplePath::invalid()}; }

  friend auto operator<=>(const pv_weight&, const pv_weight&) = default;
  friend bool operator==(const pv_weight&, const pv_weight&) = default;
  friend std::size_t hash_value(const pv_weight& w) {
    std::size_t seed = w.is_inf ? 7 : 11;
    hash_append(seed, w.length);
    hash_combine(seed, hash_value(w.path));
    return seed;
  }
};

struct pv_policy {
  bool reject = true;
  std::uint64_t length = 0;
  friend auto operator<=>(const pv_policy&, const pv_policy&) = default;
};

/// Weights pair a length with the path it was learnt along. ⊕ prefers the
/// shorter length and breaks ties by the origin-first lexicographic order of
/// the paths. Lengths above `cap` become ∞ so the carrier stays finite.
class ShortestPathsPv {
 public:
  using weight_type = pv_weight;
  using policy_type = pv_policy;

  ShortestPathsPv(std::size_t n, std::uint64_t cap) : n_(n), cap_(cap) {
    if (n_ == 0) throw error(errc::config_error, "shortest-pv needs at least one router");
  }

  [[nodiscard]] std::uint64_t cap() const noexcept { return cap_; }

  pv_weight choose(const pv_weight& x, const pv_weight& y) const {
    if (y.is_inf) return x;
    if (x.is_inf) return y;
    if (x.length < y.length) return x;
    if (y.length < x.length) return y;
    return x.path <= y.path ? x : y;
  }

  pv_weight extend(NodeId i, NodeId j, const pv_policy& f, const pv_weight& x) const {
    if (f.reject || x.is_inf) return pv_weight::inf();
    if (x.path.contains(i) || !x.path.aligned_with(Edge{i, j}) || i == j) return pv_weight::inf();
    const std::uint64_t m = x.length + f.length;
    if (m > cap_ || m < x.length) return pv_weight::inf();
    return {false, m, x.path.prepend(Edge{i, j})};
  }

  pv_weight trivial() const { return {false, 0, SimplePath::trivial()}; }
  pv_weight invalid() const { return pv_weight::inf(); }
  pv_policy invalid_policy(NodeId, NodeId) const { return {true, 0}; }
  std::size_t node_count() const { return n_; }

  SimplePath path(const pv_weight& x) const { return x.is_inf ? SimplePath::invalid() : x.path; }

  std::string render(const pv_weight& x) const {
    if (x.is_inf) return "inf";
    return std::to_string(x.length) + ":" + to_string(x.path);
  }

  pv_weight parse_weight(std::string_view s) const {
    if (s == "inf" || s == "∞") return pv_weight::inf();
    const auto colon = s.find(':');
    auto len = colon == std::string_view::npos ? std::nullopt : detail::parse_u64(s.substr(0, colon));
    if (!len || *len > cap_) throw error(errc::config_error, "'" + std::string(s) + "' is not a shortest-pv weight");
    SimplePath p = SimplePath::from_nodes(parse_node_sequence(s.substr(colon + 1)));
    for (NodeId v : p.nodes()) {
      if (v >= n_) throw error(errc::config_error, "path in '" + std::string(s) + "' leaves the instance");
    }
    return {false, *len, std::move(p)};
  }

  std::string policy_name(const pv_policy& f) const {
    return f.reject ? "reject" : "add:" + std::to_string(f.length);
  }

  pv_policy parse_policy(NodeId, NodeId, std::string_view s) const {
    if (s == "reject") return {true, 0};
    if (s.substr(0, 4) == "add:") {
      if (auto v = detail::parse_u64(s.substr(4)); v && *v <= cap_) return {false, *v};
    }
    throw error(errc::config_error, "unknown shortest-pv policy '" + std::string(s) + "'");
  }

  pv_weight sample_weight(rng_type& rng) const {
    std::vector<NodeId> order(n_);
    std::iota(order.begin(), order.end(), NodeId{0});
    std::shuffle(order.begin(), order.end(), rng);
    std::size_t k = uniform_index(rng, n_ + 1);
    if (k == 1) k = 0;
    order.resize(k);
    return {false, uniform_u64(rng, 0, cap_), SimplePath::from_nodes(std::move(order))};
  }

  pv_policy sample_policy(NodeId, NodeId, rng_type& rng) const {
    if (uniform_index(rng, 20) == 0) return {true, 0};
    return {false, uniform_u64(rng, 0, cap_)};
  }

  bool enumerable() const { return true; }

  /// Every (length, simple path) pair with length ≤ cap, plus ∞.
  std::vector<pv_weight> weights() const {
    const auto paths = all_simple_paths(n_);
    std::vector<pv_weight> out;
    out.reserve(paths.size() * (cap_ + 1) + 1);
    for (std::uint64_t m = 0; m <= cap_; ++m) {
      for (const auto& p : paths) out.push_back({false, m, p});
    }
    out.push_back(pv_weight::inf());
    return out;
  }

  std::vector<pv_policy> policies(NodeId, NodeId) const {
    std::vector<pv_policy> out;
    for (std::uint64_t l = 0; l <= cap_; ++l) out.push_back({false, l});
    out.push_back({true, 0});
    return out;
  }

 private:
  std::size_t n_;
  std::uint64_t cap_;
};

inline ShortestPathsPv make_shortest_paths_pv_algebra(std::size_t n, std::uint64_t cap) {
  return ShortestPathsPv(n, cap);
}

}  // namespace dbf
