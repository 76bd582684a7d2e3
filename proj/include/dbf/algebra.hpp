#pragma once

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "dbf/error.hpp"
#include "dbf/rng.hpp"
#include "dbf/topology.hpp"

namespace dbf {

template <class A>
using weight_t = typename A::weight_type;
template <class A>
using policy_t = typename A::policy_type;

/// A raw routing algebra (S, ⊕, E, 0̄, ∞̄, f∞).
///
/// Policies are plain values resolved through the algebra, so adjacency
/// matrices stay serializable. `node_count()` bounds the edges over which
/// policy catalogs may differ; edge-independent algebras report 1.
template <class A>
concept RoutingAlgebra =
    std::regular<weight_t<A>> && std::totally_ordered<weight_t<A>> &&
    std::equality_comparable<policy_t<A>> && std::copyable<policy_t<A>> &&
    requires(const A& a, const weight_t<A>& x, const policy_t<A>& f, NodeId i,
             std::string_view text, rng_type& rng) {
      { a.choose(x, x) } -> std::same_as<weight_t<A>>;
      { a.extend(i, i, f, x) } -> std::same_as<weight_t<A>>;
      { a.trivial() } -> std::same_as<weight_t<A>>;
      { a.invalid() } -> std::same_as<weight_t<A>>;
      { a.invalid_policy(i, i) } -> std::same_as<policy_t<A>>;
      { a.node_count() } -> std::convertible_to<std::size_t>;
      { a.render(x) } -> std::convertible_to<std::string>;
      { a.parse_weight(text) } -> std::same_as<weight_t<A>>;
      { a.policy_name(f) } -> std::convertible_to<std::string>;
      { a.parse_policy(i, i, text) } -> std::same_as<policy_t<A>>;
      { a.sample_weight(rng) } -> std::same_as<weight_t<A>>;
      { a.sample_policy(i, i, rng) } -> std::same_as<policy_t<A>>;
      { hash_value(x) } -> std::convertible_to<std::size_t>;
    };

/// An algebra that may expose its carrier and catalogs as finite lists.
/// `enumerable()` is a runtime answer: an uncapped instance of the same type
/// reports false and its `weights()` throws NotEnumerable.
template <class A>
concept EnumerableAlgebra = RoutingAlgebra<A> && requires(const A& a, NodeId i) {
  { a.enumerable() } -> std::convertible_to<bool>;
  { a.weights() } -> std::same_as<std::vector<weight_t<A>>>;
  { a.policies(i, i) } -> std::same_as<std::vector<policy_t<A>>>;
};

/// A routing algebra equipped with path extraction.
template <class A>
concept PathAlgebra = RoutingAlgebra<A> && requires(const A& a, const weight_t<A>& x) {
  { a.path(x) } -> std::same_as<SimplePath>;
};

template <RoutingAlgebra A>
bool leq(const A& alg, const weight_t<A>& x, const weight_t<A>& y) {
  return alg.choose(x, y) == x;
}

template <RoutingAlgebra A>
bool lt(const A& alg, const weight_t<A>& x, const weight_t<A>& y) {
  return x != y && leq(alg, x, y);
}

template <class W>
struct weight_hasher {
  std::size_t operator()(const W& w) const { return hash_value(w); }
};

// ---------------------------------------------------------------------------
// Reports

struct exhaustive_mode {};
struct sampled_mode {
  std::uint64_t seed = 0;
  std::size_t cases = 10000;
};
using check_mode = std::variant<exhaustive_mode, sampled_mode>;

enum class status { holds, fails, sampled, not_applicable };

constexpr std::string_view to_string(status s) noexcept {
  switch (s) {
    case status::holds: return "holds";
    case status::fails: return "fails";
    case status::sampled: return "sampled";
    case status::not_applicable: return "not_applicable";
  }
  return "unknown";
}

/// Concrete values that reproduce a failure when fed back through the algebra.
struct Witness {
  std::vector<std::string> weights;
  std::vector<std::string> policies;
  std::optional<Edge> edge;
  std::string detail;
};

struct PropertyStatus {
  status state = status::not_applicable;
  std::size_t cases = 0;
  std::optional<Witness> witness;

  [[nodiscard]] bool ok() const noexcept { return state == status::holds || state == status::sampled; }
  [[nodiscard]] bool failed() const noexcept { return state == status::fails; }
};

/// Named property statuses in a fixed reporting order.
struct Report {
  std::string mode;
  std::optional<std::uint64_t> seed;
  std::vector<std::pair<std::string, PropertyStatus>> entries;

  [[nodiscard]] const PropertyStatus& at(std::string_view name) const {
    for (const auto& [key, value] : entries) {
      if (key == name) return value;
    }
    throw std::out_of_range("no report entry named " + std::string(name));
  }
  PropertyStatus& at(std::string_view name) {
    return const_cast<PropertyStatus&>(std::as_const(*this).at(name));
  }
  [[nodiscard]] bool any_failed() const {
    return std::any_of(entries.begin(), entries.end(), [](const auto& e) { return e.second.failed(); });
  }
  void merge(const Report& other) {
    for (const auto& e : other.entries) entries.push_back(e);
  }
};

using AxiomReport = Report;

namespace detail {

/// Tracks one law while a checker walks its cases; the first counterexample
/// freezes the witness and later cases are skipped.
class law_tracker {
 public:
  explicit law_tracker(bool sampled) : sampled_(sampled) {}

  [[nodiscard]] bool open() const noexcept { return !witness_; }

  void pass() noexcept { ++cases_; }

  void fail(Witness w) {
    ++cases_;
    witness_ = std::move(w);
  }

  [[nodiscard]] PropertyStatus finish() const {
    PropertyStatus s;
    s.cases = cases_;
    s.witness = witness_;
    s.state = witness_ ? status::fails : (sampled_ ? status::sampled : status::holds);
    return s;
  }

 private:
  bool sampled_;
  std::size_t cases_ = 0;
  std::optional<Witness> witness_;
};

template <RoutingAlgebra A>
Witness make_witness(const A& alg, std::initializer_list<weight_t<A>> ws, std::string detail,
                     std::optional<Edge> edge = std::nullopt,
                     std::optional<policy_t<A>> f = std::nullopt) {
  Witness w;
  for (const auto& x : ws) w.weights.push_back(alg.render(x));
  if (f) w.policies.push_back(alg.policy_name(*f));
  w.edge = edge;
  w.detail = std::move(detail);
  return w;
}

/// Finite view of an enumerable algebra with the ⊕ table precomputed.
template <EnumerableAlgebra A>
struct finite_view {
  std::vector<weight_t<A>> values;
  std::unordered_map<weight_t<A>, std::size_t, weight_hasher<weight_t<A>>> index;
  std::vector<std::size_t> table;  // npos when ⊕ leaves the carrier
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  explicit finite_view(const A& alg) {
    if (!alg.enumerable()) throw error(errc::not_enumerable, "carrier is not enumerable; cap the algebra or use sampled mode");
    values = alg.weights();
    for (std::size_t k = 0; k < values.size(); ++k) index.emplace(values[k], k);
    const std::size_t m = values.size();
    table.assign(m * m, npos);
    for (std::size_t a = 0; a < m; ++a) {
      for (std::size_t b = 0; b < m; ++b) {
        auto it = index.find(alg.choose(values[a], values[b]));
        if (it != index.end()) table[a * m + b] = it->second;
      }
    }
  }

  [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
  [[nodiscard]] std::size_t at(std::size_t a, std::size_t b) const noexcept { return table[a * values.size() + b]; }
  [[nodiscard]] bool closed() const noexcept {
    return std::find(table.begin(), table.end(), npos) == table.end();
  }
};

template <class A>
std::vector<Edge> catalog_edges(const A& alg) {
  std::vector<Edge> out;
  const std::size_t n = alg.node_count();
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j = 0; j < n; ++j) out.push_back({i, j});
  }
  return out;
}

/// Sampled weights occasionally land on 0̄ or ∞̄ so the boundary laws see them.
template <RoutingAlgebra A>
weight_t<A> draw_weight(const A& alg, rng_type& rng) {
  const auto roll = uniform_index(rng, 16);
  if (roll == 0) return alg.trivial();
  if (roll == 1) return alg.invalid();
  return alg.sample_weight(rng);
}

template <RoutingAlgebra A>
Edge draw_edge(const A& alg, rng_type& rng) {
  const std::size_t n = std::max<std::size_t>(1, alg.node_count());
  return {uniform_index(rng, n), uniform_index(rng, n)};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// R1-R7

template <RoutingAlgebra A>
Report check_routing_axioms(const A& alg, const check_mode& mode) {
  using W = weight_t<A>;
  const bool sampled = std::holds_alternative<sampled_mode>(mode);
  std::vector<detail::law_tracker> law(7, detail::law_tracker(sampled));
  auto& r1 = law[0];
  auto& r2 = law[1];
  auto& r3 = law[2];
  auto& r4 = law[3];
  auto& r5 = law[4];
  auto& r6 = law[5];
  auto& r7 = law[6];
  const W zero = alg.trivial();
  const W inf = alg.invalid();

  auto pair_laws = [&](const W& x, const W& y) {
    const W xy = alg.choose(x, y);
    if (r1.open()) {
      if (xy == x || xy == y) r1.pass();
      else r1.fail(detail::make_witness(alg, {x, y, xy}, "x ⊕ y is neither x nor y"));
    }
    if (r3.open()) {
      const W yx = alg.choose(y, x);
      if (xy == yx) r3.pass();
      else r3.fail(detail::make_witness(alg, {x, y, xy, yx}, "x ⊕ y differs from y ⊕ x"));
    }
  };
  auto triple_law = [&](const W& x, const W& y, const W& z) {
    if (!r2.open()) return;
    const W left = alg.choose(alg.choose(x, y), z);
    const W right = alg.choose(x, alg.choose(y, z));
    if (left == right) r2.pass();
    else r2.fail(detail::make_witness(alg, {x, y, z, left, right}, "(x ⊕ y) ⊕ z differs from x ⊕ (y ⊕ z)"));
  };
  auto unit_laws = [&](const W& x) {
    if (r4.open()) {
      const W a = alg.choose(zero, x);
      const W b = alg.choose(x, zero);
      if (a == zero && b == zero) r4.pass();
      else r4.fail(detail::make_witness(alg, {x, a, b}, "0̄ does not annihilate x"));
    }
    if (r5.open()) {
      const W a = alg.choose(inf, x);
      const W b = alg.choose(x, inf);
      if (a == x && b == x) r5.pass();
      else r5.fail(detail::make_witness(alg, {x, a, b}, "∞̄ is not an identity for x"));
    }
  };
  auto policy_laws = [&](const Edge& e, const auto& f) {
    if (r6.open()) {
      const W fx = alg.extend(e.from, e.to, f, inf);
      if (fx == inf) r6.pass();
      else r6.fail(detail::make_witness(alg, {inf, fx}, "f(∞̄) is not ∞̄", e, std::optional(f)));
    }
  };
  auto reject_law = [&](const Edge& e, const W& x) {
    if (!r7.open()) return;
    const auto f = alg.invalid_policy(e.from, e.to);
    const W fx = alg.extend(e.from, e.to, f, x);
    if (fx == inf) r7.pass();
    else r7.fail(detail::make_witness(alg, {x, fx}, "f∞(x) is not ∞̄", e, std::optional(f)));
  };

  Report report;
  if (sampled) {
    const auto& sm = std::get<sampled_mode>(mode);
    report.mode = "sampled";
    report.seed = sm.seed;
    rng_type rng(sm.seed);
    for (std::size_t k = 0; k < sm.cases; ++k) {
      const W x = detail::draw_weight(alg, rng);
      const W y = detail::draw_weight(alg, rng);
      const W z = detail::draw_weight(alg, rng);
      const Edge e = detail::draw_edge(alg, rng);
      const auto f = alg.sample_policy(e.from, e.to, rng);
      pair_laws(x, y);
      triple_law(x, y, z);
      unit_laws(x);
      policy_laws(e, f);
      reject_law(e, x);
    }
  } else {
    if constexpr (EnumerableAlgebra<A>) {
      report.mode = "exhaustive";
      const detail::finite_view<A> view(alg);
      const auto& vs = view.values;
      const std::size_t m = view.size();
      for (std::size_t a = 0; a < m; ++a) {
        unit_laws(vs[a]);
        for (std::size_t b = 0; b < m; ++b) pair_laws(vs[a], vs[b]);
      }
      if (view.closed()) {
        for (std::size_t a = 0; a < m && r2.open(); ++a) {
          for (std::size_t b = 0; b < m && r2.open(); ++b) {
            const std::size_t ab = view.at(a, b);
            for (std::size_t c = 0; c < m; ++c) {
              if (view.at(ab, c) == view.at(a, view.at(b, c))) {
                r2.pass();
              } else {
                triple_law(vs[a], vs[b], vs[c]);
                break;
              }
            }
          }
        }
      } else {
        for (std::size_t a = 0; a < m && r2.open(); ++a)
          for (std::size_t b = 0; b < m && r2.open(); ++b)
            for (std::size_t c = 0; c < m && r2.open(); ++c) triple_law(vs[a], vs[b], vs[c]);
      }
      for (const Edge& e : detail::catalog_edges(alg)) {
        for (const auto& f : alg.policies(e.from, e.to)) policy_laws(e, f);
        for (const W& x : vs) reject_law(e, x);
      }
    } else {
      throw error(errc::not_enumerable, "exhaustive mode needs an enumerable algebra");
    }
  }

  const char* names[] = {"R1", "R2", "R3", "R4", "R5", "R6", "R7"};
  for (std::size_t k = 0; k < 7; ++k) report.entries.emplace_back(names[k], law[k].finish());
  return report;
}

// ---------------------------------------------------------------------------
// Distributive / increasing / strictly increasing

/// Strictly increasing is checked as "increasing, and x ≠ f(x) whenever
/// x ≠ ∞̄". On algebras satisfying R6 this is the usual definition; on
/// algebras that break R6 it keeps strict ⇒ non-strict true in every report.
template <RoutingAlgebra A>
Report check_properties(const A& alg, const check_mode& mode) {
  using W = weight_t<A>;
  const bool sampled = std::holds_alternative<sampled_mode>(mode);
  detail::law_tracker dist(sampled), incr(sampled), strict(sampled);
  const W inf = alg.invalid();

  auto single = [&](const Edge& e, const policy_t<A>& f, const W& x) {
    const W fx = alg.extend(e.from, e.to, f, x);
    const bool up = leq(alg, x, fx);
    if (incr.open()) {
      if (up) incr.pass();
      else incr.fail(detail::make_witness(alg, {x, fx}, "f(x) is preferred to x", e, std::optional(f)));
    }
    if (strict.open()) {
      if (up && (x == inf || x != fx)) strict.pass();
      else strict.fail(detail::make_witness(alg, {x, fx}, up ? "f(x) equals x" : "f(x) is preferred to x", e, std::optional(f)));
    }
  };
  auto pair = [&](const Edge& e, const policy_t<A>& f, const W& x, const W& y) {
    if (!dist.open()) return;
    const W lhs = alg.extend(e.from, e.to, f, alg.choose(x, y));
    const W rhs = alg.choose(alg.extend(e.from, e.to, f, x), alg.extend(e.from, e.to, f, y));
    if (lhs == rhs) dist.pass();
    else dist.fail(detail::make_witness(alg, {x, y, lhs, rhs}, "f(x ⊕ y) differs from f(x) ⊕ f(y)", e, std::optional(f)));
  };

  Report report;
  if (sampled) {
    const auto& sm = std::get<sampled_mode>(mode);
    report.mode = "sampled";
    report.seed = sm.seed;
    rng_type rng(sm.seed);
    for (std::size_t k = 0; k < sm.cases; ++k) {
      const Edge e = detail::draw_edge(alg, rng);
      const auto f = alg.sample_policy(e.from, e.to, rng);
      const W x = detail::draw_weight(alg, rng);
      const W y = detail::draw_weight(alg, rng);
      single(e, f, x);
      pair(e, f, x, y);
    }
  } else {
    if constexpr (EnumerableAlgebra<A>) {
      report.mode = "exhaustive";
      if (!alg.enumerable()) throw error(errc::not_enumerable, "carrier is not enumerable; cap the algebra or use sampled mode");
      const auto vs = alg.weights();
      for (const Edge& e : detail::catalog_edges(alg)) {
        for (const auto& f : alg.policies(e.from, e.to)) {
          for (const W& x : vs) single(e, f, x);
          if (!dist.open()) continue;
          for (const W& x : vs)
            for (const W& y : vs) pair(e, f, x, y);
        }
      }
    } else {
      throw error(errc::not_enumerable, "exhaustive mode needs an enumerable algebra");
    }
  }
  report.entries.emplace_back("distributive", dist.finish());
  report.entries.emplace_back("increasing", incr.finish());
  report.entries.emplace_back("strictly_increasing", strict.finish());
  return report;
}

// ---------------------------------------------------------------------------
// Restriction to a finite sub-domain

/// Presents a chosen finite subset of an algebra's carrier and catalogs as an
/// enumerable algebra. Operations still run on the underlying algebra, so
/// a closure failure shows up as an R1 counterexample or as an R2 fallback.
template <RoutingAlgebra A>
class restricted {
 public:
  using weight_type = weight_t<A>;
  using policy_type = policy_t<A>;

  restricted(A base, std::vector<weight_type> ws, std::vector<policy_type> fs)
      : base_(std::move(base)), weights_(std::move(ws)), policies_(std::move(fs)) {
    auto ensure = [&](const weight_type& w) {
      if (std::find(weights_.begin(), weights_.end(), w) == weights_.end()) weights_.push_back(w);
    };
    ensure(base_.trivial());
    ensure(base_.invalid());
  }

  [[nodiscard]] const A& base() const noexcept { return base_; }

  weight_type choose(const weight_type& x, const weight_type& y) const { return base_.choose(x, y); }
  weight_type extend(NodeId i, NodeId j, const policy_type& f, const weight_type& x) const {
    return base_.extend(i, j, f, x);
  }
  weight_type trivial() const { return base_.trivial(); }
  weight_type invalid() const { return base_.invalid(); }
  policy_type invalid_policy(NodeId i, NodeId j) const { return base_.invalid_policy(i, j); }
  std::size_t node_count() const { return base_.node_count(); }
  std::string render(const weight_type& x) const { return base_.render(x); }
  weight_type parse_weight(std::string_view s) const { return base_.parse_weight(s); }
  std::string policy_name(const policy_type& f) const { return base_.policy_name(f); }
  policy_type parse_policy(NodeId i, NodeId j, std::string_view s) const { return base_.parse_policy(i, j, s); }
  weight_type sample_weight(rng_type& rng) const { return weights_[uniform_index(rng, weights_.size())]; }
  policy_type sample_policy(NodeId i, NodeId j, rng_type& rng) const {
    auto fs = policies(i, j);
    return fs[uniform_index(rng, fs.size())];
  }

  bool enumerable() const { return true; }
  std::vector<weight_type> weights() const { return weights_; }
  std::vector<policy_type> policies(NodeId i, NodeId j) const {
    auto fs = policies_;
    const auto reject = base_.invalid_policy(i, j);
    if (std::find(fs.begin(), fs.end(), reject) == fs.end()) fs.push_back(reject);
    return fs;
  }

  SimplePath path(const weight_type& x) const
    requires PathAlgebra<A>
  {
    return base_.path(x);
  }

 private:
  A base_;
  std::vector<weight_type> weights_;
  std::vector<policy_type> policies_;
};

}  // namespace dbf
