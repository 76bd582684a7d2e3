#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "dbf/algebra.hpp"
#include "dbf/error.hpp"
#include "dbf/hash.hpp"

namespace dbf {

/// Dense row-major n×n grid.
template <class T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t n, const T& fill) : n_(n), data_(n * n, fill) {}

  [[nodiscard]] std::size_t size() const noexcept { return n_; }

  T& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }

  [[nodiscard]] std::span<const T> row(std::size_t i) const { return {data_.data() + i * n_, n_}; }

  void set_row(std::size_t i, std::span<const T> values) {
    std::copy(values.begin(), values.end(), data_.begin() + static_cast<std::ptrdiff_t>(i * n_));
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<T> data_;
};

template <RoutingAlgebra A>
using RoutingState = Matrix<weight_t<A>>;
template <RoutingAlgebra A>
using AdjacencyMatrix = Matrix<policy_t<A>>;

template <class W>
std::size_t state_hash(const Matrix<W>& X) {
  std::size_t seed = X.size();
  for (std::size_t i = 0; i < X.size(); ++i)
    for (std::size_t j = 0; j < X.size(); ++j) hash_combine(seed, hash_value(X(i, j)));
  return seed;
}

template <RoutingAlgebra A>
RoutingState<A> identity_state(const A& alg, std::size_t n) {
  RoutingState<A> I(n, alg.invalid());
  for (std::size_t i = 0; i < n; ++i) I(i, i) = alg.trivial();
  return I;
}

/// The matrix with f∞ on every link.
template <RoutingAlgebra A>
AdjacencyMatrix<A> empty_topology(const A& alg, std::size_t n) {
  AdjacencyMatrix<A> M(n, alg.invalid_policy(0, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) M(i, j) = alg.invalid_policy(i, j);
  return M;
}

namespace detail {
inline void require_same_size(std::size_t a, std::size_t b) {
  if (a != b) throw error(errc::dimension_mismatch, std::to_string(a) + "×" + std::to_string(a) + " vs " +
                                                        std::to_string(b) + "×" + std::to_string(b));
}
}  // namespace detail

template <RoutingAlgebra A>
RoutingState<A> state_choice(const A& alg, const RoutingState<A>& X, const RoutingState<A>& Y) {
  detail::require_same_size(X.size(), Y.size());
  RoutingState<A> out = X;
  for (std::size_t i = 0; i < X.size(); ++i)
    for (std::size_t j = 0; j < X.size(); ++j) out(i, j) = alg.choose(X(i, j), Y(i, j));
  return out;
}

/// ⊕ over k of A_ik(rows(k)[j]), folded left in ascending k.
template <RoutingAlgebra A, class RowOf>
weight_t<A> fold_entry(const A& alg, const AdjacencyMatrix<A>& M, std::size_t i, std::size_t j, RowOf&& rows) {
  weight_t<A> acc = alg.extend(i, 0, M(i, 0), rows(0)[j]);
  for (std::size_t k = 1; k < M.size(); ++k) acc = alg.choose(acc, alg.extend(i, k, M(i, k), rows(k)[j]));
  return acc;
}

template <RoutingAlgebra A>
RoutingState<A> apply_topology(const A& alg, const AdjacencyMatrix<A>& M, const RoutingState<A>& X) {
  detail::require_same_size(M.size(), X.size());
  const std::size_t n = X.size();
  RoutingState<A> out(n, alg.invalid());
  auto rows = [&](std::size_t k) { return X.row(k); };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out(i, j) = fold_entry(alg, M, i, j, rows);
  return out;
}

/// Row i of F_A applied to the matrix whose row k is `rows(k)`.
template <RoutingAlgebra A, class RowOf>
std::vector<weight_t<A>> step_row(const A& alg, const AdjacencyMatrix<A>& M, std::size_t i, RowOf&& rows) {
  const std::size_t n = M.size();
  std::vector<weight_t<A>> out;
  out.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    const weight_t<A> id = i == j ? alg.trivial() : alg.invalid();
    out.push_back(alg.choose(fold_entry(alg, M, i, j, rows), id));
  }
  return out;
}

/// F_A(X) = A(X) ⊕ I.
template <RoutingAlgebra A>
RoutingState<A> step(const A& alg, const AdjacencyMatrix<A>& M, const RoutingState<A>& X) {
  detail::require_same_size(M.size(), X.size());
  const std::size_t n = X.size();
  RoutingState<A> out(n, alg.invalid());
  auto rows = [&](std::size_t k) { return X.row(k); };
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = step_row(alg, M, i, rows);
    out.set_row(i, r);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Synchronous iteration

template <class W>
struct Converged {
  Matrix<W> state;
  std::size_t time = 0;
};

template <class W>
struct Oscillating {
  std::size_t period = 0;
  std::size_t entry_time = 0;  // first time the recurring state was seen
  Matrix<W> state;
};

template <class W>
struct Exhausted {
  std::size_t max_t = 0;
  Matrix<W> last;
};

template <class W>
using SyncOutcome = std::variant<Converged<W>, Oscillating<W>, Exhausted<W>>;

/// A crude safe bound on the synchronous iteration count for finite algebras.
template <EnumerableAlgebra A>
std::size_t default_max_t(const A& alg, std::size_t n) {
  return std::max<std::size_t>(1, alg.weights().size() * n * n);
}

/// Iterates σ^{t+1} = F_A(σ^t) until a fixed point, a recurrence, or max_t.
/// The orbit is deterministic, so the first repeated state proves a cycle.
template <RoutingAlgebra A>
SyncOutcome<weight_t<A>> run_synchronous(const A& alg, const AdjacencyMatrix<A>& M, const RoutingState<A>& X0,
                                         std::size_t max_t, std::vector<RoutingState<A>>* history = nullptr) {
  using W = weight_t<A>;
  detail::require_same_size(M.size(), X0.size());
  std::vector<RoutingState<A>> seen{X0};
  std::unordered_multimap<std::size_t, std::size_t> by_hash{{state_hash(X0), 0}};
  SyncOutcome<W> result = Exhausted<W>{max_t, X0};
  for (std::size_t t = 0;; ++t) {
    RoutingState<A> next = step(alg, M, seen[t]);
    if (next == seen[t]) {
      result = Converged<W>{seen[t], t};
      break;
    }
    if (t + 1 > max_t) {
      result = Exhausted<W>{max_t, seen[t]};
      break;
    }
    const std::size_t h = state_hash(next);
    std::optional<std::size_t> earlier;
    auto [lo, hi] = by_hash.equal_range(h);
    for (auto it = lo; it != hi; ++it) {
      if (seen[it->second] == next) earlier = it->second;
    }
    if (earlier) {
      result = Oscillating<W>{t + 1 - *earlier, *earlier, next};
      seen.push_back(std::move(next));
      break;
    }
    by_hash.emplace(h, t + 1);
    seen.push_back(std::move(next));
  }
  if (history) *history = std::move(seen);
  return result;
}

// ---------------------------------------------------------------------------
// Text forms

template <RoutingAlgebra A>
std::vector<std::vector<std::string>> render_state(const A& alg, const RoutingState<A>& X) {
  std::vector<std::vector<std::string>> grid(X.size());
  for (std::size_t i = 0; i < X.size(); ++i)
    for (std::size_t j = 0; j < X.size(); ++j) grid[i].push_back(alg.render(X(i, j)));
  return grid;
}

template <RoutingAlgebra A>
RoutingState<A> parse_state(const A& alg, const std::vector<std::vector<std::string>>& grid) {
  const std::size_t n = grid.size();
  RoutingState<A> X(n, alg.invalid());
  for (std::size_t i = 0; i < n; ++i) {
    if (grid[i].size() != n) throw error(errc::dimension_mismatch, "state row " + std::to_string(i) + " has the wrong length");
    for (std::size_t j = 0; j < n; ++j) X(i, j) = alg.parse_weight(grid[i][j]);
  }
  return X;
}

template <RoutingAlgebra A>
std::vector<std::vector<std::string>> render_topology(const A& alg, const AdjacencyMatrix<A>& M) {
  std::vector<std::vector<std::string>> grid(M.size());
  for (std::size_t i = 0; i < M.size(); ++i)
    for (std::size_t j = 0; j < M.size(); ++j) grid[i].push_back(alg.policy_name(M(i, j)));
  return grid;
}

template <RoutingAlgebra A>
AdjacencyMatrix<A> parse_topology(const A& alg, const std::vector<std::vector<std::string>>& grid) {
  const std::size_t n = grid.size();
  AdjacencyMatrix<A> M = empty_topology(alg, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (grid[i].size() != n) throw error(errc::dimension_mismatch, "topology row " + std::to_string(i) + " has the wrong length");
    for (std::size_t j = 0; j < n; ++j) M(i, j) = alg.parse_policy(i, j, grid[i][j]);
  }
  return M;
}

}  // namespace dbf
