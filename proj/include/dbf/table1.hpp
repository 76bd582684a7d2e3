#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dbf/algebra.hpp"
#include "dbf/error.hpp"
#include "dbf/rng.hpp"
#include "dbf/text.hpp"

namespace dbf {

/// Natural number with a distinguished infinity, shared by the numeric algebras.
struct nat_inf {
  static constexpr std::uint64_t inf_value = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t value = 0;

  static constexpr nat_inf inf() noexcept { return {inf_value}; }
  [[nodiscard]] constexpr bool is_inf() const noexcept { return value == inf_value; }

  friend constexpr auto operator<=>(const nat_inf&, const nat_inf&) = default;
  friend std::size_t hash_value(const nat_inf& x) noexcept { return std::hash<std::uint64_t>{}(x.value); }
};

enum class table1_kind { shortest, longest, widest, most_reliable };

inline std::string_view to_string(table1_kind k) noexcept {
  switch (k) {
    case table1_kind::shortest: return "shortest";
    case table1_kind::longest: return "longest";
    case table1_kind::widest: return "widest";
    case table1_kind::most_reliable: return "most-reliable";
  }
  return "shortest";
}

inline table1_kind parse_table1_kind(std::string_view s) {
  if (s == "shortest") return table1_kind::shortest;
  if (s == "longest") return table1_kind::longest;
  if (s == "widest") return table1_kind::widest;
  if (s == "most-reliable") return table1_kind::most_reliable;
  throw error(errc::config_error, "unknown algebra kind '" + std::string(s) + "'");
}

/// f⁺_w, f^min_w, f^×_w, or the constantly-invalid reject.
struct table1_policy {
  enum class op : std::uint8_t { add, min, mul, reject };
  op kind = op::reject;
  std::uint64_t w = 0;

  friend constexpr auto operator<=>(const table1_policy&, const table1_policy&) = default;
};

/// The four numeric algebras, over a finite capped carrier.
///
/// shortest      {0..cap, ∞}  min  f⁺_w, sums above cap become ∞
/// longest       {0..cap, ∞}  max  f⁺_w, sums saturate at cap, f(0) = 0
/// widest        {0..cap, ∞}  max  f^min_w
/// most-reliable {0/cap..cap/cap}  max  f^×_w, products round down to the grid
///
/// Without a cap the carrier is unbounded: the algebra still simulates but
/// only admits sampled checks. `min_weight` trims small policy weights from
/// the catalogs, e.g. min_weight 1 makes shortest paths strictly increasing.
class Table1Algebra {
 public:
  using weight_type = nat_inf;
  using policy_type = table1_policy;
  using op = table1_policy::op;

  Table1Algebra(table1_kind kind, std::optional<std::uint64_t> cap, std::uint64_t min_weight = 0)
      : kind_(kind), cap_(cap), min_weight_(min_weight) {
    if (cap_ && *cap_ == 0) throw error(errc::config_error, "cap must be at least 1");
    if (kind_ == table1_kind::most_reliable && !cap_) {
      throw error(errc::config_error, "most-reliable paths need a cap to fix the rational grid");
    }
    if (kind_ == table1_kind::most_reliable && *cap_ > (std::uint64_t{1} << 32)) {
      throw error(errc::config_error, "most-reliable cap must not exceed 2^32");
    }
    if (cap_ && min_weight_ > *cap_) throw error(errc::config_error, "min_weight exceeds cap");
  }

  [[nodiscard]] table1_kind kind() const noexcept { return kind_; }
  [[nodiscard]] std::optional<std::uint64_t> cap() const noexcept { return cap_; }
  [[nodiscard]] std::uint64_t min_weight() const noexcept { return min_weight_; }

  nat_inf trivial() const {
    switch (kind_) {
      case table1_kind::shortest: return {0};
      case table1_kind::most_reliable: return {*cap_};
      default: return nat_inf::inf();
    }
  }

  nat_inf invalid() const {
    return kind_ == table1_kind::shortest ? nat_inf::inf() : nat_inf{0};
  }

  nat_inf choose(const nat_inf& x, const nat_inf& y) const {
    return kind_ == table1_kind::shortest ? std::min(x, y) : std::max(x, y);
  }

  nat_inf extend(NodeId, NodeId, const table1_policy& f, const nat_inf& x) const {
    switch (f.kind) {
      case op::reject: return invalid();
      case op::min: return {std::min(f.w, x.value)};
      case op::mul: return {f.w * x.value / *cap_};
      case op::add: break;
    }
    if (kind_ == table1_kind::longest) {
      if (x == invalid()) return x;
      if (x.is_inf() || f.w == nat_inf::inf_value) return nat_inf::inf();
      return {std::min(saturating_add(x.value, f.w), limit())};
    }
    if (x.is_inf() || f.w == nat_inf::inf_value) return nat_inf::inf();
    const std::uint64_t s = saturating_add(x.value, f.w);
    return s > limit() ? nat_inf::inf() : nat_inf{s};
  }

  table1_policy invalid_policy(NodeId, NodeId) const { return {op::reject, 0}; }

  std::size_t node_count() const { return 1; }

  std::string render(const nat_inf& x) const {
    if (kind_ == table1_kind::most_reliable) return render_fraction(x.value);
    return x.is_inf() ? "inf" : std::to_string(x.value);
  }

  nat_inf parse_weight(std::string_view s) const {
    if (kind_ == table1_kind::most_reliable) return {parse_fraction(s)};
    if (s == "inf" || s == "∞") return nat_inf::inf();
    auto v = detail::parse_u64(s);
    if (!v || (cap_ && *v > *cap_) || *v == nat_inf::inf_value) {
      throw error(errc::config_error, "weight '" + std::string(s) + "' is not in the carrier");
    }
    return {*v};
  }

  std::string policy_name(const table1_policy& f) const {
    switch (f.kind) {
      case op::reject: return "reject";
      case op::add: return "add:" + (f.w == nat_inf::inf_value ? std::string("inf") : std::to_string(f.w));
      case op::min: return "min:" + (f.w == nat_inf::inf_value ? std::string("inf") : std::to_string(f.w));
      case op::mul: return "mul:" + render_fraction(f.w);
    }
    return "reject";
  }

  table1_policy parse_policy(NodeId, NodeId, std::string_view s) const {
    if (s == "reject") return {op::reject, 0};
    const auto colon = s.find(':');
    if (colon == std::string_view::npos) throw error(errc::config_error, "unknown policy '" + std::string(s) + "'");
    const auto head = s.substr(0, colon);
    const auto arg = s.substr(colon + 1);
    const op want = native_op();
    const op got = head == "add" ? op::add : head == "min" ? op::min : head == "mul" ? op::mul : op::reject;
    if (got != want) {
      throw error(errc::config_error, "policy '" + std::string(s) + "' does not belong to the " +
                                          std::string(to_string(kind_)) + " algebra");
    }
    table1_policy f{want, 0};
    if (want == op::mul) {
      f.w = parse_fraction(arg);
    } else if (arg == "inf" || arg == "∞") {
      f.w = nat_inf::inf_value;
    } else {
      auto v = detail::parse_u64(arg);
      if (!v) throw error(errc::config_error, "bad policy weight in '" + std::string(s) + "'");
      f.w = *v;
    }
    if (f.w != nat_inf::inf_value && f.w < min_weight_) {
      throw error(errc::config_error, "policy '" + std::string(s) + "' is below the configured min_weight");
    }
    return f;
  }

  nat_inf sample_weight(rng_type& rng) const {
    const std::uint64_t top = cap_ ? *cap_ : 64;
    if (kind_ != table1_kind::most_reliable && uniform_index(rng, top + 2) == 0) return nat_inf::inf();
    return {uniform_u64(rng, 0, top)};
  }

  table1_policy sample_policy(NodeId, NodeId, rng_type& rng) const {
    if (uniform_index(rng, 20) == 0) return {op::reject, 0};
    const std::uint64_t top = cap_ ? *cap_ : 64;
    return {native_op(), uniform_u64(rng, min_weight_, top)};
  }

  bool enumerable() const { return cap_.has_value(); }

  std::vector<nat_inf> weights() const {
    require_cap();
    std::vector<nat_inf> out;
    for (std::uint64_t v = 0; v <= *cap_; ++v) out.push_back({v});
    if (kind_ != table1_kind::most_reliable) out.push_back(nat_inf::inf());
    return out;
  }

  std::vector<table1_policy> policies(NodeId, NodeId) const {
    require_cap();
    std::vector<table1_policy> out;
    const op o = native_op();
    for (std::uint64_t w = min_weight_; w <= *cap_; ++w) out.push_back({o, w});
    if (o != op::mul) out.push_back({o, nat_inf::inf_value});
    out.push_back({op::reject, 0});
    return out;
  }

 private:
  static std::uint64_t saturating_add(std::uint64_t a, std::uint64_t b) {
    return a > nat_inf::inf_value - 1 - b ? nat_inf::inf_value - 1 : a + b;
  }

  [[nodiscard]] std::uint64_t limit() const { return cap_ ? *cap_ : nat_inf::inf_value - 1; }

  [[nodiscard]] op native_op() const {
    switch (kind_) {
      case table1_kind::widest: return op::min;
      case table1_kind::most_reliable: return op::mul;
      default: return op::add;
    }
  }

  void require_cap() const {
    if (!cap_) throw error(errc::not_enumerable, "uncapped algebra has an infinite carrier; set a cap");
  }

  [[nodiscard]] std::string render_fraction(std::uint64_t k) const {
    if (k == 0) return "0";
    if (k == *cap_) return "1";
    const std::uint64_t g = std::gcd(k, *cap_);
    return std::to_string(k / g) + "/" + std::to_string(*cap_ / g);
  }

  [[nodiscard]] std::uint64_t parse_fraction(std::string_view s) const {
    const auto slash = s.find('/');
    std::optional<std::uint64_t> num, den;
    if (slash == std::string_view::npos) {
      num = detail::parse_u64(s);
      den = 1;
    } else {
      num = detail::parse_u64(s.substr(0, slash));
      den = detail::parse_u64(s.substr(slash + 1));
    }
    if (!num || !den || *den == 0 || *num > *den || (*num * *cap_) % *den != 0) {
      throw error(errc::config_error, "'" + std::string(s) + "' is not on the grid of multiples of 1/" +
                                          std::to_string(*cap_));
    }
    return *num * *cap_ / *den;
  }

  table1_kind kind_;
  std::optional<std::uint64_t> cap_;
  std::uint64_t min_weight_;
};

inline Table1Algebra make_table1_algebra(table1_kind kind, std::optional<std::uint64_t> cap,
                                         std::uint64_t min_weight = 0) {
  return Table1Algebra(kind, cap, min_weight);
}

}  // namespace dbf
