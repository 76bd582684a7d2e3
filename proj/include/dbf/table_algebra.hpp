#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dbf/algebra.hpp"
#include "dbf/error.hpp"
#include "dbf/rng.hpp"

namespace dbf {

struct table_weight {
  std::uint32_t index = 0;
  friend constexpr auto operator<=>(const table_weight&, const table_weight&) = default;
  friend std::size_t hash_value(const table_weight& w) noexcept { return w.index; }
};

struct table_policy {
  std::uint32_t index = 0;
  friend constexpr auto operator<=>(const table_policy&, const table_policy&) = default;
};

/// A finite algebra given entirely by tables: a named carrier, a full ⊕
/// table and a list of named policy maps. A policy with an edge list is only
/// available on those edges; one without is available everywhere.
class TableAlgebra {
 public:
  using weight_type = table_weight;
  using policy_type = table_policy;

  struct PolicyDef {
    std::string name;
    std::vector<std::string> map;  // image of each carrier element, by name
    std::optional<std::vector<Edge>> edges;
  };

  TableAlgebra(std::size_t n, std::vector<std::string> carrier, std::vector<std::vector<std::string>> choose,
               const std::string& trivial, const std::string& invalid, const std::vector<PolicyDef>& policies,
               const std::string& invalid_policy)
      : n_(std::max<std::size_t>(n, 1)), names_(std::move(carrier)) {
    const std::size_t m = names_.size();
    if (m == 0) throw error(errc::config_error, "carrier is empty");
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = a + 1; b < m; ++b)
        if (names_[a] == names_[b]) throw error(errc::config_error, "carrier element '" + names_[a] + "' repeats");
    if (choose.size() != m) throw error(errc::config_error, "choose table must have one row per carrier element");
    choose_.reserve(m * m);
    for (const auto& row : choose) {
      if (row.size() != m) throw error(errc::config_error, "choose table must be square");
      for (const auto& cell : row) choose_.push_back(lookup(cell).index);
    }
    trivial_ = lookup(trivial);
    invalid_ = lookup(invalid);
    for (const auto& def : policies) {
      if (def.map.size() != m) {
        throw error(errc::config_error, "policy '" + def.name + "' must map every carrier element");
      }
      Def d;
      d.name = def.name;
      for (const auto& img : def.map) d.map.push_back(lookup(img).index);
      d.edges = def.edges;
      if (d.edges) {
        for (const Edge& e : *d.edges) {
          if (e.from >= n_ || e.to >= n_) throw error(errc::config_error, "policy '" + def.name + "' names an edge outside the instance");
        }
      }
      for (const auto& other : defs_) {
        if (other.name == d.name) throw error(errc::config_error, "policy '" + d.name + "' is defined twice");
      }
      defs_.push_back(std::move(d));
    }
    reject_ = find_policy(invalid_policy);
    if (defs_[reject_.index].edges) throw error(errc::config_error, "the invalid policy must be available on every edge");
  }

  [[nodiscard]] const std::vector<std::string>& carrier_names() const noexcept { return names_; }

  table_weight choose(const table_weight& x, const table_weight& y) const {
    return {choose_[x.index * names_.size() + y.index]};
  }
  table_weight extend(NodeId, NodeId, const table_policy& f, const table_weight& x) const {
    return {defs_[f.index].map[x.index]};
  }
  table_weight trivial() const { return trivial_; }
  table_weight invalid() const { return invalid_; }
  table_policy invalid_policy(NodeId, NodeId) const { return reject_; }
  std::size_t node_count() const { return n_; }

  std::string render(const table_weight& x) const { return names_[x.index]; }
  table_weight parse_weight(std::string_view s) const { return lookup(s); }
  std::string policy_name(const table_policy& f) const { return defs_[f.index].name; }

  table_policy parse_policy(NodeId i, NodeId j, std::string_view s) const {
    const table_policy f = find_policy(s);
    if (!available(defs_[f.index], i, j)) {
      throw error(errc::config_error, "policy '" + std::string(s) + "' is not in the catalog of edge (" +
                                          std::to_string(i) + "," + std::to_string(j) + ")");
    }
    return f;
  }

  table_weight sample_weight(rng_type& rng) const {
    return {static_cast<std::uint32_t>(uniform_index(rng, names_.size()))};
  }
  table_policy sample_policy(NodeId i, NodeId j, rng_type& rng) const {
    const auto fs = policies(i, j);
    return fs[uniform_index(rng, fs.size())];
  }

  bool enumerable() const { return true; }

  std::vector<table_weight> weights() const {
    std::vector<table_weight> out;
    for (std::uint32_t k = 0; k < names_.size(); ++k) out.push_back({k});
    return out;
  }

  std::vector<table_policy> policies(NodeId i, NodeId j) const {
    std::vector<table_policy> out;
    for (std::uint32_t k = 0; k < defs_.size(); ++k) {
      if (available(defs_[k], i, j)) out.push_back({k});
    }
    return out;
  }

 private:
  struct Def {
    std::string name;
    std::vector<std::uint32_t> map;
    std::optional<std::vector<Edge>> edges;
  };

  static bool available(const Def& d, NodeId i, NodeId j) {
    if (!d.edges) return true;
    return std::find(d.edges->begin(), d.edges->end(), Edge{i, j}) != d.edges->end();
  }

  table_weight lookup(std::string_view s) const {
    for (std::uint32_t k = 0; k < names_.size(); ++k) {
      if (names_[k] == s) return {k};
    }
    throw error(errc::config_error, "'" + std::string(s) + "' is not a carrier element");
  }

  table_policy find_policy(std::string_view s) const {
    for (std::uint32_t k = 0; k < defs_.size(); ++k) {
      if (defs_[k].name == s) return {k};
    }
    throw error(errc::config_error, "unknown policy '" + std::string(s) + "'");
  }

  std::size_t n_;
  std::vector<std::string> names_;
  std::vector<std::uint32_t> choose_;
  table_weight trivial_;
  table_weight invalid_;
  std::vector<Def> defs_;
  table_policy reject_;
};

/// Builds the ⊕ table of a carrier totally ordered by position (first = best).
inline std::vector<std::vector<std::string>> rank_choose_table(const std::vector<std::string>& ranked) {
  std::vector<std::vector<std::string>> t(ranked.size(), std::vector<std::string>(ranked.size()));
  for (std::size_t a = 0; a < ranked.size(); ++a)
    for (std::size_t b = 0; b < ranked.size(); ++b) t[a][b] = ranked[std::min(a, b)];
  return t;
}

/// The smallest oscillating instance we know of for this model.
///
/// Routers 0 and 1 both reach destination 2. A direct route to 2 is rated
/// "d"; learning a "d" route from the other router yields the better "v",
/// but a "v" route cannot be passed on. Each router therefore prefers the
/// other's direct route, and from the state where both hold "d" towards
/// each other the pair flips between "d" and "v" forever.
struct NonfreeGadget {
  TableAlgebra algebra;
  std::vector<std::vector<std::string>> adjacency;   // policy names
  std::vector<std::vector<std::string>> start_state; // carrier names
};

inline NonfreeGadget make_nonfree_gadget() {
  const std::vector<std::string> carrier{"0", "v", "d", "inf"};
  std::vector<TableAlgebra::PolicyDef> policies{
      {"direct", {"d", "inf", "inf", "inf"}, std::nullopt},
      {"cross", {"d", "inf", "v", "inf"}, std::nullopt},
      {"reject", {"inf", "inf", "inf", "inf"}, std::nullopt},
  };
  TableAlgebra alg(3, carrier, rank_choose_table(carrier), "0", "inf", policies, "reject");
  std::vector<std::vector<std::string>> adj{
      {"reject", "cross", "direct"},
      {"cross", "reject", "direct"},
      {"reject", "reject", "reject"},
  };
  std::vector<std::vector<std::string>> start{
      {"0", "d", "d"},
      {"d", "0", "d"},
      {"inf", "inf", "0"},
  };
  return {std::move(alg), std::move(adj), std::move(start)};
}

}  // namespace dbf
