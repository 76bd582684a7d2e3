#pragma once

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "dbf/asyncsim.hpp"
#include "dbf/bgplite.hpp"
#include "dbf/error.hpp"
#include "dbf/pathalg.hpp"
#include "dbf/protocol.hpp"
#include "dbf/table1.hpp"
#include "dbf/table_algebra.hpp"

namespace dbf {

// ---------------------------------------------------------------------------
// Plain configuration data
//
// Everything here is strings and numbers; resolving policy and weight text
// against an algebra happens in `with_instance`, so a config can be parsed,
// compared, and re-serialized without knowing which algebra it selects.

struct TablePolicySpec {
  std::string name;
  std::vector<std::string> map;
  std::optional<std::vector<std::pair<NodeId, NodeId>>> edges;
  friend bool operator==(const TablePolicySpec&, const TablePolicySpec&) = default;
};

struct AlgebraSpec {
  std::string kind;  // shortest | longest | widest | most-reliable | shortest-pv | bgplite | gadget | table
  std::optional<std::uint64_t> cap;
  std::uint64_t min_weight = 0;
  // kind == "table"
  std::vector<std::string> carrier;
  std::optional<std::vector<std::vector<std::string>>> choose;  // absent: carrier order is preference order
  std::string trivial;
  std::string invalid;
  std::vector<TablePolicySpec> policies;
  std::string invalid_policy;
  friend bool operator==(const AlgebraSpec&, const AlgebraSpec&) = default;
};

struct LinkSpec {
  NodeId from = 0;
  NodeId to = 0;
  std::string policy;
  friend bool operator==(const LinkSpec&, const LinkSpec&) = default;
};

struct EpochSpec {
  std::size_t start = 0;
  std::vector<LinkSpec> links;
  std::optional<std::vector<NodeId>> participants;  // absent: every router
  friend bool operator==(const EpochSpec&, const EpochSpec&) = default;
};

struct ScheduleSpec {
  std::size_t horizon = 50;
  double activation = 1.0;
  std::size_t delay_bound = 1;
  double loss = 0.0;
  double duplication = 0.0;
  friend bool operator==(const ScheduleSpec&, const ScheduleSpec&) = default;
};

struct InstanceConfig {
  std::size_t routers = 0;
  AlgebraSpec algebra;
  std::vector<EpochSpec> epochs;
  std::optional<std::vector<std::vector<std::string>>> initial;  // absent: identity
  ScheduleSpec schedule;
  friend bool operator==(const InstanceConfig&, const InstanceConfig&) = default;
};

// ---------------------------------------------------------------------------
// JSON reading

namespace detail {

using json = nlohmann::json;

[[noreturn]] inline void config_fail(const std::string& where, const std::string& what) {
  throw error(errc::config_error, (where.empty() ? std::string("/") : where) + ": " + what);
}

inline void only_keys(const json& j, const std::string& where, std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) config_fail(where, "expected an object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) config_fail(where + "/" + key, "unknown key");
  }
}

inline const json& required(const json& j, const std::string& where, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) config_fail(where, std::string("missing key '") + key + "'");
  return *it;
}

inline std::uint64_t read_u64(const json& j, const std::string& where) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0)) {
    config_fail(where, "expected a non-negative integer");
  }
  return j.get<std::uint64_t>();
}

inline double read_probability(const json& j, const std::string& where) {
  if (!j.is_number()) config_fail(where, "expected a number");
  const double p = j.get<double>();
  if (!(p >= 0.0 && p <= 1.0)) config_fail(where, "expected a probability in [0,1]");
  return p;
}

inline std::string read_string(const json& j, const std::string& where) {
  if (!j.is_string()) config_fail(where, "expected a string");
  return j.get<std::string>();
}

inline std::vector<std::string> read_strings(const json& j, const std::string& where) {
  if (!j.is_array()) config_fail(where, "expected an array of strings");
  std::vector<std::string> out;
  for (std::size_t k = 0; k < j.size(); ++k) out.push_back(read_string(j[k], where + "/" + std::to_string(k)));
  return out;
}

inline std::vector<std::vector<std::string>> read_grid(const json& j, const std::string& where) {
  if (!j.is_array()) config_fail(where, "expected an array of rows");
  std::vector<std::vector<std::string>> out;
  for (std::size_t k = 0; k < j.size(); ++k) out.push_back(read_strings(j[k], where + "/" + std::to_string(k)));
  return out;
}

inline NodeId read_router(const json& j, const std::string& where, std::size_t n) {
  const std::uint64_t v = read_u64(j, where);
  if (v >= n) config_fail(where, "router " + std::to_string(v) + " outside 0.." + std::to_string(n - 1));
  return static_cast<NodeId>(v);
}

inline AlgebraSpec read_algebra(const json& j, const std::string& where, std::size_t n) {
  AlgebraSpec a;
  if (!j.is_object()) config_fail(where, "expected an object");
  a.kind = read_string(required(j, where, "kind"), where + "/kind");
  if (a.kind == "shortest" || a.kind == "longest" || a.kind == "widest" || a.kind == "most-reliable") {
    only_keys(j, where, {"kind", "cap", "min_weight"});
    if (auto it = j.find("cap"); it != j.end() && !it->is_null()) a.cap = read_u64(*it, where + "/cap");
    if (auto it = j.find("min_weight"); it != j.end()) a.min_weight = read_u64(*it, where + "/min_weight");
    if (a.cap && *a.cap == 0) config_fail(where + "/cap", "cap must be at least 1");
    if (a.kind == "most-reliable" && !a.cap) config_fail(where + "/cap", "most-reliable needs a cap");
  } else if (a.kind == "shortest-pv") {
    only_keys(j, where, {"kind", "cap"});
    a.cap = read_u64(required(j, where, "cap"), where + "/cap");
  } else if (a.kind == "bgplite" || a.kind == "gadget") {
    only_keys(j, where, {"kind"});
  } else if (a.kind == "table") {
    only_keys(j, where, {"kind", "carrier", "choose", "trivial", "invalid", "policies", "invalid_policy"});
    a.carrier = read_strings(required(j, where, "carrier"), where + "/carrier");
    if (auto it = j.find("choose"); it != j.end()) a.choose = read_grid(*it, where + "/choose");
    a.trivial = read_string(required(j, where, "trivial"), where + "/trivial");
    a.invalid = read_string(required(j, where, "invalid"), where + "/invalid");
    a.invalid_policy = read_string(required(j, where, "invalid_policy"), where + "/invalid_policy");
    const json& ps = required(j, where, "policies");
    if (!ps.is_array()) config_fail(where + "/policies", "expected an array");
    for (std::size_t k = 0; k < ps.size(); ++k) {
      const std::string at = where + "/policies/" + std::to_string(k);
      only_keys(ps[k], at, {"name", "map", "edges"});
      TablePolicySpec p;
      p.name = read_string(required(ps[k], at, "name"), at + "/name");
      p.map = read_strings(required(ps[k], at, "map"), at + "/map");
      if (auto it = ps[k].find("edges"); it != ps[k].end()) {
        if (!it->is_array()) config_fail(at + "/edges", "expected an array of [i, j] pairs");
        std::vector<std::pair<NodeId, NodeId>> es;
        for (std::size_t e = 0; e < it->size(); ++e) {
          const std::string ea = at + "/edges/" + std::to_string(e);
          const json& pair = (*it)[e];
          if (!pair.is_array() || pair.size() != 2) config_fail(ea, "expected [i, j]");
          es.emplace_back(read_router(pair[0], ea + "/0", n), read_router(pair[1], ea + "/1", n));
        }
        p.edges = std::move(es);
      }
      a.policies.push_back(std::move(p));
    }
  } else {
    config_fail(where + "/kind", "unknown algebra kind '" + a.kind + "'");
  }
  return a;
}

}  // namespace detail

/// Parses and structurally validates a configuration document.
/// Errors carry a JSON-pointer location, or a byte offset for syntax errors.
inline InstanceConfig parse_config(std::string_view text) {
  using detail::json;
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw error(errc::config_error, "byte " + std::to_string(e.byte) + ": malformed JSON");
  }
  InstanceConfig c;
  detail::only_keys(root, "", {"routers", "algebra", "epochs", "initial", "schedule"});
  const std::uint64_t n = detail::read_u64(detail::required(root, "", "routers"), "/routers");
  if (n == 0 || n > 64) detail::config_fail("/routers", "router count must lie in 1..64");
  c.routers = static_cast<std::size_t>(n);
  c.algebra = detail::read_algebra(detail::required(root, "", "algebra"), "/algebra", c.routers);

  const json& eps = detail::required(root, "", "epochs");
  if (!eps.is_array() || eps.empty()) detail::config_fail("/epochs", "expected a non-empty array");
  for (std::size_t e = 0; e < eps.size(); ++e) {
    const std::string at = "/epochs/" + std::to_string(e);
    detail::only_keys(eps[e], at, {"start", "links", "participants"});
    EpochSpec ep;
    if (auto it = eps[e].find("start"); it != eps[e].end()) ep.start = detail::read_u64(*it, at + "/start");
    if (e == 0 && ep.start != 0) detail::config_fail(at + "/start", "the first epoch must start at 0");
    if (e > 0 && ep.start <= c.epochs.back().start) detail::config_fail(at + "/start", "epoch starts must increase");
    if (auto it = eps[e].find("links"); it != eps[e].end()) {
      if (!it->is_array()) detail::config_fail(at + "/links", "expected an array");
      for (std::size_t k = 0; k < it->size(); ++k) {
        const std::string la = at + "/links/" + std::to_string(k);
        const json& l = (*it)[k];
        detail::only_keys(l, la, {"from", "to", "policy"});
        LinkSpec link;
        link.from = detail::read_router(detail::required(l, la, "from"), la + "/from", c.routers);
        link.to = detail::read_router(detail::required(l, la, "to"), la + "/to", c.routers);
        link.policy = detail::read_string(detail::required(l, la, "policy"), la + "/policy");
        for (const auto& prev : ep.links) {
          if (prev.from == link.from && prev.to == link.to) detail::config_fail(la, "link given twice");
        }
        ep.links.push_back(std::move(link));
      }
    }
    if (auto it = eps[e].find("participants"); it != eps[e].end()) {
      if (!it->is_array()) detail::config_fail(at + "/participants", "expected an array of routers");
      std::vector<NodeId> ps;
      for (std::size_t k = 0; k < it->size(); ++k) {
        ps.push_back(detail::read_router((*it)[k], at + "/participants/" + std::to_string(k), c.routers));
      }
      std::sort(ps.begin(), ps.end());
      ps.erase(std::unique(ps.begin(), ps.end()), ps.end());
      ep.participants = std::move(ps);
    }
    c.epochs.push_back(std::move(ep));
  }

  if (auto it = root.find("initial"); it != root.end()) {
    if (it->is_string()) {
      if (it->get<std::string>() != "identity") detail::config_fail("/initial", "expected \"identity\" or a grid");
    } else {
      auto grid = detail::read_grid(*it, "/initial");
      if (grid.size() != c.routers) detail::config_fail("/initial", "grid must have one row per router");
      for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid[i].size() != c.routers) detail::config_fail("/initial/" + std::to_string(i), "row has the wrong length");
      }
      c.initial = std::move(grid);
    }
  }

  if (auto it = root.find("schedule"); it != root.end()) {
    const std::string at = "/schedule";
    detail::only_keys(*it, at, {"horizon", "activation", "delay_bound", "loss", "duplication"});
    auto& s = c.schedule;
    if (auto f = it->find("horizon"); f != it->end()) s.horizon = detail::read_u64(*f, at + "/horizon");
    if (auto f = it->find("activation"); f != it->end()) s.activation = detail::read_probability(*f, at + "/activation");
    if (auto f = it->find("delay_bound"); f != it->end()) s.delay_bound = detail::read_u64(*f, at + "/delay_bound");
    if (auto f = it->find("loss"); f != it->end()) s.loss = detail::read_probability(*f, at + "/loss");
    if (auto f = it->find("duplication"); f != it->end()) s.duplication = detail::read_probability(*f, at + "/duplication");
    if (s.delay_bound == 0) detail::config_fail(at + "/delay_bound", "must be at least 1");
  }
  return c;
}

inline InstanceConfig load_config(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw error(errc::config_error, file + ": cannot open");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config(buf.str());
  } catch (const error& e) {
    throw error(e.code(), file + ": " + e.detail());
  }
}

/// Canonical JSON form: every optional field the parser fills with a default
/// is written out explicitly.
inline nlohmann::json to_json(const InstanceConfig& c) {
  using nlohmann::json;
  json alg{{"kind", c.algebra.kind}};
  const auto& a = c.algebra;
  if (a.kind == "shortest" || a.kind == "longest" || a.kind == "widest" || a.kind == "most-reliable") {
    alg["cap"] = a.cap ? json(*a.cap) : json(nullptr);
    alg["min_weight"] = a.min_weight;
  } else if (a.kind == "shortest-pv") {
    alg["cap"] = a.cap.value_or(0);
  } else if (a.kind == "table") {
    alg["carrier"] = a.carrier;
    if (a.choose) alg["choose"] = *a.choose;
    alg["trivial"] = a.trivial;
    alg["invalid"] = a.invalid;
    alg["invalid_policy"] = a.invalid_policy;
    json ps = json::array();
    for (const auto& p : a.policies) {
      json jp{{"name", p.name}, {"map", p.map}};
      if (p.edges) {
        json es = json::array();
        for (const auto& [i, j] : *p.edges) es.push_back({i, j});
        jp["edges"] = es;
      }
      ps.push_back(jp);
    }
    alg["policies"] = ps;
  }
  json eps = json::array();
  for (const auto& e : c.epochs) {
    json links = json::array();
    for (const auto& l : e.links) links.push_back({{"from", l.from}, {"to", l.to}, {"policy", l.policy}});
    json je{{"start", e.start}, {"links", links}};
    if (e.participants) je["participants"] = *e.participants;
    eps.push_back(je);
  }
  json out{{"routers", c.routers}, {"algebra", alg}, {"epochs", eps}};
  out["initial"] = c.initial ? json(*c.initial) : json("identity");
  out["schedule"] = {{"horizon", c.schedule.horizon},
                     {"activation", c.schedule.activation},
                     {"delay_bound", c.schedule.delay_bound},
                     {"loss", c.schedule.loss},
                     {"duplication", c.schedule.duplication}};
  return out;
}

inline std::string serialize_config(const InstanceConfig& c) { return to_json(c).dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Typed instances

template <RoutingAlgebra A>
struct Instance {
  A algebra;
  std::size_t n = 0;
  NetworkOverEpochs<A> network;
  std::vector<std::size_t> starts;  // start time of each epoch
  std::vector<NodeSet> participants;
  RoutingState<A> initial;
  ScheduleSpec schedule;
  std::string kind;

  [[nodiscard]] std::size_t epochs() const noexcept { return network.size(); }

  [[nodiscard]] ScheduleParams schedule_params(std::uint64_t seed, std::size_t horizon) const {
    ScheduleParams p;
    p.seed = seed;
    p.horizon = horizon;
    p.activation = schedule.activation;
    p.delay_bound = schedule.delay_bound;
    p.loss = schedule.loss;
    p.duplication = schedule.duplication;
    p.epoch_starts.assign(starts.begin() + 1, starts.end());
    for (const auto& s : participants) p.participants.push_back(s.members());
    return p;
  }
};

namespace detail {

template <RoutingAlgebra A>
Instance<A> resolve(A alg, const InstanceConfig& c) {
  Instance<A> inst{std::move(alg), c.routers, {}, {}, {}, RoutingState<A>{}, c.schedule, c.algebra.kind};
  const A& a = inst.algebra;
  for (std::size_t e = 0; e < c.epochs.size(); ++e) {
    const auto& ep = c.epochs[e];
    AdjacencyMatrix<A> M = empty_topology(a, c.routers);
    for (std::size_t k = 0; k < ep.links.size(); ++k) {
      const auto& l = ep.links[k];
      try {
        M(l.from, l.to) = a.parse_policy(l.from, l.to, l.policy);
      } catch (const error& err) {
        config_fail("/epochs/" + std::to_string(e) + "/links/" + std::to_string(k) + "/policy", err.detail());
      }
    }
    inst.network.push_back(std::move(M));
    inst.starts.push_back(ep.start);
    inst.participants.push_back(ep.participants ? NodeSet::of(c.routers, *ep.participants) : NodeSet::all(c.routers));
  }
  if (c.initial) {
    try {
      inst.initial = parse_state(a, *c.initial);
    } catch (const error& err) {
      config_fail("/initial", err.detail());
    }
  } else {
    inst.initial = identity_state(a, c.routers);
  }
  return inst;
}

inline TableAlgebra table_from(const InstanceConfig& c) {
  const auto& a = c.algebra;
  std::vector<TableAlgebra::PolicyDef> defs;
  for (const auto& p : a.policies) {
    std::optional<std::vector<Edge>> es;
    if (p.edges) {
      es.emplace();
      for (const auto& [i, j] : *p.edges) es->push_back({i, j});
    }
    defs.push_back({p.name, p.map, es});
  }
  try {
    return TableAlgebra(c.routers, a.carrier, a.choose ? *a.choose : rank_choose_table(a.carrier), a.trivial, a.invalid,
                        defs, a.invalid_policy);
  } catch (const error& err) {
    config_fail("/algebra", err.detail());
  }
}

}  // namespace detail

/// Builds the typed instance selected by `c` and hands it to `visit`.
template <class Visit>
decltype(auto) with_instance(const InstanceConfig& c, Visit&& visit) {
  const auto& k = c.algebra.kind;
  if (k == "shortest" || k == "longest" || k == "widest" || k == "most-reliable") {
    Table1Algebra alg = [&] {
      try {
        return make_table1_algebra(parse_table1_kind(k), c.algebra.cap, c.algebra.min_weight);
      } catch (const error& err) {
        detail::config_fail("/algebra", err.detail());
      }
    }();
    return visit(detail::resolve(std::move(alg), c));
  }
  if (k == "shortest-pv") return visit(detail::resolve(make_shortest_paths_pv_algebra(c.routers, c.algebra.cap.value_or(0)), c));
  if (k == "bgplite") return visit(detail::resolve(make_bgplite_algebra(c.routers), c));
  if (k == "gadget") {
    if (c.routers != 3) detail::config_fail("/routers", "the gadget algebra is defined on 3 routers");
    return visit(detail::resolve(make_nonfree_gadget().algebra, c));
  }
  if (k == "table") return visit(detail::resolve(detail::table_from(c), c));
  detail::config_fail("/algebra/kind", "unknown algebra kind '" + k + "'");
}

}  // namespace dbf
