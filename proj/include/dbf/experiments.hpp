#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dbf/algebra.hpp"
#include "dbf/asyncsim.hpp"
#include "dbf/config.hpp"
#include "dbf/convergence.hpp"
#include "dbf/error.hpp"
#include "dbf/pathalg.hpp"
#include "dbf/protocol.hpp"
#include "dbf/rng.hpp"

namespace dbf {

inline constexpr int exit_ok = 0;
inline constexpr int exit_config = 2;
inline constexpr int exit_failure = 3;

struct CommandOptions {
  std::uint64_t seed = 1;
  std::optional<std::size_t> horizon;  // falls back to the config's schedule.horizon
  std::size_t schedules = 10;
  bool sync = false;
  std::optional<std::string> out_dir;
  std::size_t epoch = 0;
  std::optional<std::vector<NodeId>> participants;  // falls back to the epoch's own set
  bool sampled = false;
  std::size_t cases = 10000;
  std::vector<std::string> require;  // properties that must hold on top of the axioms
  std::optional<std::string> schedule_file;
};

struct CommandResult {
  int exit_code = exit_ok;
  nlohmann::json report;
};

// ---------------------------------------------------------------------------
// Shared helpers

namespace detail {

using json = nlohmann::json;

inline json witness_json(const Witness& w) {
  json j{{"weights", w.weights}, {"policies", w.policies}, {"detail", w.detail}};
  if (w.edge) j["edge"] = {w.edge->from, w.edge->to};
  return j;
}

inline json report_json(const Report& r) {
  json props = json::array();
  for (const auto& [name, s] : r.entries) {
    json p{{"name", name}, {"status", std::string(to_string(s.state))}, {"cases", s.cases}};
    if (s.witness) p["witness"] = witness_json(*s.witness);
    props.push_back(p);
  }
  json j{{"mode", r.mode}, {"properties", props}};
  if (r.seed) j["seed"] = *r.seed;
  return j;
}

template <RoutingAlgebra A>
json state_json(const A& alg, const RoutingState<A>& X) {
  return render_state(alg, X);
}

template <RoutingAlgebra A>
bool carrier_enumerable(const A& alg) {
  if constexpr (EnumerableAlgebra<A>) return alg.enumerable();
  else return false;
}

/// Iteration budget for synchronous runs used as reference fixed points.
template <RoutingAlgebra A>
std::size_t sync_budget(const A& alg, std::size_t n) {
  if constexpr (EnumerableAlgebra<A>) {
    if (alg.enumerable()) return default_max_t(alg, n);
  }
  return 10 * n * n + 10;
}

template <RoutingAlgebra A>
NodeSet chosen_participants(const Instance<A>& inst, const CommandOptions& o) {
  if (o.epoch >= inst.epochs()) {
    throw error(errc::epoch_out_of_range, "epoch " + std::to_string(o.epoch) + " of " + std::to_string(inst.epochs()));
  }
  if (o.participants) return NodeSet::of(inst.n, *o.participants);
  return inst.participants[o.epoch];
}

template <RoutingAlgebra A>
check_mode pick_mode(const A& alg, const CommandOptions& o) {
  if (o.sampled || !carrier_enumerable(alg)) return sampled_mode{o.seed, o.cases};
  return exhaustive_mode{};
}

inline std::filesystem::path out_path(const CommandOptions& o, const std::string& name) {
  std::filesystem::create_directories(*o.out_dir);
  return std::filesystem::path(*o.out_dir) / name;
}

inline void write_report(const CommandOptions& o, const json& report) {
  if (!o.out_dir) return;
  std::ofstream f(out_path(o, "report.json"));
  f << report.dump(2) << "\n";
}

/// How one epoch of an asynchronous run ended.
template <class W>
struct EpochOutcome {
  std::size_t epoch = 0;
  std::size_t first = 0;  // first and last time of the epoch inside the horizon
  std::size_t last = 0;
  std::size_t pseudocycles = 0;
  std::size_t stable_from = 0;      // δ is constant on [stable_from, last]
  std::size_t pseudocycles_before_stable = 0;
  bool fixed_point = false;         // δ^last is a fixed point of the epoch's F
  Matrix<W> state;
};

template <RoutingAlgebra A>
std::vector<EpochOutcome<weight_t<A>>> epoch_outcomes(const Instance<A>& inst, const Schedule& s,
                                                      const std::vector<RoutingState<A>>& delta,
                                                      const std::vector<Interval>& cycles) {
  std::vector<EpochOutcome<weight_t<A>>> out;
  std::size_t t = 0;
  while (t <= s.horizon) {
    EpochOutcome<weight_t<A>> o;
    o.epoch = s.eta[t];
    o.first = t;
    while (t + 1 <= s.horizon && s.eta[t + 1] == o.epoch) ++t;
    o.last = t;
    o.state = delta[o.last];
    o.stable_from = o.last;
    while (o.stable_from > o.first && delta[o.stable_from - 1] == o.state) --o.stable_from;
    o.pseudocycles = count_pseudocycles_within(cycles, o.first, o.last);
    o.pseudocycles_before_stable = count_pseudocycles_within(cycles, o.first, o.stable_from);
    const auto M = participating_topology(inst.algebra, inst.network, o.epoch, s.pi[o.epoch]);
    o.fixed_point = step(inst.algebra, M, o.state) == o.state;
    out.push_back(std::move(o));
    ++t;
  }
  return out;
}

template <RoutingAlgebra A>
json outcome_json(const A& alg, const EpochOutcome<weight_t<A>>& o) {
  return json{{"epoch", o.epoch},
              {"first", o.first},
              {"last", o.last},
              {"pseudocycles", o.pseudocycles},
              {"stable_from", o.stable_from},
              {"pseudocycles_before_stable", o.pseudocycles_before_stable},
              {"fixed_point", o.fixed_point},
              {"state", state_json(alg, o.state)}};
}

template <RoutingAlgebra A>
Schedule schedule_for(const Instance<A>& inst, const CommandOptions& o, std::size_t horizon) {
  if (o.schedule_file) {
    std::ifstream in(*o.schedule_file);
    if (!in) throw error(errc::config_error, *o.schedule_file + ": cannot open");
    Schedule s = read_schedule(in);
    if (s.n != inst.n) throw error(errc::dimension_mismatch, "schedule is for " + std::to_string(s.n) + " routers");
    return s;
  }
  return generate_schedule(inst.schedule_params(o.seed, horizon), inst.n).schedule;
}

/// A random state whose non-participating rows are the identity.
template <RoutingAlgebra A>
RoutingState<A> random_accordant(const A& alg, std::size_t n, const NodeSet& p, rng_type& rng) {
  RoutingState<A> X = identity_state(alg, n);
  for (NodeId i : p.members())
    for (NodeId j = 0; j < n; ++j) X(i, j) = draw_weight(alg, rng);
  return X;
}

template <RoutingAlgebra A>
std::optional<RoutingState<A>> sync_fixed_point(const Instance<A>& inst, std::size_t e, const RoutingState<A>& X0) {
  const auto M = participating_topology(inst.algebra, inst.network, e, inst.participants[e]);
  const auto r = run_synchronous(inst.algebra, M, X0, sync_budget(inst.algebra, inst.n));
  if (const auto* c = std::get_if<Converged<weight_t<A>>>(&r)) return c->state;
  return std::nullopt;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// check-algebra / check-path-algebra

template <RoutingAlgebra A>
CommandResult cmd_check_algebra(const Instance<A>& inst, const CommandOptions& o) {
  const A& alg = inst.algebra;
  const check_mode mode = detail::pick_mode(alg, o);
  Report axioms = check_routing_axioms(alg, mode);
  Report props = check_properties(alg, mode);
  std::vector<std::string> required{"R1", "R2", "R3", "R4", "R5", "R6", "R7", "increasing"};
  CommandResult res;
  res.report = {{"command", "check-algebra"}, {"algebra", inst.kind}, {"axioms", detail::report_json(axioms)},
                {"properties", detail::report_json(props)}};
  Report all = axioms;
  all.merge(props);
  if constexpr (PathAlgebra<A>) {
    Report paths = check_path_axioms(alg, inst.n, mode);
    res.report["path_axioms"] = detail::report_json(paths);
    all.merge(paths);
    for (const char* p : {"P1", "P2", "P3"}) required.emplace_back(p);
  }
  required.insert(required.end(), o.require.begin(), o.require.end());
  std::vector<std::string> failed;
  for (const auto& name : required) {
    const PropertyStatus* s = nullptr;
    for (const auto& [key, value] : all.entries)
      if (key == name) s = &value;
    if (!s) throw error(errc::config_error, "unknown property '" + name + "'");
    if (s->failed()) failed.push_back(name);
  }
  res.report["required"] = required;
  res.report["failed"] = failed;
  res.exit_code = failed.empty() ? exit_ok : exit_failure;
  detail::write_report(o, res.report);
  return res;
}

template <RoutingAlgebra A>
CommandResult cmd_check_path_algebra(const Instance<A>& inst, const CommandOptions& o) {
  const Report paths = check_path_axioms(inst.algebra, inst.n, detail::pick_mode(inst.algebra, o));
  CommandResult res;
  res.report = {{"command", "check-path-algebra"}, {"algebra", inst.kind}, {"path_axioms", detail::report_json(paths)}};
  res.exit_code = paths.any_failed() ? exit_failure : exit_ok;
  detail::write_report(o, res.report);
  return res;
}

// ---------------------------------------------------------------------------
// check-free

template <RoutingAlgebra A>
CommandResult cmd_check_free(const Instance<A>& inst, const CommandOptions& o) {
  const A& alg = inst.algebra;
  if (!detail::carrier_enumerable(alg)) {
    throw error(errc::not_enumerable,
                "freeness needs a finite carrier; set algebra.cap (or use a table algebra) to make it enumerable");
  }
  const NodeSet p = detail::chosen_participants(inst, o);
  const auto M = participating_topology(alg, inst.network, o.epoch, p);
  const auto fr = is_free(alg, M);
  CommandResult res;
  nlohmann::json cycle = nlohmann::json::array();
  for (const auto& a : fr.cycle) cycle.push_back({{"router", a.router}, {"weight", alg.render(a.weight)}});
  res.report = {{"command", "check-free"}, {"algebra", inst.kind},         {"epoch", o.epoch},
                {"participants", p.members()}, {"free", fr.free},         {"assignments", fr.assignments},
                {"threats", fr.threats},       {"cycle", cycle}};
  res.exit_code = fr.free ? exit_ok : exit_failure;
  detail::write_report(o, res.report);
  return res;
}

// ---------------------------------------------------------------------------
// run

/// Emits one JSON line per state to `trace` and returns the verdict.
template <RoutingAlgebra A>
CommandResult cmd_run(const Instance<A>& inst, const CommandOptions& o, std::ostream& trace) {
  using W = weight_t<A>;
  const A& alg = inst.algebra;
  const std::size_t horizon = o.horizon.value_or(inst.schedule.horizon);
  CommandResult res;
  res.report = {{"command", "run"}, {"algebra", inst.kind}, {"horizon", horizon}};

  if (o.sync) {
    const NodeSet p = detail::chosen_participants(inst, o);
    const auto M = participating_topology(alg, inst.network, o.epoch, p);
    std::vector<RoutingState<A>> history;
    const auto outcome = run_synchronous(alg, M, inst.initial, horizon, &history);
    for (std::size_t t = 0; t < history.size() && t <= horizon; ++t) {
      trace << nlohmann::json{{"t", t}, {"state", detail::state_json(alg, history[t])}}.dump() << "\n";
    }
    res.report["mode"] = "synchronous";
    res.report["epoch"] = o.epoch;
    if (const auto* c = std::get_if<Converged<W>>(&outcome)) {
      res.report["verdict"] = "converged";
      res.report["time"] = c->time;
      res.report["state"] = detail::state_json(alg, c->state);
    } else if (const auto* osc = std::get_if<Oscillating<W>>(&outcome)) {
      res.report["verdict"] = "oscillating";
      res.report["period"] = osc->period;
      res.report["entry_time"] = osc->entry_time;
      res.report["state"] = detail::state_json(alg, osc->state);
    } else {
      const auto& ex = std::get<Exhausted<W>>(outcome);
      res.report["verdict"] = "exhausted";
      res.report["state"] = detail::state_json(alg, ex.last);
    }
    res.exit_code = exit_ok;
    detail::write_report(o, res.report);
    return res;
  }

  const Schedule s = detail::schedule_for(inst, o, horizon);
  const auto delta = run_delta(alg, inst.network, s, inst.initial);
  for (std::size_t t = 0; t <= s.horizon; ++t) {
    trace << nlohmann::json{{"t", t}, {"epoch", s.eta[t]}, {"state", detail::state_json(alg, delta[t])}}.dump() << "\n";
  }
  const auto cycles = find_pseudocycles(s);
  nlohmann::json iv = nlohmann::json::array();
  for (const auto& c : cycles) iv.push_back({c.start, c.end});
  const auto outcomes = detail::epoch_outcomes(inst, s, delta, cycles);
  nlohmann::json eps = nlohmann::json::array();
  for (const auto& oc : outcomes) eps.push_back(detail::outcome_json(alg, oc));

  const auto& final_epoch = outcomes.back();
  const auto reference = detail::sync_fixed_point(inst, final_epoch.epoch, inst.initial);
  res.report["mode"] = "asynchronous";
  res.report["seed"] = o.seed;
  res.report["pseudocycles"] = iv;
  res.report["epochs"] = eps;
  res.report["verdict"] = final_epoch.fixed_point ? "converged" : "not-converged";
  res.report["state"] = detail::state_json(alg, delta.back());
  if (reference) {
    res.report["sync_fixed_point"] = detail::state_json(alg, *reference);
    res.report["matches_sync"] = *reference == delta.back();
  }
  res.exit_code = exit_ok;
  detail::write_report(o, res.report);
  return res;
}

// ---------------------------------------------------------------------------
// pseudocycles

template <RoutingAlgebra A>
CommandResult cmd_pseudocycles(const Instance<A>& inst, const CommandOptions& o) {
  const std::size_t horizon = o.horizon.value_or(inst.schedule.horizon);
  const Schedule s = detail::schedule_for(inst, o, horizon);
  const auto cycles = find_pseudocycles(s);
  nlohmann::json iv = nlohmann::json::array();
  for (const auto& c : cycles) iv.push_back({c.start, c.end});
  std::map<std::size_t, std::size_t> per_epoch;
  for (const auto& c : cycles) ++per_epoch[s.eta[c.start]];
  nlohmann::json counts = nlohmann::json::array();
  for (std::size_t e = 0; e < s.pi.size(); ++e) counts.push_back(per_epoch[e]);
  CommandResult res;
  res.report = {{"command", "pseudocycles"}, {"seed", o.seed}, {"horizon", s.horizon},
                {"intervals", iv},           {"per_epoch", counts}};
  if (o.out_dir) {
    std::ofstream f(detail::out_path(o, "schedule.txt"));
    write_schedule(f, s);
  }
  detail::write_report(o, res.report);
  return res;
}

// ---------------------------------------------------------------------------
// amco-check

template <RoutingAlgebra A>
CommandResult cmd_amco_check(const Instance<A>& inst, const CommandOptions& o) {
  const NodeSet p = detail::chosen_participants(inst, o);
  const AmcoReport r = check_amco(inst.algebra, inst.network, o.epoch, p, detail::pick_mode(inst.algebra, o));
  CommandResult res;
  res.report = {{"command", "amco-check"},
                {"algebra", inst.kind},
                {"epoch", o.epoch},
                {"participants", p.members()},
                {"established", r.established},
                {"reason", r.reason},
                {"dissimilarity", r.dissimilarity},
                {"bound", r.bound},
                {"max_height", r.max_height},
                {"conditions", detail::report_json(r.conditions)}};
  if (r.fixed_point) res.report["fixed_point"] = *r.fixed_point;
  res.exit_code = (!r.established || r.conditions.any_failed()) ? exit_failure : exit_ok;
  detail::write_report(o, res.report);
  return res;
}

// ---------------------------------------------------------------------------
// experiment unique-fixed-point

/// Runs seeded unreliable schedules from random accordant starts. Per epoch,
/// k* is the largest pseudocycle count any run needed before its state
/// settled on a fixed point; every run whose epoch holds at least k*
/// pseudocycles must end that epoch in the same fixed point.
template <RoutingAlgebra A>
CommandResult cmd_experiment_unique_fixed_point(const Instance<A>& inst, const CommandOptions& o) {
  using W = weight_t<A>;
  using json = nlohmann::json;
  const A& alg = inst.algebra;
  const std::size_t horizon = o.horizon.value_or(inst.schedule.horizon);
  CommandResult res;
  res.report = {{"command", "experiment unique-fixed-point"}, {"algebra", inst.kind}, {"seed", o.seed},
                {"schedules", o.schedules},                   {"horizon", horizon}};

  if (detail::carrier_enumerable(alg)) {
    for (std::size_t e = 0; e < inst.epochs(); ++e) {
      const auto fr = is_free(alg, participating_topology(alg, inst.network, e, inst.participants[e]));
      if (!fr.free) {
        res.report["verdict"] = "refused";
        res.report["reason"] = "epoch " + std::to_string(e) + " is not free";
        res.exit_code = exit_failure;
        detail::write_report(o, res.report);
        return res;
      }
    }
  }

  std::vector<std::uint64_t> seeds;
  std::vector<std::vector<detail::EpochOutcome<W>>> runs;
  std::optional<std::ofstream> lines;
  if (o.out_dir) lines.emplace(detail::out_path(o, "runs.jsonl"));
  for (std::size_t k = 0; k < o.schedules; ++k) {
    const std::uint64_t seed = derive_seed(o.seed, k);
    rng_type rng(derive_seed(seed, 0));
    const RoutingState<A> X0 = detail::random_accordant(alg, inst.n, inst.participants[0], rng);
    const Schedule s = generate_schedule(inst.schedule_params(seed, horizon), inst.n).schedule;
    const auto delta = run_delta(alg, inst.network, s, X0);
    auto outcome = detail::epoch_outcomes(inst, s, delta, find_pseudocycles(s));
    if (lines) {
      json eps = json::array();
      for (const auto& oc : outcome) eps.push_back(detail::outcome_json(alg, oc));
      *lines << json{{"run", k}, {"seed", seed}, {"initial", detail::state_json(alg, X0)}, {"epochs", eps}}.dump() << "\n";
    }
    seeds.push_back(seed);
    runs.push_back(std::move(outcome));
  }

  bool ok = true;
  json epochs = json::array();
  const std::size_t epoch_count = runs.empty() ? 0 : runs.front().size();
  for (std::size_t idx = 0; idx < epoch_count; ++idx) {
    json ej{{"epoch", runs.front()[idx].epoch}};
    std::optional<std::size_t> k_star;
    std::size_t converged = 0;
    for (const auto& r : runs) {
      if (!r[idx].fixed_point) continue;
      ++converged;
      k_star = std::max(k_star.value_or(0), r[idx].pseudocycles_before_stable);
    }
    ej["converged"] = converged;
    if (!k_star) {
      ej["verdict"] = "no-run-settled";
      epochs.push_back(ej);
      if (idx + 1 == epoch_count) ok = false;
      continue;
    }
    ej["k_star"] = *k_star;
    std::optional<std::size_t> first;
    std::size_t eligible = 0;
    std::string verdict = "unique";
    for (std::size_t k = 0; k < runs.size(); ++k) {
      const auto& oc = runs[k][idx];
      if (oc.pseudocycles < *k_star) continue;
      ++eligible;
      if (!oc.fixed_point) {
        verdict = "not-settled";
        ej["failing_seed"] = seeds[k];
        break;
      }
      if (!first) {
        first = k;
      } else if (runs[*first][idx].state != oc.state) {
        verdict = "divergent";
        ej["seeds"] = {seeds[*first], seeds[k]};
        break;
      }
    }
    if (first && verdict == "unique") {
      // The synchronous iteration from the identity must land on the same point.
      const std::size_t e = runs.front()[idx].epoch;
      if (const auto ref = detail::sync_fixed_point(inst, e, identity_state(alg, inst.n))) {
        ej["matches_sync"] = *ref == runs[*first][idx].state;
        if (*ref != runs[*first][idx].state) verdict = "differs-from-sync";
      }
    }
    ej["eligible"] = eligible;
    ej["verdict"] = verdict;
    if (verdict != "unique") ok = false;
    if (first) ej["fixed_point"] = detail::state_json(alg, runs[*first][idx].state);
    epochs.push_back(ej);
  }
  res.report["epochs"] = epochs;
  res.report["verdict"] = ok ? "unique" : "failed";
  res.exit_code = ok ? exit_ok : exit_failure;
  detail::write_report(o, res.report);
  return res;
}

// ---------------------------------------------------------------------------
// experiment count-to-convergence

/// Compares synchronous rounds with asynchronous ticks and pseudocycles
/// needed to settle, epoch by epoch, from the configured initial state.
template <RoutingAlgebra A>
CommandResult cmd_experiment_count_to_convergence(const Instance<A>& inst, const CommandOptions& o) {
  using W = weight_t<A>;
  using json = nlohmann::json;
  const A& alg = inst.algebra;
  const std::size_t horizon = o.horizon.value_or(inst.schedule.horizon);
  CommandResult res;
  res.report = {{"command", "experiment count-to-convergence"}, {"algebra", inst.kind}, {"seed", o.seed},
                {"schedules", o.schedules},                     {"horizon", horizon}};

  // Synchronous rounds per epoch, each epoch starting from the previous epoch's end.
  json sync = json::array();
  RoutingState<A> X = inst.initial;
  for (std::size_t e = 0; e < inst.epochs(); ++e) {
    const auto M = participating_topology(alg, inst.network, e, inst.participants[e]);
    const auto r = run_synchronous(alg, M, X, detail::sync_budget(alg, inst.n));
    if (const auto* c = std::get_if<Converged<W>>(&r)) {
      sync.push_back({{"epoch", e}, {"rounds", c->time}});
      X = c->state;
    } else {
      sync.push_back({{"epoch", e}, {"rounds", nullptr}});
      break;
    }
  }
  res.report["synchronous"] = sync;

  std::optional<std::ofstream> lines;
  if (o.out_dir) lines.emplace(detail::out_path(o, "runs.jsonl"));
  std::map<std::size_t, std::vector<const detail::EpochOutcome<W>*>> by_epoch;
  std::vector<std::vector<detail::EpochOutcome<W>>> runs;
  runs.reserve(o.schedules);
  for (std::size_t k = 0; k < o.schedules; ++k) {
    const std::uint64_t seed = derive_seed(o.seed, k);
    const Schedule s = generate_schedule(inst.schedule_params(seed, horizon), inst.n).schedule;
    const auto delta = run_delta(alg, inst.network, s, inst.initial);
    runs.push_back(detail::epoch_outcomes(inst, s, delta, find_pseudocycles(s)));
    if (lines) {
      json eps = json::array();
      for (const auto& oc : runs.back()) {
        eps.push_back({{"epoch", oc.epoch},
                       {"ticks", oc.stable_from - oc.first},
                       {"pseudocycles", oc.pseudocycles_before_stable},
                       {"fixed_point", oc.fixed_point}});
      }
      *lines << json{{"run", k}, {"seed", seed}, {"epochs", eps}}.dump() << "\n";
    }
  }
  for (const auto& r : runs)
    for (const auto& oc : r) by_epoch[oc.epoch].push_back(&oc);

  json summary = json::array();
  for (const auto& [e, list] : by_epoch) {
    std::size_t settled = 0, max_ticks = 0, max_cycles = 0, sum_ticks = 0;
    for (const auto* oc : list) {
      if (!oc->fixed_point) continue;
      ++settled;
      max_ticks = std::max(max_ticks, oc->stable_from - oc->first);
      max_cycles = std::max(max_cycles, oc->pseudocycles_before_stable);
      sum_ticks += oc->stable_from - oc->first;
    }
    json ej{{"epoch", e}, {"runs", list.size()}, {"settled", settled}};
    if (settled) {
      ej["max_ticks"] = max_ticks;
      ej["max_pseudocycles"] = max_cycles;
      ej["mean_ticks_milli"] = sum_ticks * 1000 / settled;
    }
    summary.push_back(ej);
  }
  res.report["asynchronous"] = summary;
  res.exit_code = exit_ok;
  detail::write_report(o, res.report);
  return res;
}

}  // namespace dbf
