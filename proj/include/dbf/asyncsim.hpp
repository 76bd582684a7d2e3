#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "dbf/algebra.hpp"
#include "dbf/error.hpp"
#include "dbf/protocol.hpp"
#include "dbf/rng.hpp"
#include "dbf/text.hpp"

namespace dbf {

/// Membership set over the routers [0, n).
class NodeSet {
 public:
  NodeSet() = default;
  explicit NodeSet(std::size_t n) : bits_(n, 0) {}

  static NodeSet all(std::size_t n) {
    NodeSet s(n);
    std::fill(s.bits_.begin(), s.bits_.end(), 1);
    return s;
  }

  static NodeSet of(std::size_t n, const std::vector<NodeId>& members) {
    NodeSet s(n);
    for (NodeId v : members) s.insert(v);
    return s;
  }

  [[nodiscard]] std::size_t universe() const noexcept { return bits_.size(); }
  [[nodiscard]] bool contains(NodeId v) const noexcept { return v < bits_.size() && bits_[v] != 0; }

  void insert(NodeId v) {
    if (v >= bits_.size()) throw error(errc::config_error, "router " + std::to_string(v) + " outside the instance");
    bits_[v] = 1;
  }

  [[nodiscard]] std::vector<NodeId> members() const {
    std::vector<NodeId> out;
    for (NodeId v = 0; v < bits_.size(); ++v)
      if (bits_[v]) out.push_back(v);
    return out;
  }

  [[nodiscard]] bool empty() const noexcept {
    return std::none_of(bits_.begin(), bits_.end(), [](char b) { return b != 0; });
  }

  friend bool operator==(const NodeSet&, const NodeSet&) = default;

 private:
  std::vector<char> bits_;
};

/// A finite realisation of (α, β, η, π) over times 0..horizon.
/// Index 0 of `alpha` and `beta` is present but unused.
struct Schedule {
  std::size_t n = 0;
  std::size_t horizon = 0;
  std::vector<NodeSet> alpha;
  std::vector<std::vector<std::size_t>> beta;  // beta[t][i * n + j]
  std::vector<std::size_t> eta;
  std::vector<NodeSet> pi;

  [[nodiscard]] std::size_t b(std::size_t t, NodeId i, NodeId j) const { return beta[t][i * n + j]; }
  std::size_t& b(std::size_t t, NodeId i, NodeId j) { return beta[t][i * n + j]; }
  [[nodiscard]] const NodeSet& rho(std::size_t t) const { return pi.at(eta.at(t)); }

  friend bool operator==(const Schedule&, const Schedule&) = default;
};

/// Empty schedule shell: no activations, β = 0, a single epoch with everyone.
inline Schedule blank_schedule(std::size_t n, std::size_t horizon) {
  Schedule s;
  s.n = n;
  s.horizon = horizon;
  s.alpha.assign(horizon + 1, NodeSet(n));
  s.beta.assign(horizon + 1, std::vector<std::size_t>(n * n, 0));
  s.eta.assign(horizon + 1, 0);
  s.pi.assign(1, NodeSet::all(n));
  return s;
}

/// α(t) = V, β(t,i,j) = t − 1, one epoch with everyone.
inline Schedule synchronous_schedule(std::size_t n, std::size_t horizon) {
  Schedule s = blank_schedule(n, horizon);
  for (std::size_t t = 1; t <= horizon; ++t) {
    s.alpha[t] = NodeSet::all(n);
    std::fill(s.beta[t].begin(), s.beta[t].end(), t - 1);
  }
  return s;
}

struct Violation {
  std::string rule;  // "S1", "S2" or "shape"
  std::size_t t = 0;
  std::optional<NodeId> i;
  std::optional<NodeId> j;
  std::string message;
};

inline std::vector<Violation> validate_schedule(const Schedule& s) {
  std::vector<Violation> out;
  const std::size_t len = s.horizon + 1;
  if (s.alpha.size() != len || s.beta.size() != len || s.eta.size() != len) {
    out.push_back({"shape", 0, {}, {}, "alpha, beta and eta must cover times 0..horizon"});
    return out;
  }
  for (std::size_t t = 0; t < len; ++t) {
    if (s.beta[t].size() != s.n * s.n) out.push_back({"shape", t, {}, {}, "beta row has the wrong size"});
    if (s.alpha[t].universe() != s.n) out.push_back({"shape", t, {}, {}, "alpha set has the wrong universe"});
    if (s.eta[t] >= s.pi.size()) out.push_back({"shape", t, {}, {}, "eta names an epoch without participants"});
  }
  for (const auto& p : s.pi) {
    if (p.universe() != s.n) out.push_back({"shape", 0, {}, {}, "participant set has the wrong universe"});
  }
  if (!out.empty()) return out;
  for (std::size_t t = 1; t < len; ++t) {
    for (NodeId i = 0; i < s.n; ++i) {
      for (NodeId j = 0; j < s.n; ++j) {
        if (s.b(t, i, j) + 1 > t) {
          out.push_back({"S1", t, i, j,
                         "beta(" + std::to_string(t) + "," + std::to_string(i) + "," + std::to_string(j) + ") = " +
                             std::to_string(s.b(t, i, j)) + " is not before " + std::to_string(t)});
        }
      }
    }
    if (s.eta[t] < s.eta[t - 1]) {
      out.push_back({"S2", t, {}, {}, "epoch decreases from " + std::to_string(s.eta[t - 1]) + " to " + std::to_string(s.eta[t])});
    }
  }
  return out;
}

template <RoutingAlgebra A>
using NetworkOverEpochs = std::vector<AdjacencyMatrix<A>>;

/// A^{ep}: N^e on links between participants, f∞ everywhere else.
template <RoutingAlgebra A>
AdjacencyMatrix<A> participating_topology(const A& alg, const NetworkOverEpochs<A>& N, std::size_t e, const NodeSet& p) {
  if (e >= N.size()) {
    throw error(errc::epoch_out_of_range, "epoch " + std::to_string(e) + " of " + std::to_string(N.size()));
  }
  AdjacencyMatrix<A> M = N[e];
  for (NodeId i = 0; i < M.size(); ++i)
    for (NodeId j = 0; j < M.size(); ++j)
      if (!p.contains(i) || !p.contains(j)) M(i, j) = alg.invalid_policy(i, j);
  return M;
}

/// The asynchronous state function δ^0..δ^horizon, evaluated forwards.
///
/// Every k is consulted through β(t,i,k), including non-neighbours; the f∞
/// entries of A^t make their contribution ∞̄, so this matches the model
/// without special-casing adjacency.
template <RoutingAlgebra A>
std::vector<RoutingState<A>> run_delta(const A& alg, const NetworkOverEpochs<A>& N, const Schedule& s,
                                       const RoutingState<A>& X0) {
  if (auto v = validate_schedule(s); !v.empty()) {
    throw error(errc::invalid_schedule, v.front().rule + " at t=" + std::to_string(v.front().t) + ": " + v.front().message);
  }
  const std::size_t n = s.n;
  detail::require_same_size(X0.size(), n);
  for (const auto& M : N) detail::require_same_size(M.size(), n);
  for (std::size_t t = 0; t <= s.horizon; ++t) {
    if (s.eta[t] >= N.size()) throw error(errc::epoch_out_of_range, "schedule reaches epoch " + std::to_string(s.eta[t]));
  }

  const RoutingState<A> I = identity_state(alg, n);
  std::vector<RoutingState<A>> delta;
  delta.reserve(s.horizon + 1);
  std::map<std::size_t, AdjacencyMatrix<A>> topo;
  auto topology_at = [&](std::size_t t) -> const AdjacencyMatrix<A>& {
    const std::size_t e = s.eta[t];
    auto it = topo.find(e);
    if (it == topo.end()) it = topo.emplace(e, participating_topology(alg, N, e, s.pi[e])).first;
    return it->second;
  };

  for (std::size_t t = 0; t <= s.horizon; ++t) {
    RoutingState<A> X(n, alg.invalid());
    const NodeSet& now = s.rho(t);
    for (NodeId i = 0; i < n; ++i) {
      if (!now.contains(i)) {
        X.set_row(i, I.row(i));
      } else if (t == 0 || !s.rho(t - 1).contains(i)) {
        X.set_row(i, X0.row(i));
      } else if (!s.alpha[t].contains(i)) {
        X.set_row(i, delta[t - 1].row(i));
      } else {
        auto rows = [&](std::size_t k) { return delta[s.b(t, i, k)].row(k); };
        const auto r = step_row(alg, topology_at(t), i, rows);
        X.set_row(i, r);
      }
    }
    delta.push_back(std::move(X));
  }
  return delta;
}

// ---------------------------------------------------------------------------
// Pseudocycles

struct Interval {
  std::size_t start = 0;
  std::size_t end = 0;
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Greedy left-to-right decomposition into dynamic pseudocycles.
///
/// Consecutive intervals share an endpoint. When no pseudocycle starting at
/// the cursor ends inside its epoch, the cursor jumps to the next epoch. An
/// epoch with no participants counts each unit step as a pseudocycle.
inline std::vector<Interval> find_pseudocycles(const Schedule& s) {
  const std::size_t T = s.horizon;
  const std::size_t n = s.n;
  std::vector<Interval> out;
  if (T == 0) return out;

  // suffix_min[i][t] = min over t' in [max(t,1), T] and all j of β(t',i,j);
  // an expiry period [c, t] exists iff suffix_min[i][t] >= c.
  std::vector<std::vector<std::size_t>> suffix_min(n, std::vector<std::size_t>(T + 2, static_cast<std::size_t>(-1)));
  for (NodeId i = 0; i < n; ++i) {
    for (std::size_t t = T; t >= 1; --t) {
      std::size_t m = suffix_min[i][t + 1];
      for (NodeId j = 0; j < n; ++j) m = std::min(m, s.b(t, i, j));
      suffix_min[i][t] = m;
    }
    suffix_min[i][0] = suffix_min[i][1];
  }
  // next_act[i][t] = least t' >= max(t,1) with i ∈ α(t'), or T+1.
  std::vector<std::vector<std::size_t>> next_act(n, std::vector<std::size_t>(T + 2, T + 1));
  for (NodeId i = 0; i < n; ++i) {
    for (std::size_t t = T; t >= 1; --t) next_act[i][t] = s.alpha[t].contains(i) ? t : next_act[i][t + 1];
    next_act[i][0] = next_act[i][1];
  }
  // epoch_end[t] = last time sharing t's epoch.
  std::vector<std::size_t> epoch_end(T + 1, T);
  for (std::size_t t = T; t-- > 0;) epoch_end[t] = s.eta[t] == s.eta[t + 1] ? epoch_end[t + 1] : t;

  std::size_t c = 0;
  while (c < T) {
    const std::size_t last = epoch_end[c];
    std::optional<std::size_t> t2;
    const NodeSet& p = s.rho(c);
    if (p.empty()) {
      if (c + 1 <= last) t2 = c + 1;
    } else {
      std::size_t worst = c;
      bool ok = true;
      for (NodeId i : p.members()) {
        std::size_t e = c;
        while (e <= last && suffix_min[i][e] < c) ++e;
        if (e > last) {
          ok = false;
          break;
        }
        const std::size_t a = next_act[i][e];
        if (a > last) {
          ok = false;
          break;
        }
        worst = std::max(worst, a);
      }
      if (ok) t2 = worst;
    }
    if (t2) {
      out.push_back({c, *t2});
      c = *t2;
    } else {
      c = last + 1;
    }
  }
  return out;
}

/// Number of intervals in `cycles` lying wholly inside [from, to].
inline std::size_t count_pseudocycles_within(const std::vector<Interval>& cycles, std::size_t from, std::size_t to) {
  return static_cast<std::size_t>(std::count_if(cycles.begin(), cycles.end(), [&](const Interval& iv) {
    return iv.start >= from && iv.end <= to;
  }));
}

// ---------------------------------------------------------------------------
// Generation

struct ScheduleParams {
  std::uint64_t seed = 0;
  std::size_t horizon = 50;
  double activation = 1.0;
  std::size_t delay_bound = 1;
  double loss = 0.0;
  double duplication = 0.0;
  std::vector<std::size_t> epoch_starts;     // times at which epochs 1, 2, ... begin
  std::vector<std::vector<NodeId>> participants;  // per epoch; missing entries mean everyone
};

struct GeneratedSchedule {
  Schedule schedule;
  std::vector<Interval> pseudocycles;
};

/// Builds a seed-deterministic schedule by simulating unreliable channels.
///
/// At every tick s < horizon each router sends its table to every router,
/// itself included. Each copy is lost with probability `loss`, otherwise it
/// arrives after a uniform delay in [1, delay_bound]; with probability
/// `duplication` a second independent copy is sent. β(t,i,j) is the send time
/// of the message from j that most recently arrived at i, or 0 before any
/// arrival. Among messages arriving in the same tick the newest wins.
inline GeneratedSchedule generate_schedule(const ScheduleParams& params, std::size_t n) {
  if (params.delay_bound < 1) throw error(errc::config_error, "delay bound must be at least 1");
  for (double p : {params.activation, params.loss, params.duplication}) {
    if (!(p >= 0.0 && p <= 1.0)) throw error(errc::config_error, "probabilities must lie in [0,1]");
  }
  const std::size_t T = params.horizon;
  Schedule s = blank_schedule(n, T);
  const std::size_t epochs = params.epoch_starts.size() + 1;
  for (std::size_t k = 0; k < params.epoch_starts.size(); ++k) {
    const std::size_t b = params.epoch_starts[k];
    if (b == 0 || (k > 0 && b <= params.epoch_starts[k - 1])) {
      throw error(errc::config_error, "epoch start times must be positive and increasing");
    }
  }
  s.pi.clear();
  for (std::size_t e = 0; e < epochs; ++e) {
    s.pi.push_back(e < params.participants.size() ? NodeSet::of(n, params.participants[e]) : NodeSet::all(n));
  }
  for (std::size_t t = 0; t <= T; ++t) {
    s.eta[t] = static_cast<std::size_t>(std::upper_bound(params.epoch_starts.begin(), params.epoch_starts.end(), t) -
                                        params.epoch_starts.begin());
  }

  rng_type rng(params.seed);
  // arrivals[t] lists (channel, send time) for messages landing at t.
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> arrivals(T + 1);
  for (std::size_t sent = 0; sent < T; ++sent) {
    for (std::size_t ch = 0; ch < n * n; ++ch) {
      const int copies = coin(rng, params.duplication) ? 2 : 1;
      for (int c = 0; c < copies; ++c) {
        if (coin(rng, params.loss)) continue;
        const std::size_t d = static_cast<std::size_t>(uniform_u64(rng, 1, params.delay_bound));
        if (sent + d <= T) arrivals[sent + d].emplace_back(ch, sent);
      }
    }
  }
  std::vector<std::size_t> latest(n * n, 0);
  for (std::size_t t = 1; t <= T; ++t) {
    std::vector<std::optional<std::size_t>> landed(n * n);
    for (const auto& [ch, sent] : arrivals[t]) landed[ch] = std::max(landed[ch].value_or(0), sent);
    for (std::size_t ch = 0; ch < n * n; ++ch)
      if (landed[ch]) latest[ch] = *landed[ch];
    s.beta[t] = latest;
    for (NodeId i = 0; i < n; ++i)
      if (coin(rng, params.activation)) s.alpha[t].insert(i);
  }
  GeneratedSchedule g{std::move(s), {}};
  g.pseudocycles = find_pseudocycles(g.schedule);
  return g;
}

// ---------------------------------------------------------------------------
// Text form
//
//   dbf-schedule 1
//   n 2
//   horizon 10
//   pi 0 0,1
//   t=0 eta=0
//   t=1 eta=0 alpha=0,1 beta=0,0|0,0
//
// `-` stands for an empty set; beta rows are separated by '|'.

namespace detail {

inline std::string join_nodes(const std::vector<NodeId>& v) {
  if (v.empty()) return "-";
  std::string out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) out += ',';
    out += std::to_string(v[k]);
  }
  return out;
}

inline std::vector<std::size_t> split_numbers(std::string_view text, char sep, std::size_t line) {
  std::vector<std::size_t> out;
  if (text == "-" || text.empty()) return out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t next = std::min(text.find(sep, pos), text.size());
    auto v = parse_u64(text.substr(pos, next - pos));
    if (!v) throw error(errc::parse_error, "line " + std::to_string(line) + ": bad number in '" + std::string(text) + "'");
    out.push_back(static_cast<std::size_t>(*v));
    pos = next + 1;
  }
  return out;
}

}  // namespace detail

inline void write_schedule(std::ostream& os, const Schedule& s) {
  os << "dbf-schedule 1\n";
  os << "n " << s.n << "\n";
  os << "horizon " << s.horizon << "\n";
  for (std::size_t e = 0; e < s.pi.size(); ++e) os << "pi " << e << " " << detail::join_nodes(s.pi[e].members()) << "\n";
  for (std::size_t t = 0; t <= s.horizon; ++t) {
    os << "t=" << t << " eta=" << s.eta[t];
    if (t > 0) {
      os << " alpha=" << detail::join_nodes(s.alpha[t].members()) << " beta=";
      for (NodeId i = 0; i < s.n; ++i) {
        if (i) os << '|';
        for (NodeId j = 0; j < s.n; ++j) {
          if (j) os << ',';
          os << s.b(t, i, j);
        }
      }
    }
    os << "\n";
  }
}

inline std::string schedule_to_string(const Schedule& s) {
  std::ostringstream os;
  write_schedule(os, s);
  return os.str();
}

/// Reads the text form. Shape problems raise ParseError; S1/S2 are left to
/// validate_schedule so that invalid traces can still be loaded and reported.
inline Schedule read_schedule(std::istream& is) {
  Schedule s;
  std::string line;
  std::size_t lineno = 0;
  bool have_n = false, have_h = false;
  auto fail = [&](const std::string& what) {
    throw error(errc::parse_error, "schedule line " + std::to_string(lineno) + ": " + what);
  };
  std::map<std::size_t, NodeSet> pis;
  std::vector<bool> seen_t;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string head;
    ls >> head;
    if (head == "dbf-schedule") {
      std::string version;
      ls >> version;
      if (version != "1") fail("unsupported version " + version);
    } else if (head == "n") {
      ls >> s.n;
      have_n = true;
    } else if (head == "horizon") {
      if (!have_n) fail("'n' must precede 'horizon'");
      ls >> s.horizon;
      have_h = true;
      s.alpha.assign(s.horizon + 1, NodeSet(s.n));
      s.beta.assign(s.horizon + 1, std::vector<std::size_t>(s.n * s.n, 0));
      s.eta.assign(s.horizon + 1, 0);
      seen_t.assign(s.horizon + 1, false);
    } else if (head == "pi") {
      if (!have_n) fail("'n' must precede 'pi'");
      std::size_t e = 0;
      std::string members;
      ls >> e >> members;
      std::vector<NodeId> v;
      for (auto x : detail::split_numbers(members, ',', lineno)) v.push_back(x);
      pis[e] = NodeSet::of(s.n, v);
    } else if (head.rfind("t=", 0) == 0) {
      if (!have_h) fail("'horizon' must precede time rows");
      auto t = detail::parse_u64(std::string_view(head).substr(2));
      if (!t || *t > s.horizon) fail("time out of range");
      seen_t[*t] = true;
      std::string field;
      while (ls >> field) {
        const auto eq = field.find('=');
        if (eq == std::string::npos) fail("expected key=value, got '" + field + "'");
        const std::string key = field.substr(0, eq);
        const std::string_view val = std::string_view(field).substr(eq + 1);
        if (key == "eta") {
          auto v = detail::parse_u64(val);
          if (!v) fail("bad eta");
          s.eta[*t] = *v;
        } else if (key == "alpha") {
          std::vector<NodeId> v;
          for (auto x : detail::split_numbers(val, ',', lineno)) v.push_back(x);
          s.alpha[*t] = NodeSet::of(s.n, v);
        } else if (key == "beta") {
          std::vector<std::size_t> flat;
          std::size_t rows = 0;
          std::size_t pos = 0;
          while (pos <= val.size()) {
            const std::size_t next = std::min(val.find('|', pos), val.size());
            auto row = detail::split_numbers(val.substr(pos, next - pos), ',', lineno);
            if (row.size() != s.n) fail("beta row must have n entries");
            flat.insert(flat.end(), row.begin(), row.end());
            ++rows;
            pos = next + 1;
          }
          if (rows != s.n) fail("beta must have n rows");
          s.beta[*t] = std::move(flat);
        } else {
          fail("unknown key '" + key + "'");
        }
      }
    } else {
      fail("unknown directive '" + head + "'");
    }
  }
  if (!have_h) throw error(errc::parse_error, "schedule lacks a horizon");
  for (std::size_t t = 0; t <= s.horizon; ++t) {
    if (!seen_t[t]) throw error(errc::parse_error, "schedule lacks a row for t=" + std::to_string(t));
  }
  if (pis.empty()) pis[0] = NodeSet::all(s.n);
  for (std::size_t e = 0; e < pis.size(); ++e) {
    if (!pis.count(e)) throw error(errc::parse_error, "participant sets must be numbered 0.." + std::to_string(pis.size() - 1));
    s.pi.push_back(pis[e]);
  }
  return s;
}

}  // namespace dbf
