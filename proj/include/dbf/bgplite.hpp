#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "dbf/algebra.hpp"
#include "dbf/error.hpp"
#include "dbf/hash.hpp"
#include "dbf/rng.hpp"
#include "dbf/text.hpp"
#include "dbf/topology.hpp"

namespace dbf::bgp {

using LocalPref = std::uint32_t;
using Community = std::uint32_t;

inline constexpr LocalPref max_pref = 0xFFFFFFFFu;

/// A route: invalid, or a local preference, a sorted set of communities and
/// the stored (possibly inflated) origin-first path.
struct Weight {
  bool valid = false;
  LocalPref lp = 0;
  std::vector<Community> comms;
  std::vector<NodeId> path;

  static Weight invalid() { return {}; }
  static Weight make(LocalPref lp, std::vector<Community> cs, std::vector<NodeId> path) {
    std::sort(cs.begin(), cs.end());
    cs.erase(std::unique(cs.begin(), cs.end()), cs.end());
    return {true, lp, std::move(cs), std::move(path)};
  }

  friend auto operator<=>(const Weight&, const Weight&) = default;
  friend bool operator==(const Weight&, const Weight&) = default;
  friend std::size_t hash_value(const Weight& w) {
    std::size_t seed = w.valid ? 3 : 5;
    hash_append(seed, w.lp);
    for (Community c : w.comms) hash_append(seed, c);
    hash_combine(seed, 0xC0FFEE);
    for (NodeId v : w.path) hash_append(seed, v);
    return seed;
  }
};

inline std::vector<NodeId> deflate(std::span<const NodeId> p) { return strip_consecutive_duplicates(p); }

/// Prepends n copies of the source; the empty path has no source to copy.
inline std::vector<NodeId> inflate(const std::vector<NodeId>& p, std::uint64_t n) {
  if (p.empty()) return p;
  std::vector<NodeId> out(n, p.front());
  out.insert(out.end(), p.begin(), p.end());
  return out;
}

// ---------------------------------------------------------------------------
// Condition and policy trees

struct Condition {
  enum class op { both, either, negate, in_path, in_comm, has_pref };
  op kind = op::in_path;
  std::uint64_t value = 0;
  std::shared_ptr<const Condition> lhs;
  std::shared_ptr<const Condition> rhs;

  friend bool operator==(const Condition& a, const Condition& b) {
    auto same = [](const auto& p, const auto& q) { return p == q || (p && q && *p == *q); };
    return a.kind == b.kind && a.value == b.value && same(a.lhs, b.lhs) && same(a.rhs, b.rhs);
  }
};
using ConditionPtr = std::shared_ptr<const Condition>;

inline ConditionPtr cond_and(ConditionPtr a, ConditionPtr b) {
  return std::make_shared<Condition>(Condition{Condition::op::both, 0, std::move(a), std::move(b)});
}
inline ConditionPtr cond_or(ConditionPtr a, ConditionPtr b) {
  return std::make_shared<Condition>(Condition{Condition::op::either, 0, std::move(a), std::move(b)});
}
inline ConditionPtr cond_not(ConditionPtr a) {
  return std::make_shared<Condition>(Condition{Condition::op::negate, 0, std::move(a), nullptr});
}
inline ConditionPtr in_path(NodeId i) { return std::make_shared<Condition>(Condition{Condition::op::in_path, i, {}, {}}); }
inline ConditionPtr in_comm(Community c) { return std::make_shared<Condition>(Condition{Condition::op::in_comm, c, {}, {}}); }
inline ConditionPtr has_pref(LocalPref v) { return std::make_shared<Condition>(Condition{Condition::op::has_pref, v, {}, {}}); }

/// Policy trees are immutable and share subtrees; equality is structural.
class Policy {
 public:
  enum class op { reject, decr, addc, delc, inflate, seq, when };

  Policy() : node_(std::make_shared<Node>()) {}

  static Policy reject() { return Policy(); }
  static Policy decr(std::uint64_t v) { return leaf(op::decr, v); }
  static Policy addc(Community c) { return leaf(op::addc, c); }
  static Policy delc(Community c) { return leaf(op::delc, c); }
  static Policy inflate(std::uint64_t n) { return leaf(op::inflate, n); }
  static Policy seq(Policy first, Policy second) {
    return Policy(std::make_shared<Node>(Node{op::seq, 0, nullptr, first.node_, second.node_}));
  }
  static Policy when(ConditionPtr c, Policy body) {
    return Policy(std::make_shared<Node>(Node{op::when, 0, std::move(c), body.node_, nullptr}));
  }

  [[nodiscard]] op kind() const noexcept { return node_->kind; }
  [[nodiscard]] std::uint64_t value() const noexcept { return node_->value; }
  [[nodiscard]] const Condition& condition() const { return *node_->cond; }
  [[nodiscard]] Policy first() const { return Policy(node_->a); }
  [[nodiscard]] Policy second() const { return Policy(node_->b); }

  friend bool operator==(const Policy& a, const Policy& b) { return equal(a.node_, b.node_); }

 private:
  struct Node {
    op kind = op::reject;
    std::uint64_t value = 0;
    ConditionPtr cond;
    std::shared_ptr<const Node> a;
    std::shared_ptr<const Node> b;
  };

  explicit Policy(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  static Policy leaf(op k, std::uint64_t v) { return Policy(std::make_shared<Node>(Node{k, v, nullptr, nullptr, nullptr})); }

  static bool equal(const std::shared_ptr<const Node>& p, const std::shared_ptr<const Node>& q) {
    if (p == q) return true;
    if (!p || !q) return false;
    if (p->kind != q->kind || p->value != q->value) return false;
    if ((p->cond == nullptr) != (q->cond == nullptr) || (p->cond && !(*p->cond == *q->cond))) return false;
    return equal(p->a, q->a) && equal(p->b, q->b);
  }

  std::shared_ptr<const Node> node_;
};

// ---------------------------------------------------------------------------
// Semantics

/// and/or/not recurse before the invalid case is reached, so a negation of
/// a basic test is true on an invalid route.
inline bool eval(const Condition& c, const Weight& x) {
  switch (c.kind) {
    case Condition::op::both: return eval(*c.lhs, x) && eval(*c.rhs, x);
    case Condition::op::either: return eval(*c.lhs, x) || eval(*c.rhs, x);
    case Condition::op::negate: return !eval(*c.lhs, x);
    default: break;
  }
  if (!x.valid) return false;
  switch (c.kind) {
    case Condition::op::in_path: return std::find(x.path.begin(), x.path.end(), c.value) != x.path.end();
    case Condition::op::in_comm: return std::binary_search(x.comms.begin(), x.comms.end(), c.value);
    case Condition::op::has_pref: return x.lp == c.value;
    default: return false;
  }
}

inline Weight apply(const Policy& pol, const Weight& x) {
  if (!x.valid) return x;
  switch (pol.kind()) {
    case Policy::op::reject: return Weight::invalid();
    case Policy::op::decr: {
      Weight y = x;
      y.lp = pol.value() >= x.lp ? 0 : static_cast<LocalPref>(x.lp - pol.value());
      return y;
    }
    case Policy::op::addc: {
      Weight y = x;
      const auto c = static_cast<Community>(pol.value());
      auto it = std::lower_bound(y.comms.begin(), y.comms.end(), c);
      if (it == y.comms.end() || *it != c) y.comms.insert(it, c);
      return y;
    }
    case Policy::op::delc: {
      Weight y = x;
      std::erase(y.comms, static_cast<Community>(pol.value()));
      return y;
    }
    case Policy::op::inflate: {
      Weight y = x;
      y.path = inflate(x.path, pol.value());
      return y;
    }
    case Policy::op::seq: return apply(pol.second(), apply(pol.first(), x));
    case Policy::op::when: return eval(pol.condition(), x) ? apply(pol.first(), x) : x;
  }
  return x;
}

/// Higher local preference, then shorter stored path, then the origin-first
/// lexicographically smaller path. Equal on all three, the smaller community
/// set wins so that ⊕ stays commutative.
inline Weight choose(const Weight& x, const Weight& y) {
  if (!y.valid) return x;
  if (!x.valid) return y;
  if (x.lp != y.lp) return x.lp > y.lp ? x : y;
  if (x.path.size() != y.path.size()) return x.path.size() < y.path.size() ? x : y;
  if (x.path != y.path) return x.path < y.path ? x : y;
  return x.comms <= y.comms ? x : y;
}

inline Weight extend(NodeId i, NodeId j, const Policy& pol, const Weight& x) {
  if (!x.valid) return x;
  const bool aligned = x.path.empty() ? i != j : x.path.front() == j;
  if (!aligned || std::find(x.path.begin(), x.path.end(), i) != x.path.end()) return Weight::invalid();
  Weight y = x;
  if (y.path.empty()) y.path = {i, j};
  else y.path.insert(y.path.begin(), i);
  return apply(pol, y);
}

inline SimplePath path(const Weight& x) {
  if (!x.valid) return SimplePath::invalid();
  return SimplePath::from_nodes(deflate(x.path));
}

// ---------------------------------------------------------------------------
// Text forms

inline std::string render(const Condition& c) {
  switch (c.kind) {
    case Condition::op::both: return "and(" + render(*c.lhs) + ", " + render(*c.rhs) + ")";
    case Condition::op::either: return "or(" + render(*c.lhs) + ", " + render(*c.rhs) + ")";
    case Condition::op::negate: return "not(" + render(*c.lhs) + ")";
    case Condition::op::in_path: return "inpath " + std::to_string(c.value);
    case Condition::op::in_comm: return "incomm " + std::to_string(c.value);
    case Condition::op::has_pref: return "haspref " + std::to_string(c.value);
  }
  return {};
}

inline std::string render(const Policy& p) {
  auto unit = [](const Policy& q) { return q.kind() == Policy::op::seq ? "(" + render(q) + ")" : render(q); };
  switch (p.kind()) {
    case Policy::op::reject: return "reject";
    case Policy::op::decr: return "decr " + std::to_string(p.value());
    case Policy::op::addc: return "addc " + std::to_string(p.value());
    case Policy::op::delc: return "delc " + std::to_string(p.value());
    case Policy::op::inflate: return "inflate " + std::to_string(p.value());
    case Policy::op::seq: return unit(p.first()) + " ; " + render(p.second());
    case Policy::op::when: return "if " + render(p.condition()) + " then " + unit(p.first());
  }
  return {};
}

namespace detail {

/// Recursive-descent reader for the policy and condition languages.
///
///   policy := unit (';' policy)?
///   unit   := 'reject' | 'decr' N | 'addc' N | 'delc' N | 'inflate' N
///           | 'if' cond 'then' unit | '(' policy ')'
///   cond   := 'and(' cond (',' cond)+ ')' | 'or(' cond (',' cond)+ ')'
///           | 'not(' cond ')' | 'inpath' N | 'incomm' N | 'haspref' N
class reader {
 public:
  explicit reader(std::string_view s) : s_(s) {}

  Policy whole_policy() {
    Policy p = policy();
    expect_end();
    return p;
  }
  ConditionPtr whole_condition() {
    ConditionPtr c = condition();
    expect_end();
    return c;
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& expected) const { throw parse_error(pos_, expected, s_); }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("'") + c + "'");
  }

  void expect_end() {
    skip();
    if (pos_ != s_.size()) fail("end of input");
  }

  std::string_view word() {
    skip();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    return s_.substr(start, pos_ - start);
  }

  std::uint64_t number(std::uint64_t max) {
    skip();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    auto v = dbf::detail::parse_u64(s_.substr(start, pos_ - start));
    if (!v || *v > max) {
      pos_ = start;
      fail("a number up to " + std::to_string(max));
    }
    return *v;
  }

  Policy policy() {
    Policy first = unit();
    if (accept(';')) return Policy::seq(first, policy());
    return first;
  }

  Policy unit() {
    if (accept('(')) {
      Policy p = policy();
      expect(')');
      return p;
    }
    const std::size_t at = (skip(), pos_);
    const auto w = word();
    if (w == "reject") return Policy::reject();
    if (w == "decr") return Policy::decr(number(max_pref));
    if (w == "addc") return Policy::addc(static_cast<Community>(number(max_pref)));
    if (w == "delc") return Policy::delc(static_cast<Community>(number(max_pref)));
    if (w == "inflate") return Policy::inflate(number(64));
    if (w == "if") {
      ConditionPtr c = condition();
      const std::size_t then_at = (skip(), pos_);
      if (word() != "then") {
        pos_ = then_at;
        fail("'then'");
      }
      return Policy::when(std::move(c), unit());
    }
    pos_ = at;
    fail("a policy (reject, decr, addc, delc, inflate, if or '(')");
  }

  ConditionPtr condition() {
    const std::size_t at = (skip(), pos_);
    const auto w = word();
    if (w == "and" || w == "or") {
      expect('(');
      ConditionPtr acc = condition();
      std::size_t count = 1;
      while (accept(',')) {
        acc = w == "and" ? cond_and(acc, condition()) : cond_or(acc, condition());
        ++count;
      }
      if (count < 2) fail("',' and a second condition");
      expect(')');
      return acc;
    }
    if (w == "not") {
      expect('(');
      ConditionPtr c = condition();
      expect(')');
      return cond_not(std::move(c));
    }
    if (w == "inpath") return in_path(number(max_pref));
    if (w == "incomm") return in_comm(static_cast<Community>(number(max_pref)));
    if (w == "haspref") return has_pref(static_cast<LocalPref>(number(max_pref)));
    pos_ = at;
    fail("a condition (and, or, not, inpath, incomm or haspref)");
  }
};

}  // namespace detail

inline Policy parse_policy(std::string_view s) { return detail::reader(s).whole_policy(); }
inline ConditionPtr parse_condition(std::string_view s) { return detail::reader(s).whole_condition(); }

/// "inf", or "<lp>:{c,...}:<path>" with the stored path, e.g. "100:{17}:0<0<1".
inline std::string render(const Weight& x) {
  if (!x.valid) return "inf";
  std::string out = std::to_string(x.lp) + ":{";
  for (std::size_t k = 0; k < x.comms.size(); ++k) out += (k ? "," : "") + std::to_string(x.comms[k]);
  return out + "}:" + render_node_sequence(x.path);
}

inline Weight parse_weight(std::string_view s, std::size_t n) {
  if (s == "inf" || s == "∞") return Weight::invalid();
  auto bad = [&](std::size_t pos, const std::string& what) -> Weight { throw parse_error(pos, what, s); };
  const auto c1 = s.find(':');
  if (c1 == std::string_view::npos) return bad(0, "'<lp>:{communities}:<path>' or 'inf'");
  const auto lp = dbf::detail::parse_u64(s.substr(0, c1));
  if (!lp || *lp > max_pref) return bad(0, "a local preference up to 4294967295");
  if (c1 + 1 >= s.size() || s[c1 + 1] != '{') return bad(c1 + 1, "'{'");
  const auto close = s.find('}', c1 + 2);
  if (close == std::string_view::npos) return bad(c1 + 2, "'}'");
  std::vector<Community> cs;
  std::string_view body = s.substr(c1 + 2, close - c1 - 2);
  std::size_t base = c1 + 2;
  while (!body.empty()) {
    const auto comma = body.find(',');
    const auto tok = body.substr(0, comma);
    const auto v = dbf::detail::parse_u64(tok);
    if (!v || *v > max_pref) return bad(base, "a community value");
    cs.push_back(static_cast<Community>(*v));
    if (comma == std::string_view::npos) break;
    body.remove_prefix(comma + 1);
    base += comma + 1;
  }
  if (close + 1 >= s.size() || s[close + 1] != ':') return bad(close + 1, "':'");
  auto nodes = parse_node_sequence(s.substr(close + 2));
  for (NodeId v : nodes) {
    if (v >= n) return bad(close + 2, "routers below " + std::to_string(n));
  }
  SimplePath::from_nodes(deflate(nodes));
  return Weight::make(static_cast<LocalPref>(*lp), std::move(cs), std::move(nodes));
}

// ---------------------------------------------------------------------------
// The algebra

/// The policy-rich path-vector algebra over n routers. Policies are arbitrary
/// trees, so the carrier and catalogs are not enumerable; `micro_domain`
/// gives a finite slice for exhaustive checks.
class BgpLite {
 public:
  using weight_type = Weight;
  using policy_type = Policy;

  explicit BgpLite(std::size_t n) : n_(n) {
    if (n == 0) throw error(errc::config_error, "bgplite needs at least one router");
  }

  Weight choose(const Weight& x, const Weight& y) const { return bgp::choose(x, y); }
  Weight extend(NodeId i, NodeId j, const Policy& f, const Weight& x) const { return bgp::extend(i, j, f, x); }
  Weight trivial() const { return Weight::make(max_pref, {}, {}); }
  Weight invalid() const { return Weight::invalid(); }
  Policy invalid_policy(NodeId, NodeId) const { return Policy::reject(); }
  std::size_t node_count() const { return n_; }
  SimplePath path(const Weight& x) const { return bgp::path(x); }

  std::string render(const Weight& x) const { return bgp::render(x); }
  Weight parse_weight(std::string_view s) const { return bgp::parse_weight(s, n_); }
  std::string policy_name(const Policy& f) const { return bgp::render(f); }
  Policy parse_policy(NodeId, NodeId, std::string_view s) const {
    Policy p = bgp::parse_policy(s);
    check_nodes(p);
    return p;
  }

  Weight sample_weight(rng_type& rng) const {
    static constexpr LocalPref prefs[] = {0, 1, 2, 3, 50, 100, 1000, max_pref};
    const LocalPref lp = coin(rng, 0.1) ? static_cast<LocalPref>(uniform_u64(rng, 0, max_pref))
                                        : prefs[uniform_index(rng, std::size(prefs))];
    std::vector<Community> cs;
    for (Community c = 1; c <= 4; ++c)
      if (coin(rng, 0.3)) cs.push_back(c);
    std::vector<NodeId> order(n_);
    for (NodeId v = 0; v < n_; ++v) order[v] = v;
    std::shuffle(order.begin(), order.end(), rng);
    std::size_t k = uniform_index(rng, n_ + 1);
    if (k == 1) k = 0;
    order.resize(k);
    std::vector<NodeId> stored;
    for (std::size_t a = 0; a < order.size(); ++a) {
      const std::size_t copies = a + 1 < order.size() && coin(rng, 0.2) ? 1 + uniform_index(rng, 3) : 1;
      stored.insert(stored.end(), copies, order[a]);
    }
    return Weight::make(lp, std::move(cs), std::move(stored));
  }

  Policy sample_policy(NodeId, NodeId, rng_type& rng) const { return random_policy(rng, 3); }

 private:
  std::size_t n_;

  void check_nodes(const Policy& p) const {
    switch (p.kind()) {
      case Policy::op::seq:
        check_nodes(p.first());
        check_nodes(p.second());
        break;
      case Policy::op::when:
        check_nodes(p.condition());
        check_nodes(p.first());
        break;
      default: break;
    }
  }
  void check_nodes(const Condition& c) const {
    if (c.kind == Condition::op::in_path && c.value >= n_) {
      throw error(errc::config_error, "inpath " + std::to_string(c.value) + " names a router outside the instance");
    }
    if (c.lhs) check_nodes(*c.lhs);
    if (c.rhs) check_nodes(*c.rhs);
  }

  ConditionPtr random_condition(rng_type& rng, int depth) const {
    switch (uniform_index(rng, depth > 0 ? 6 : 3)) {
      case 0: return in_path(uniform_index(rng, n_));
      case 1: return in_comm(static_cast<Community>(1 + uniform_index(rng, 4)));
      case 2: return has_pref(static_cast<LocalPref>(uniform_index(rng, 4)));
      case 3: return cond_and(random_condition(rng, depth - 1), random_condition(rng, depth - 1));
      case 4: return cond_or(random_condition(rng, depth - 1), random_condition(rng, depth - 1));
      default: return cond_not(random_condition(rng, depth - 1));
    }
  }

  Policy random_policy(rng_type& rng, int depth) const {
    if (uniform_index(rng, 20) == 0) return Policy::reject();
    switch (uniform_index(rng, depth > 0 ? 7 : 4)) {
      case 0: return Policy::decr(uniform_index(rng, 4));
      case 1: return Policy::addc(static_cast<Community>(1 + uniform_index(rng, 4)));
      case 2: return Policy::delc(static_cast<Community>(1 + uniform_index(rng, 4)));
      case 3: return Policy::inflate(uniform_index(rng, 3));
      case 4:
      case 5: return Policy::seq(random_policy(rng, depth - 1), random_policy(rng, depth - 1));
      default: return Policy::when(random_condition(rng, 2), random_policy(rng, depth - 1));
    }
  }
};

inline BgpLite make_bgplite_algebra(std::size_t n) { return BgpLite(n); }

/// A finite slice for exhaustive checks: local preferences 0..3, community
/// sets drawn from {1, 2}, every path over at most three routers together
/// with its once-inflated variant, and a fixed policy family.
inline restricted<BgpLite> micro_domain(std::size_t n = 3) {
  const BgpLite base(n);
  std::vector<std::vector<NodeId>> paths;
  for (const auto& p : all_simple_paths(n)) {
    paths.push_back(p.nodes());
    if (!p.nodes().empty()) paths.push_back(inflate(p.nodes(), 1));
  }
  const std::vector<std::vector<Community>> comm_sets{{}, {1}, {2}, {1, 2}};
  std::vector<Weight> ws;
  for (LocalPref lp = 0; lp <= 3; ++lp)
    for (const auto& cs : comm_sets)
      for (const auto& p : paths) ws.push_back(Weight::make(lp, cs, p));
  std::vector<Policy> fs;
  for (const char* text : {"decr 0", "decr 1", "decr 5", "addc 1", "delc 1", "inflate 1", "inflate 2",
                           "if incomm 1 then decr 2", "addc 2 ; inflate 1", "if and(inpath 1, not(haspref 3)) then reject",
                           "if or(incomm 2, haspref 0) then (delc 2 ; decr 1)"}) {
    fs.push_back(bgp::parse_policy(text));
  }
  return restricted<BgpLite>(base, std::move(ws), std::move(fs));
}

}  // namespace dbf::bgp

namespace dbf {
using bgp::BgpLite;
using bgp::make_bgplite_algebra;
}  // namespace dbf
