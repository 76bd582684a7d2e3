#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dbf/error.hpp"
#include "dbf/hash.hpp"

namespace dbf {

/// Dense router index in [0, n) for an instance with n routers.
using NodeId = std::size_t;

struct Edge {
  NodeId from = 0;
  NodeId to = 0;

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// A simple path, or the absent path ⊥.
///
/// Stored origin-first as a node sequence: the trivial path [] holds no nodes,
/// any other valid path holds at least two. Invariants (contiguity, no repeated
/// node) are enforced by every constructor, so a held SimplePath is always
/// well formed.
class SimplePath {
 public:
  /// The trivial path [].
  SimplePath() = default;

  static SimplePath invalid() {
    SimplePath p;
    p.valid_ = false;
    return p;
  }

  static SimplePath trivial() { return {}; }

  /// Builds a path from an origin-first node sequence; an empty sequence is [].
  /// Throws invalid_path for a single node, would_form_cycle for repeats.
  static SimplePath from_nodes(std::vector<NodeId> nodes) {
    if (nodes.size() == 1) {
      throw error(errc::invalid_path, "a non-trivial path needs at least one edge");
    }
    for (std::size_t a = 0; a < nodes.size(); ++a) {
      for (std::size_t b = a + 1; b < nodes.size(); ++b) {
        if (nodes[a] == nodes[b]) {
          throw error(errc::would_form_cycle,
                      "node " + std::to_string(nodes[a]) + " repeats in path");
        }
      }
    }
    SimplePath p;
    p.nodes_ = std::move(nodes);
    return p;
  }

  /// Builds a path from contiguous edges. Throws misaligned_edge on a gap.
  static SimplePath from_edges(std::span<const Edge> edges) {
    std::vector<NodeId> nodes;
    if (!edges.empty()) {
      nodes.push_back(edges.front().from);
      for (std::size_t k = 0; k < edges.size(); ++k) {
        if (edges[k].from != nodes.back()) {
          throw error(errc::misaligned_edge, "edges are not contiguous");
        }
        nodes.push_back(edges[k].to);
      }
    }
    return from_nodes(std::move(nodes));
  }

  [[nodiscard]] bool is_valid() const noexcept { return valid_; }
  [[nodiscard]] bool is_trivial() const noexcept { return valid_ && nodes_.empty(); }

  /// First node; empty for [] and ⊥.
  [[nodiscard]] std::optional<NodeId> origin() const noexcept {
    if (!valid_ || nodes_.empty()) return std::nullopt;
    return nodes_.front();
  }

  /// Number of edges; ⊥ reports 0.
  [[nodiscard]] std::size_t length() const noexcept {
    return nodes_.empty() ? 0 : nodes_.size() - 1;
  }

  [[nodiscard]] const std::vector<NodeId>& nodes() const noexcept { return nodes_; }

  [[nodiscard]] std::vector<Edge> edges() const {
    std::vector<Edge> out;
    for (std::size_t k = 0; k + 1 < nodes_.size(); ++k) out.push_back({nodes_[k], nodes_[k + 1]});
    return out;
  }

  [[nodiscard]] bool contains(NodeId i) const noexcept {
    return valid_ && std::find(nodes_.begin(), nodes_.end(), i) != nodes_.end();
  }

  /// e is aligned with this path when the path is trivial or e ends at its origin.
  [[nodiscard]] bool aligned_with(const Edge& e) const noexcept {
    if (!valid_) return false;
    return nodes_.empty() || nodes_.front() == e.to;
  }

  /// e :: this.
  [[nodiscard]] SimplePath prepend(const Edge& e) const {
    if (!valid_) throw error(errc::invalid_path, "cannot extend the absent path");
    if (!aligned_with(e)) {
      throw error(errc::misaligned_edge, "edge does not end at the path origin");
    }
    if (e.from == e.to || contains(e.from)) {
      throw error(errc::would_form_cycle,
                  "node " + std::to_string(e.from) + " already on the path");
    }
    SimplePath p;
    p.nodes_.reserve(nodes_.size() + 2);
    p.nodes_.push_back(e.from);
    if (nodes_.empty()) {
      p.nodes_.push_back(e.to);
    } else {
      p.nodes_.insert(p.nodes_.end(), nodes_.begin(), nodes_.end());
    }
    return p;
  }

  /// ⊥ sorts after every valid path; valid paths compare origin-first,
  /// element-wise, with a proper prefix first.
  friend std::strong_ordering operator<=>(const SimplePath& a, const SimplePath& b) {
    if (a.valid_ != b.valid_) return a.valid_ ? std::strong_ordering::less : std::strong_ordering::greater;
    return std::lexicographical_compare_three_way(a.nodes_.begin(), a.nodes_.end(),
                                                  b.nodes_.begin(), b.nodes_.end());
  }
  friend bool operator==(const SimplePath& a, const SimplePath& b) {
    return a.valid_ == b.valid_ && a.nodes_ == b.nodes_;
  }

  friend std::size_t hash_value(const SimplePath& p) {
    std::size_t seed = p.valid_ ? 1 : 2;
    for (NodeId v : p.nodes_) hash_append(seed, v);
    return seed;
  }

 private:
  bool valid_ = true;
  std::vector<NodeId> nodes_;
};

inline bool is_aligned(const Edge& e, const SimplePath& p) noexcept { return p.aligned_with(e); }

inline SimplePath concat(const Edge& e, const SimplePath& p) { return p.prepend(e); }

inline bool contains_node(const SimplePath& p, NodeId i) noexcept { return p.contains(i); }

/// Collapses every run of equal adjacent nodes to a single occurrence.
inline std::vector<NodeId> strip_consecutive_duplicates(std::span<const NodeId> raw) {
  std::vector<NodeId> out;
  out.reserve(raw.size());
  for (NodeId v : raw) {
    if (out.empty() || out.back() != v) out.push_back(v);
  }
  return out;
}

/// Joins nodes origin-first with '<', e.g. "0<1<2"; the empty sequence is "[]".
inline std::string render_node_sequence(std::span<const NodeId> nodes) {
  if (nodes.empty()) return "[]";
  std::string out;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (k != 0) out += '<';
    out += std::to_string(nodes[k]);
  }
  return out;
}

inline std::string to_string(const SimplePath& p) {
  if (!p.is_valid()) return "⊥";
  return render_node_sequence(p.nodes());
}

/// Parses "[]" or "a<b<...". Throws parse_error on malformed text.
inline std::vector<NodeId> parse_node_sequence(std::string_view text) {
  if (text == "[]") return {};
  std::vector<NodeId> out;
  std::size_t pos = 0;
  while (true) {
    std::size_t start = pos;
    NodeId v = 0;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
      v = v * 10 + static_cast<NodeId>(text[pos] - '0');
      ++pos;
    }
    if (pos == start) throw parse_error(pos, "node index", text);
    out.push_back(v);
    if (pos == text.size()) break;
    if (text[pos] != '<') throw parse_error(pos, "'<'", text);
    ++pos;
  }
  return out;
}

inline SimplePath parse_simple_path(std::string_view text) {
  if (text == "⊥" || text == "bot") return SimplePath::invalid();
  return SimplePath::from_nodes(parse_node_sequence(text));
}

/// Every simple path over routers [0, n), including [], in sorted order.
inline std::vector<SimplePath> all_simple_paths(std::size_t n) {
  std::vector<SimplePath> paths{SimplePath::trivial()};
  std::vector<std::vector<NodeId>> frontier;
  for (NodeId v = 0; v < n; ++v) frontier.push_back({v});
  while (!frontier.empty()) {
    std::vector<std::vector<NodeId>> next;
    for (const auto& seq : frontier) {
      for (NodeId v = 0; v < n; ++v) {
        if (std::find(seq.begin(), seq.end(), v) != seq.end()) continue;
        auto longer = seq;
        longer.push_back(v);
        paths.push_back(SimplePath::from_nodes(longer));
        next.push_back(std::move(longer));
      }
    }
    frontier = std::move(next);
  }
  std::sort(paths.begin(), paths.end());
  return paths;
}

}  // namespace dbf

template <>
struct std::hash<dbf::SimplePath> {
  std::size_t operator()(const dbf::SimplePath& p) const noexcept { return hash_value(p); }
};
