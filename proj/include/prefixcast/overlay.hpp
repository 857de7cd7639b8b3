#pragma once

// Static Pastry-style overlay: uniform-random node keys, prefix routing
// tables completed from global knowledge, and key-based unicast routing.
// There is no leaf set; complete tables make prefix routing sufficient.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <ostream>
#include <ranges>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "prefixcast/error.hpp"
#include "prefixcast/keyspace.hpp"

namespace prefixcast {

// Position of a node in its network; nodes are stored in ascending key order.
enum class NodeIndex : std::uint32_t {};

constexpr std::size_t to_size(NodeIndex i) { return static_cast<std::size_t>(i); }
constexpr NodeIndex node_index(std::size_t i) { return static_cast<NodeIndex>(i); }

// l rows x k columns of optional node references. Rows are 1-based: row i
// holds nodes sharing exactly i-1 leading digits with the owner, column j
// the digit those nodes carry at position i-1. Storage grows only as far as
// the deepest populated row.
class RoutingTable {
 public:
  RoutingTable(int rows, int columns) : rows_(rows), columns_(columns) {}

  int rows() const { return rows_; }
  int columns() const { return columns_; }

  std::optional<NodeIndex> entry(int row, int column) const {
    check(row, column);
    const std::size_t slot = offset(row, column);
    if (slot >= slots_.size() || slots_[slot] == kEmpty) return std::nullopt;
    return static_cast<NodeIndex>(slots_[slot]);
  }

  void set(int row, int column, std::optional<NodeIndex> value) {
    check(row, column);
    const std::size_t slot = offset(row, column);
    if (slot >= slots_.size()) {
      if (!value) return;
      slots_.resize(static_cast<std::size_t>(row) * static_cast<std::size_t>(columns_), kEmpty);
    }
    slots_[slot] = value ? static_cast<std::uint32_t>(*value) : kEmpty;
  }

  // Deepest row that may hold an entry; rows beyond it are all empty.
  int stored_rows() const { return static_cast<int>(slots_.size() / static_cast<std::size_t>(columns_)); }

  std::size_t entry_count() const {
    return static_cast<std::size_t>(std::count_if(slots_.begin(), slots_.end(),
                                                  [](std::uint32_t s) { return s != kEmpty; }));
  }

 private:
  static constexpr std::uint32_t kEmpty = 0xffffffffu;

  void check(int row, int column) const {
    if (row < 1 || row > rows_ || column < 0 || column >= columns_)
      throw IndexError("routing table slot out of range");
  }
  std::size_t offset(int row, int column) const {
    return static_cast<std::size_t>(row - 1) * static_cast<std::size_t>(columns_) +
           static_cast<std::size_t>(column);
  }

  int rows_;
  int columns_;
  std::vector<std::uint32_t> slots_;
};

struct OverlayNode {
  Key id;
  RoutingTable routing_table;
};

class OverlayNetwork {
 public:
  const KeyspaceParams& params() const { return params_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t size() const { return nodes_.size(); }

  const OverlayNode& node(NodeIndex i) const { return nodes_.at(to_size(i)); }
  const Key& key(NodeIndex i) const { return node(i).id; }
  const RoutingTable& table(NodeIndex i) const { return node(i).routing_table; }
  std::span<const OverlayNode> nodes() const { return nodes_; }

  std::optional<NodeIndex> find(const Key& key) const {
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), key,
                               [](const OverlayNode& n, const Key& k) { return n.id < k; });
    if (it == nodes_.end() || it->id != key) return std::nullopt;
    return node_index(static_cast<std::size_t>(it - nodes_.begin()));
  }

  // Copy with one routing entry cleared. Used for fault-injection tests only.
  OverlayNetwork with_entry_removed(NodeIndex owner, int row, int column) const {
    OverlayNetwork copy = *this;
    copy.nodes_.at(to_size(owner)).routing_table.set(row, column, std::nullopt);
    return copy;
  }

 private:
  friend OverlayNetwork make_network(std::vector<Key> keys, std::uint64_t seed);
  friend OverlayNetwork fill_routing_tables(OverlayNetwork net);

  KeyspaceParams params_;
  std::uint64_t seed_ = 0;
  std::vector<OverlayNode> nodes_;
};

// Fills every routing table from the node registry. A slot (i, j) gets the
// candidate numerically closest to the owner, ties toward the smaller key.
// Candidates for a slot form a contiguous run of the sorted registry lying
// entirely on one side of the owner, so the closest is the run end facing it.
inline OverlayNetwork fill_routing_tables(OverlayNetwork net) {
  auto& nodes = net.nodes_;
  const int l = net.params_.digits_per_key();
  const int k = net.params_.alphabet_size();
  for (auto& n : nodes) n.routing_table = RoutingTable(l, k);

  for (std::size_t owner = 0; owner < nodes.size(); ++owner) {
    const Key& id = nodes[owner].id;
    RoutingTable& table = nodes[owner].routing_table;
    // [lo, hi) holds the nodes sharing the owner's first (row - 1) digits.
    std::size_t lo = 0;
    std::size_t hi = nodes.size();
    for (int row = 1; row <= l && hi - lo > 1; ++row) {
      const int pos = row - 1;
      auto digit_of = [&](std::size_t i) { return int(nodes[i].id.digits()[static_cast<std::size_t>(pos)]); };
      const int own = int(id.digits()[static_cast<std::size_t>(pos)]);
      const std::size_t row_hi = hi;
      std::size_t begin = lo;
      for (int col = 0; col < k && begin < row_hi; ++col) {
        auto run = std::views::iota(begin, row_hi);
        const std::size_t end = *std::ranges::partition_point(run, [&](std::size_t i) { return digit_of(i) <= col; });
        if (end > begin) {
          if (col < own) table.set(row, col, node_index(end - 1));
          else if (col > own) table.set(row, col, node_index(begin));
          else { lo = begin; hi = end; }
        }
        begin = end;
      }
      if (begin != row_hi) throw ContractViolation("registry not sorted");
    }
  }
  return net;
}

// Network over an explicit key set. Keys are sorted; duplicates are rejected.
inline OverlayNetwork make_network(std::vector<Key> keys, std::uint64_t seed = 0) {
  if (keys.empty()) throw ParameterError("network needs at least one node");
  const KeyspaceParams params = keys.front().params();
  for (const auto& key : keys) detail::require_same_params(params, key.params());
  std::sort(keys.begin(), keys.end());
  if (std::adjacent_find(keys.begin(), keys.end()) != keys.end())
    throw ParameterError("duplicate node key");
  OverlayNetwork net;
  net.params_ = params;
  net.seed_ = seed;
  net.nodes_.reserve(keys.size());
  const int l = params.digits_per_key();
  const int k = params.alphabet_size();
  for (auto& key : keys) net.nodes_.push_back(OverlayNode{std::move(key), RoutingTable(l, k)});
  return fill_routing_tables(std::move(net));
}

// Draws n distinct uniform keys from rng; duplicates are redrawn.
inline std::vector<Key> draw_unique_keys(Rng& rng, std::size_t n, const KeyspaceParams& params) {
  std::vector<Key> keys;
  keys.reserve(n);
  std::set<Key> seen;
  while (keys.size() < n) {
    Key key = random_key(rng, params);
    if (seen.insert(key).second) keys.push_back(std::move(key));
  }
  return keys;
}

inline OverlayNetwork build_network(std::size_t n, const KeyspaceParams& params, std::uint64_t seed) {
  if (n < 1) throw ParameterError("network needs at least one node");
  params.validate();
  Rng rng(seed);
  return make_network(draw_unique_keys(rng, n, params), seed);
}

inline std::optional<NodeIndex> next_hop(const OverlayNetwork& net, NodeIndex from, const Key& target) {
  const Key& id = net.key(from);
  const int shared = lcp_length(id, target);
  if (shared == id.length()) throw ContractViolation("next_hop target equals the node's own key");
  return net.table(from).entry(shared + 1, target.digit_at(shared));
}

// Prefix routing from src toward target. Stops when the target is reached or
// the next slot is empty; with complete tables the last node then holds the
// longest populated prefix of target.
inline std::vector<NodeIndex> route(const OverlayNetwork& net, NodeIndex src, const Key& target) {
  std::vector<NodeIndex> path{src};
  NodeIndex current = src;
  int shared = lcp_length(net.key(current), target);
  while (shared < target.length()) {
    auto hop = next_hop(net, current, target);
    if (!hop) break;
    const int next_shared = lcp_length(net.key(*hop), target);
    if (next_shared <= shared) throw ContractViolation("route made no prefix progress");
    path.push_back(*hop);
    current = *hop;
    shared = next_shared;
  }
  return path;
}

// Node responsible for a key: longest common prefix, then numerically
// closest, then smaller key.
inline NodeIndex responsible_node(const OverlayNetwork& net, const Key& key) {
  std::size_t best = 0;
  int best_shared = -1;
  std::vector<Digit> best_dist;
  for (std::size_t i = 0; i < net.size(); ++i) {
    const Key& id = net.key(node_index(i));
    const int shared = lcp_length(id, key);
    if (shared < best_shared) continue;
    auto dist = numeric_distance(id, key);
    // Ascending iteration order makes strict comparison keep the smaller key on ties.
    if (shared > best_shared || dist < best_dist) {
      best = i;
      best_shared = shared;
      best_dist = std::move(dist);
    }
  }
  return node_index(best);
}

// Checks the slot semantics and completeness of every table by pairwise scan.
// Quadratic; meant for N up to a few thousand. Returns a description of the
// first violation.
inline std::optional<std::string> find_table_violation(const OverlayNetwork& net) {
  const int k = net.params().alphabet_size();
  for (std::size_t o = 0; o < net.size(); ++o) {
    const Key& id = net.key(node_index(o));
    const RoutingTable& table = net.table(node_index(o));
    for (int row = 1; row <= table.stored_rows(); ++row) {
      for (int col = 0; col < k; ++col) {
        auto e = table.entry(row, col);
        if (!e) continue;
        const Key& entry = net.key(*e);
        if (*e == node_index(o)) return "node " + to_string(id) + " lists itself";
        if (lcp_length(id, entry) != row - 1 || entry.digit_at(row - 1) != col)
          return "node " + to_string(id) + " has misplaced entry at row " + std::to_string(row);
      }
    }
    for (std::size_t other = 0; other < net.size(); ++other) {
      if (other == o) continue;
      const Key& y = net.key(node_index(other));
      const int shared = lcp_length(id, y);
      if (!table.entry(shared + 1, y.digit_at(shared)))
        return "node " + to_string(id) + " misses slot (" + std::to_string(shared + 1) + "," +
               std::to_string(y.digit_at(shared)) + ") populated by " + to_string(y);
    }
  }
  return std::nullopt;
}

// One line per node, sorted by key: "<key>\t<row,col,key> <row,col,key> ...".
inline void dump_network(const OverlayNetwork& net, std::ostream& out) {
  const int k = net.params().alphabet_size();
  for (const auto& n : net.nodes()) {
    out << to_string(n.id) << '\t';
    bool first = true;
    for (int row = 1; row <= n.routing_table.stored_rows(); ++row) {
      for (int col = 0; col < k; ++col) {
        auto e = n.routing_table.entry(row, col);
        if (!e) continue;
        if (!first) out << ' ';
        out << row << ',' << col << ',' << to_string(net.key(*e));
        first = false;
      }
    }
    out << '\n';
  }
}

}  // namespace prefixcast
