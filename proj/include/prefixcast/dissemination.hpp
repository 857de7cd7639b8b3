#pragma once

// Broadcast forwarding logic as pure functions producing ordered send events.
//
// Prefix flooding: a node that received the packet at destination prefix
// length D forwards it to every populated routing entry in rows D+1..l; the
// source starts at D = 0. Each send carries the row of the entry used as the
// receiver's new D.
//
// Rendezvous baseline: a shared tree rooted at the node responsible for a
// group key, built from the members' unicast routes (reverse path). A
// broadcast is unicast from the source to the root, then pushed down the
// tree.
//
// Event lists are ordered so that every sender has received the packet (or
// is the source) before it emits. A sender's emissions are governed by its
// latest reception; emission_index counts the sends of that burst.

#include <deque>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "prefixcast/error.hpp"
#include "prefixcast/keyspace.hpp"
#include "prefixcast/overlay.hpp"

namespace prefixcast {

struct BroadcastPacket {
  int dest_prefix_len = 0;
  std::uint64_t packet_id = 0;
};

enum class SendKind : std::uint8_t {
  flood,
  unicast,  // routing toward the rendezvous point
  tree,     // distribution down the shared tree
};

struct SendEvent {
  NodeIndex sender;
  NodeIndex receiver;
  // Flooding: the receiver's new destination prefix length. Rendezvous
  // scheme: the prefix length the receiver shares with the group key.
  int dest_prefix_len = 0;
  int emission_index = 0;
  SendKind kind = SendKind::flood;
  // False for transit receptions: unicast hops before the rendezvous point
  // and the source's own copy coming back down the tree.
  bool delivers = true;

  friend bool operator==(const SendEvent&, const SendEvent&) = default;
};

// Floods without checking the outcome. Used directly by fault-injection
// checks; everything else calls prefix_flood.
inline std::vector<SendEvent> prefix_flood_unchecked(const OverlayNetwork& net, NodeIndex source) {
  const int l = net.params().digits_per_key();
  const int k = net.params().alphabet_size();
  std::vector<SendEvent> events;
  std::deque<std::pair<NodeIndex, BroadcastPacket>> pending{{source, BroadcastPacket{0, 0}}};
  while (!pending.empty()) {
    auto [node, packet] = pending.front();
    pending.pop_front();
    const RoutingTable& table = net.table(node);
    const int last_row = std::min(l, table.stored_rows());
    int emitted = 0;
    for (int row = packet.dest_prefix_len + 1; row <= last_row; ++row) {
      for (int col = 0; col < k; ++col) {
        auto entry = table.entry(row, col);
        if (!entry || *entry == node) continue;
        events.push_back(SendEvent{node, *entry, row, emitted++, SendKind::flood, true});
        pending.emplace_back(*entry, BroadcastPacket{row, packet.packet_id});
      }
    }
  }
  return events;
}

// Members that never received a delivery, excluding the source.
inline std::vector<NodeIndex> unreached_members(const OverlayNetwork& net, NodeIndex source,
                                                const std::vector<SendEvent>& events) {
  std::vector<bool> got(net.size(), false);
  got[to_size(source)] = true;
  for (const auto& e : events)
    if (e.delivers) got[to_size(e.receiver)] = true;
  std::vector<NodeIndex> out;
  for (std::size_t i = 0; i < got.size(); ++i)
    if (!got[i]) out.push_back(node_index(i));
  return out;
}

// Members delivered to more than once (the source counts any delivery).
inline std::vector<NodeIndex> duplicate_deliveries(const OverlayNetwork& net, NodeIndex source,
                                                   const std::vector<SendEvent>& events) {
  std::vector<int> count(net.size(), 0);
  count[to_size(source)] = 1;
  for (const auto& e : events)
    if (e.delivers) ++count[to_size(e.receiver)];
  std::vector<NodeIndex> out;
  for (std::size_t i = 0; i < count.size(); ++i)
    if (count[i] > 1) out.push_back(node_index(i));
  return out;
}

inline std::vector<SendEvent> prefix_flood(const OverlayNetwork& net, NodeIndex source) {
  auto events = prefix_flood_unchecked(net, source);
  if (auto missed = unreached_members(net, source, events); !missed.empty())
    throw ContractViolation("incomplete routing table: flood missed " + to_string(net.key(missed.front())));
  if (auto dup = duplicate_deliveries(net, source, events); !dup.empty())
    throw ContractViolation("flood delivered twice to " + to_string(net.key(dup.front())));
  return events;
}

// Sends per node, including nodes that sent nothing.
inline std::vector<std::size_t> replication_counts(const OverlayNetwork& net,
                                                   const std::vector<SendEvent>& events) {
  std::vector<std::size_t> counts(net.size(), 0);
  for (const auto& e : events) ++counts[to_size(e.sender)];
  return counts;
}

struct ScribeTree {
  Key group_key;
  NodeIndex rp;
  std::vector<std::optional<NodeIndex>> parent;
  std::vector<std::vector<NodeIndex>> children;  // in graft order

  int depth(NodeIndex node) const {
    int d = 0;
    for (auto p = parent[to_size(node)]; p; p = parent[to_size(*p)]) ++d;
    return d;
  }
};

// Prefix route toward the group key, finished by a direct hop to the
// responsible node when the route stops at another node holding the same
// longest prefix.
inline std::vector<NodeIndex> route_to_responsible(const OverlayNetwork& net, NodeIndex from,
                                                   const Key& key, NodeIndex responsible) {
  auto path = route(net, from, key);
  if (path.back() != responsible) path.push_back(responsible);
  return path;
}

inline ScribeTree scribe_build_tree(const OverlayNetwork& net, const Key& group_key) {
  detail::require_same_params(net.params(), group_key.params());
  const NodeIndex rp = responsible_node(net, group_key);
  ScribeTree tree{group_key, rp, std::vector<std::optional<NodeIndex>>(net.size()),
                  std::vector<std::vector<NodeIndex>>(net.size())};
  std::vector<bool> on_tree(net.size(), false);
  on_tree[to_size(rp)] = true;
  for (std::size_t m = 0; m < net.size(); ++m) {
    if (on_tree[m]) continue;
    auto path = route_to_responsible(net, node_index(m), group_key, rp);
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
      const NodeIndex child = path[i];
      const NodeIndex up = path[i + 1];
      tree.parent[to_size(child)] = up;
      tree.children[to_size(up)].push_back(child);
      on_tree[to_size(child)] = true;
      if (on_tree[to_size(up)]) break;
    }
  }
  return tree;
}

// Unicast from the source to the rendezvous point, then breadth-first down
// the tree. A source that is a tree leaf is not sent its own packet; a source
// with children receives it in transit and forwards it.
inline std::vector<SendEvent> scribe_broadcast(const OverlayNetwork& net, const ScribeTree& tree,
                                               NodeIndex source) {
  std::vector<SendEvent> events;
  if (net.size() == 1) return events;
  const Key& group = tree.group_key;
  auto shared = [&](NodeIndex n) { return lcp_length(net.key(n), group); };

  if (source != tree.rp) {
    auto path = route_to_responsible(net, source, group, tree.rp);
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
      const bool last = i + 2 == path.size();
      events.push_back(SendEvent{path[i], path[i + 1], shared(path[i + 1]), 0, SendKind::unicast, last});
    }
  }

  std::deque<NodeIndex> pending{tree.rp};
  while (!pending.empty()) {
    const NodeIndex node = pending.front();
    pending.pop_front();
    int emitted = 0;
    for (NodeIndex child : tree.children[to_size(node)]) {
      const bool is_source = child == source;
      if (is_source && tree.children[to_size(child)].empty()) continue;
      events.push_back(SendEvent{node, child, shared(child), emitted++, SendKind::tree, !is_source});
      pending.push_back(child);
    }
  }
  return events;
}

namespace detail {

// Replays an ordered event list; each reception updates the receiver's state
// and later emissions of that node start from it. Visitor is called per
// delivery with (receiver, hops, arrival).
template <typename Visitor>
void replay(std::size_t n, NodeIndex source, const std::vector<SendEvent>& events, double link_delay,
            double per_send_gap, Visitor&& on_delivery) {
  struct State {
    bool reached = false;
    int hops = 0;
    double time = 0.0;
  };
  std::vector<State> state(n);
  state[to_size(source)] = State{true, 0, 0.0};
  for (const auto& e : events) {
    const State from = state[to_size(e.sender)];
    if (!from.reached) throw ContractViolation("event sent by a node that has not received the packet");
    if (e.receiver == e.sender) throw ContractViolation("node sent the packet to itself");
    State& to = state[to_size(e.receiver)];
    to = State{true, from.hops + 1, from.time + e.emission_index * per_send_gap + link_delay};
    if (e.delivers) on_delivery(e.receiver, to.hops, to.time);
  }
}

}  // namespace detail

// Overlay hops from the source per member; the source maps to 0.
inline std::vector<int> hop_counts(const OverlayNetwork& net, const std::vector<SendEvent>& events,
                                   NodeIndex source) {
  std::vector<int> hops(net.size(), -1);
  hops[to_size(source)] = 0;
  detail::replay(net.size(), source, events, 1.0, 0.0, [&](NodeIndex r, int h, double) {
    if (r == source || hops[to_size(r)] >= 0)
      throw ContractViolation("member delivered twice: " + to_string(net.key(r)));
    hops[to_size(r)] = h;
  });
  for (std::size_t i = 0; i < hops.size(); ++i)
    if (hops[i] < 0) throw ContractViolation("member not reached: " + to_string(net.key(node_index(i))));
  return hops;
}

// CSV trace: packet_id,sender,receiver,dest_prefix_len,emission_index
inline void write_trace_csv(const OverlayNetwork& net, const std::vector<SendEvent>& events,
                            std::uint64_t packet_id, std::ostream& out) {
  out << "packet_id,sender,receiver,dest_prefix_len,emission_index\n";
  for (const auto& e : events)
    out << packet_id << ',' << to_string(net.key(e.sender)) << ',' << to_string(net.key(e.receiver)) << ','
        << e.dest_prefix_len << ',' << e.emission_index << '\n';
}

}  // namespace prefixcast
