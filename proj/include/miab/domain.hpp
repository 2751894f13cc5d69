#pragma once

// Protocol data: node attributes, the bottle packet and its wire format.

#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "miab/types.hpp"

namespace miab {

/// Globally unique bottle identifier: originating node plus that node's
/// per-bottle counter. Rendered as "origin-seq".
struct BottleId {
  NodeId origin;
  std::uint16_t seq = 0;

  friend constexpr auto operator<=>(const BottleId&, const BottleId&) = default;
};

std::string to_string(const BottleId& id);

/// Route-request packet. The history records every node the bottle has
/// visited, starting with its source.
struct Bottle {
  NodeId src;
  NodeId dest;
  BottleId id;
  bool rf = false;       // route found: destination reached, returning
  bool failure = false;  // route-failure notice travelling back to src
  Path history;

  friend bool operator==(const Bottle&, const Bottle&) = default;
};

struct RouteEntry {
  NodeId next_hop;
  std::uint32_t hop_count = 1;

  friend bool operator==(const RouteEntry&, const RouteEntry&) = default;
};

class RoutingTable {
 public:
  using Map = std::map<NodeId, RouteEntry>;

  const RouteEntry* find(NodeId dest) const;
  bool contains(NodeId dest) const { return entries_.contains(dest); }
  void install(NodeId dest, RouteEntry entry) { entries_[dest] = entry; }
  std::optional<RouteEntry> erase(NodeId dest);

  /// Removes every entry routed through `hop` and returns what was removed.
  std::vector<std::pair<NodeId, RouteEntry>> purge_next_hop(NodeId hop);

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  Map::const_iterator begin() const { return entries_.begin(); }
  Map::const_iterator end() const { return entries_.end(); }

  friend bool operator==(const RoutingTable&, const RoutingTable&) = default;

 private:
  Map entries_;
};

/// Application packet. Only accounting fields are carried; `path` lists the
/// nodes that have handled the packet so far (source first) and is used to
/// send a route-failure notice back if forwarding breaks.
struct DataPacket {
  NodeId src;
  NodeId dest;
  std::uint32_t payload_len = 0;
  Path path;

  friend bool operator==(const DataPacket&, const DataPacket&) = default;
};

struct PendingRequest {
  NodeId dest;
  std::uint32_t retries_used = 0;
  Tick deadline = 0;
  Tick started_at = 0;
  std::vector<DataPacket> queued_packets;
};

enum class FsmState { idle, route_req, btl_manage };

std::string_view to_string(FsmState s);

struct NodeState {
  NodeId nid;
  std::uint16_t bid = 0;  // seq of the next bottle this node creates
  NodeSet nbors;
  RoutingTable rtab;
  FsmState state = FsmState::idle;
  std::deque<DataPacket> pkt_queue;
  std::deque<Bottle> btl_queue;
  std::map<BottleId, PendingRequest> pending;

  explicit NodeState(NodeId id = NodeId{}) : nid(id) {}

  std::size_t queued_packet_count() const;
  const PendingRequest* pending_for(NodeId dest) const;
};

/// Builds a fresh route-request bottle. Throws InvalidRequest if src == dest.
Bottle make_bottle(NodeId src, NodeId dest, std::uint16_t seq);

std::size_t bottle_hops(const Bottle& b);

/// Checks the structural invariants of a bottle; throws MalformedBottle.
void validate_bottle(const Bottle& b);

inline constexpr std::size_t kBottleHeaderBytes = 11;

/// Encoded size: 11 header bytes plus two per history entry.
constexpr std::size_t bottle_wire_size(std::size_t history_len) {
  return kBottleHeaderBytes + 2 * history_len;
}

/// Big-endian layout:
///   src(2) dest(2) origin(2) seq(2) flags(1) history_len(2) history(2 each)
/// flags bit0 = rf, bit1 = failure.
std::vector<std::uint8_t> serialize_bottle(const Bottle& b);
Bottle deserialize_bottle(std::span<const std::uint8_t> bytes);

}  // namespace miab
