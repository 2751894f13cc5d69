#pragma once

// Per-node protocol state machine. Every handler mutates one NodeState and
// returns the actions the node wants performed; the engine carries them out.

#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "miab/domain.hpp"
#include "miab/random.hpp"

namespace miab {

struct ProtocolConfig {
  std::uint32_t hop_limit = 60;
  Tick timeout = 120;
  std::uint32_t retry_limit = 3;
  std::size_t queue_cap = 64;
  Tick per_hop_latency = 1;
  Tick beacon_period = 1;
  // Hand a bottle straight to its destination when it is a neighbor instead
  // of picking a random unvisited neighbor.
  bool guided_forwarding = true;

  /// hop_limit = 4|V|, timeout = 2 * hop_limit * latency, retry_limit = 3.
  static ProtocolConfig defaults_for(std::size_t node_count,
                                     Tick per_hop_latency = 1);
};

enum class EliminateReason { hop_limit, dead_end, return_path_broken };
enum class DropReason {
  queue_full,
  inaccessible,
  ttl_expired,
  node_down,
  route_broken,
};

std::string_view to_string(EliminateReason r);
std::string_view to_string(DropReason r);

namespace action {

struct Send {
  Bottle bottle;
  NodeId to;
};
struct SendData {
  DataPacket packet;
  NodeId to;
};
struct Eliminate {
  BottleId id;
  EliminateReason reason;
};
struct SetTimer {
  BottleId id;
  Tick deadline;
};
struct DeclareInaccessible {
  NodeId dest;
};
struct TableUpdated {
  NodeId dest;
  RouteEntry entry;
};
struct RouteRemoved {
  NodeId dest;
  RouteEntry entry;
};
/// A bottle was launched for a route request; attempt 0 is the first.
struct DiscoveryAttempt {
  NodeId dest;
  BottleId id;
  std::uint32_t attempt;
};
/// A pending route request was satisfied by its returning rf bottle.
struct RouteFound {
  NodeId dest;
  Path path;
};
struct Deliver {
  DataPacket packet;
};
struct DropData {
  DataPacket packet;
  DropReason reason;
};

}  // namespace action

using Action =
    std::variant<action::Send, action::SendData, action::Eliminate,
                 action::SetTimer, action::DeclareInaccessible,
                 action::TableUpdated, action::RouteRemoved,
                 action::DiscoveryAttempt, action::RouteFound, action::Deliver,
                 action::DropData>;
using Actions = std::vector<Action>;

/// Totalized transition function. Pending bottles take priority over
/// pending packets; with both queues empty the node idles.
FsmState next_state(FsmState current, bool pkt_queue_empty,
                    bool btl_queue_empty);

/// Uniform choice among neighbors not yet in the history, or nullopt when
/// every neighbor has been visited (dead end).
std::optional<NodeId> choose_next_hop(const NodeSet& nbors,
                                      std::span<const NodeId> history,
                                      Rng& rng);

enum class HarvestDirection {
  toward_origin,  // forward travel: learn routes to earlier history entries
  toward_tail,    // return travel: learn routes to later history entries
};

/// Installs the routes implied by a bottle's history at node `self`. An entry
/// is written when the destination is unknown or the new hop count is
/// strictly smaller. Throws PreconditionViolation if `self` is not in the
/// history or the implied next hop is not a neighbor.
std::vector<action::TableUpdated> update_table_from_history(
    RoutingTable& rtab, std::span<const NodeId> history, NodeId self,
    const NodeSet& nbors,
    HarvestDirection direction = HarvestDirection::toward_origin);

Actions handle_route_request(NodeState& node, DataPacket pkt, Tick now,
                             const ProtocolConfig& cfg, Rng& rng);

Actions handle_bottle(NodeState& node, Bottle b, Tick now,
                      const ProtocolConfig& cfg, Rng& rng);

/// Timer expiry for a pending request. Stale timers yield no actions.
Actions on_timeout(NodeState& node, const BottleId& id, Tick now,
                   const ProtocolConfig& cfg, Rng& rng);

using Undelivered = std::variant<Bottle, DataPacket>;

/// The engine refused a send to `failed_neighbor`.
Actions on_delivery_failure(NodeState& node, const Undelivered& item,
                            NodeId failed_neighbor, Tick now,
                            const ProtocolConfig& cfg, Rng& rng);

/// Runs the state machine until both queues are drained and the node is back
/// in idle, collecting the actions of every step.
Actions service(NodeState& node, Tick now, const ProtocolConfig& cfg,
                Rng& rng);

}  // namespace miab
