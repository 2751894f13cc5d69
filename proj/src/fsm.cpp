#include "miab/fsm.hpp"

#include <algorithm>
#include <map>

namespace miab {

ProtocolConfig ProtocolConfig::defaults_for(std::size_t node_count,
                                            Tick per_hop_latency) {
  ProtocolConfig cfg;
  cfg.hop_limit = static_cast<std::uint32_t>(std::max<std::size_t>(1, 4 * node_count));
  cfg.per_hop_latency = per_hop_latency;
  cfg.timeout = 2 * Tick{cfg.hop_limit} * per_hop_latency;
  cfg.retry_limit = 3;
  cfg.beacon_period = per_hop_latency;
  return cfg;
}

std::string_view to_string(EliminateReason r) {
  switch (r) {
    case EliminateReason::hop_limit:
      return "hop_limit";
    case EliminateReason::dead_end:
      return "dead_end";
    case EliminateReason::return_path_broken:
      return "return_path_broken";
  }
  return "?";
}

std::string_view to_string(DropReason r) {
  switch (r) {
    case DropReason::queue_full:
      return "queue_full";
    case DropReason::inaccessible:
      return "inaccessible";
    case DropReason::ttl_expired:
      return "ttl_expired";
    case DropReason::node_down:
      return "node_down";
    case DropReason::route_broken:
      return "route_broken";
  }
  return "?";
}

FsmState next_state(FsmState /*current*/, bool pkt_queue_empty,
                    bool btl_queue_empty) {
  if (!btl_queue_empty) {
    return FsmState::btl_manage;
  }
  if (!pkt_queue_empty) {
    return FsmState::route_req;
  }
  return FsmState::idle;
}

namespace {

bool in_history(std::span<const NodeId> history, NodeId n) {
  return std::find(history.begin(), history.end(), n) != history.end();
}

std::optional<std::size_t> index_of(std::span<const NodeId> history,
                                    NodeId n) {
  auto it = std::find(history.begin(), history.end(), n);
  if (it == history.end()) {
    return std::nullopt;
  }
  return static_cast<std::size_t>(it - history.begin());
}

template <typename T>
void append(Actions& out, std::vector<T>&& items) {
  for (auto& item : items) {
    out.emplace_back(std::move(item));
  }
}

void append(Actions& out, Actions&& items) {
  for (auto& item : items) {
    out.push_back(std::move(item));
  }
}

// Harvest only when the implied next hop is a known neighbor; a bottle can
// arrive over a link the hello beacons have not reported yet.
void harvest(NodeState& node, std::span<const NodeId> history, std::size_t self,
             HarvestDirection direction, Actions& out) {
  const bool toward_origin = direction == HarvestDirection::toward_origin;
  if (toward_origin ? self == 0 : self + 1 >= history.size()) {
    return;
  }
  const NodeId hop = toward_origin ? history[self - 1] : history[self + 1];
  if (!node.nbors.contains(hop)) {
    return;
  }
  append(out, update_table_from_history(node.rtab, history, node.nid,
                                        node.nbors, direction));
}

std::optional<NodeId> forward_hop(const NodeState& node, const Bottle& b,
                                  const ProtocolConfig& cfg, Rng& rng) {
  if (cfg.guided_forwarding && node.nbors.contains(b.dest)) {
    return b.dest;
  }
  return choose_next_hop(node.nbors, b.history, rng);
}

void relay_back(const NodeState& node, Bottle b, std::size_t self,
                Actions& out) {
  const NodeId prev = b.history[self - 1];
  if (node.nbors.contains(prev)) {
    out.push_back(action::Send{std::move(b), prev});
  } else {
    out.push_back(
        action::Eliminate{b.id, EliminateReason::return_path_broken});
  }
}

void launch(NodeState& node, PendingRequest req, std::uint32_t attempt,
            Tick now, const ProtocolConfig& cfg, Rng& rng, Actions& out) {
  Bottle b = make_bottle(node.nid, req.dest, node.bid++);
  out.push_back(action::DiscoveryAttempt{req.dest, b.id, attempt});
  if (auto hop = forward_hop(node, b, cfg, rng)) {
    out.push_back(action::Send{b, *hop});
  } else {
    out.push_back(action::Eliminate{b.id, EliminateReason::dead_end});
  }
  req.retries_used = attempt;
  req.deadline = now + cfg.timeout;
  out.push_back(action::SetTimer{b.id, req.deadline});
  node.pending.emplace(b.id, std::move(req));
}

void flush(const PendingRequest& req, const RouteEntry& route, Actions& out) {
  for (const DataPacket& pkt : req.queued_packets) {
    out.push_back(action::SendData{pkt, route.next_hop});
  }
}

Path loop_erased(const Path& path) {
  Path out;
  std::map<NodeId, std::size_t> at;
  for (NodeId n : path) {
    if (auto it = at.find(n); it != at.end()) {
      for (std::size_t k = it->second + 1; k < out.size(); ++k) {
        at.erase(out[k]);
      }
      out.resize(it->second + 1);
    } else {
      at.emplace(n, out.size());
      out.push_back(n);
    }
  }
  return out;
}

// Route-failure notice for a packet this node could not forward. The notice
// retraces the packet's path back to its source.
void send_failure_notice(NodeState& node, const DataPacket& pkt,
                         Actions& out) {
  Path history = loop_erased(pkt.path);
  if (history.size() < 2 || history.front() != pkt.src ||
      history.back() != node.nid) {
    return;
  }
  const std::size_t self = history.size() - 1;
  Bottle notice{.src = pkt.src,
                .dest = pkt.dest,
                .id = BottleId{node.nid, node.bid++},
                .rf = false,
                .failure = true,
                .history = std::move(history)};
  relay_back(node, std::move(notice), self, out);
}

void route_packet(NodeState& node, DataPacket pkt, Tick now,
                  const ProtocolConfig& cfg, Rng& rng, Actions& out) {
  if (pkt.dest == node.nid) {
    if (!pkt.path.empty()) {
      out.push_back(action::Deliver{std::move(pkt)});
    }
    return;
  }
  if (pkt.path.size() > cfg.hop_limit) {
    out.push_back(action::DropData{std::move(pkt), DropReason::ttl_expired});
    return;
  }
  pkt.path.push_back(node.nid);

  if (const RouteEntry* e = node.rtab.find(pkt.dest)) {
    out.push_back(action::SendData{std::move(pkt), e->next_hop});
    return;
  }
  if (node.queued_packet_count() >= cfg.queue_cap) {
    if (pkt.src != node.nid) {
      send_failure_notice(node, pkt, out);
    }
    out.push_back(action::DropData{std::move(pkt), DropReason::queue_full});
    return;
  }
  for (auto& [id, req] : node.pending) {
    if (req.dest == pkt.dest) {
      req.queued_packets.push_back(std::move(pkt));
      return;
    }
  }
  PendingRequest req;
  req.dest = pkt.dest;
  req.started_at = now;
  req.queued_packets.push_back(std::move(pkt));
  launch(node, std::move(req), 0, now, cfg, rng, out);
}

}  // namespace

std::optional<NodeId> choose_next_hop(const NodeSet& nbors,
                                      std::span<const NodeId> history,
                                      Rng& rng) {
  std::vector<NodeId> candidates;
  candidates.reserve(nbors.size());
  for (NodeId n : nbors) {
    if (!in_history(history, n)) {
      candidates.push_back(n);
    }
  }
  if (candidates.empty()) {
    return std::nullopt;
  }
  return candidates[rng.below(candidates.size())];
}

std::vector<action::TableUpdated> update_table_from_history(
    RoutingTable& rtab, std::span<const NodeId> history, NodeId self,
    const NodeSet& nbors, HarvestDirection direction) {
  const auto self_at = index_of(history, self);
  if (!self_at) {
    throw PreconditionViolation("node " + to_string(self) +
                                " is not in the bottle history");
  }
  const std::size_t i = *self_at;
  std::size_t first = 0;
  std::size_t last = 0;  // exclusive
  NodeId hop;
  if (direction == HarvestDirection::toward_origin) {
    if (i == 0) {
      return {};
    }
    hop = history[i - 1];
    first = 0;
    last = i;
  } else {
    if (i + 1 >= history.size()) {
      return {};
    }
    hop = history[i + 1];
    first = i + 1;
    last = history.size();
  }
  if (!nbors.contains(hop)) {
    throw PreconditionViolation("next hop " + to_string(hop) +
                                " is not a neighbor of " + to_string(self));
  }

  std::vector<action::TableUpdated> updates;
  for (std::size_t j = first; j < last; ++j) {
    const NodeId dest = history[j];
    if (dest == self) {
      continue;
    }
    const RouteEntry candidate{
        hop, static_cast<std::uint32_t>(j < i ? i - j : j - i)};
    const RouteEntry* existing = rtab.find(dest);
    // Ties keep the existing entry.
    if (existing == nullptr || candidate.hop_count < existing->hop_count) {
      rtab.install(dest, candidate);
      updates.push_back(action::TableUpdated{dest, candidate});
    }
  }
  return updates;
}

Actions handle_route_request(NodeState& node, DataPacket pkt, Tick now,
                             const ProtocolConfig& cfg, Rng& rng) {
  if (node.state != FsmState::route_req) {
    throw PreconditionViolation("handle_route_request in state " +
                                std::string(to_string(node.state)));
  }
  Actions out;
  route_packet(node, std::move(pkt), now, cfg, rng, out);
  return out;
}

Actions handle_bottle(NodeState& node, Bottle b, Tick now,
                      const ProtocolConfig& cfg, Rng& rng) {
  if (node.state != FsmState::btl_manage) {
    throw PreconditionViolation("handle_bottle in state " +
                                std::string(to_string(node.state)));
  }
  validate_bottle(b);
  Actions out;

  if (!b.rf && !b.failure) {
    if (in_history(b.history, node.nid)) {
      throw MalformedBottle("bottle " + to_string(b.id) +
                            " delivered to already visited node " +
                            to_string(node.nid));
    }
    b.history.push_back(node.nid);
    const std::size_t self = b.history.size() - 1;
    harvest(node, b.history, self, HarvestDirection::toward_origin, out);

    if (bottle_hops(b) >= cfg.hop_limit) {
      out.push_back(action::Eliminate{b.id, EliminateReason::hop_limit});
      return out;
    }
    if (node.nid == b.dest) {
      b.rf = true;
      relay_back(node, std::move(b), self, out);
      return out;
    }
    if (auto hop = forward_hop(node, b, cfg, rng)) {
      out.push_back(action::Send{std::move(b), *hop});
    } else {
      out.push_back(action::Eliminate{b.id, EliminateReason::dead_end});
    }
    return out;
  }

  // Return travel, strictly along the reversed history.
  const auto at = index_of(b.history, node.nid);
  if (!at) {
    throw MalformedBottle("returning bottle " + to_string(b.id) +
                          " reached node " + to_string(node.nid) +
                          " outside its history");
  }
  const std::size_t self = *at;
  harvest(node, b.history, self, HarvestDirection::toward_tail, out);

  if (b.failure) {
    const RouteEntry* e = node.rtab.find(b.dest);
    if (self == 0) {
      if (e != nullptr) {
        out.push_back(action::RouteRemoved{b.dest, *e});
        node.rtab.erase(b.dest);
      }
      if (node.pending_for(b.dest) == nullptr) {
        PendingRequest req;
        req.dest = b.dest;
        req.started_at = now;
        launch(node, std::move(req), 0, now, cfg, rng, out);
      }
      return out;
    }
    if (e != nullptr && e->next_hop == b.history[self + 1]) {
      out.push_back(action::RouteRemoved{b.dest, *e});
      node.rtab.erase(b.dest);
    }
    relay_back(node, std::move(b), self, out);
    return out;
  }

  if (self == 0) {
    const RouteEntry* route = node.rtab.find(b.dest);
    for (auto it = node.pending.begin(); it != node.pending.end(); ++it) {
      if (it->second.dest == b.dest && route != nullptr) {
        out.push_back(action::RouteFound{b.dest, b.history});
        flush(it->second, *route, out);
        node.pending.erase(it);
        break;
      }
    }
    return out;
  }
  relay_back(node, std::move(b), self, out);
  return out;
}

Actions on_timeout(NodeState& node, const BottleId& id, Tick now,
                   const ProtocolConfig& cfg, Rng& rng) {
  auto it = node.pending.find(id);
  if (it == node.pending.end()) {
    return {};
  }
  PendingRequest req = std::move(it->second);
  node.pending.erase(it);

  Actions out;
  if (const RouteEntry* route = node.rtab.find(req.dest)) {
    flush(req, *route, out);
    return out;
  }
  if (req.retries_used < cfg.retry_limit) {
    const std::uint32_t attempt = req.retries_used + 1;
    launch(node, std::move(req), attempt, now, cfg, rng, out);
    return out;
  }
  out.push_back(action::DeclareInaccessible{req.dest});
  for (DataPacket& pkt : req.queued_packets) {
    out.push_back(action::DropData{std::move(pkt), DropReason::inaccessible});
  }
  return out;
}

Actions on_delivery_failure(NodeState& node, const Undelivered& item,
                            NodeId failed_neighbor, Tick now,
                            const ProtocolConfig& cfg, Rng& rng) {
  Actions out;
  for (auto& [dest, entry] : node.rtab.purge_next_hop(failed_neighbor)) {
    out.push_back(action::RouteRemoved{dest, entry});
  }
  node.nbors.erase(failed_neighbor);

  if (const auto* pkt = std::get_if<DataPacket>(&item)) {
    if (pkt->src != node.nid) {
      send_failure_notice(node, *pkt, out);
      out.push_back(action::DropData{*pkt, DropReason::route_broken});
    } else {
      DataPacket again = *pkt;
      again.path.clear();
      route_packet(node, std::move(again), now, cfg, rng, out);
    }
  }
  // A lost bottle is recovered by its source's timer.
  return out;
}

Actions service(NodeState& node, Tick now, const ProtocolConfig& cfg,
                Rng& rng) {
  Actions out;
  for (;;) {
    node.state =
        next_state(node.state, node.pkt_queue.empty(), node.btl_queue.empty());
    if (node.state == FsmState::btl_manage) {
      Bottle b = std::move(node.btl_queue.front());
      node.btl_queue.pop_front();
      append(out, handle_bottle(node, std::move(b), now, cfg, rng));
    } else if (node.state == FsmState::route_req) {
      DataPacket pkt = std::move(node.pkt_queue.front());
      node.pkt_queue.pop_front();
      append(out, handle_route_request(node, std::move(pkt), now, cfg, rng));
    } else {
      return out;
    }
  }
}

}  // namespace miab
