#include "miab/engine.hpp"

#include <algorithm>

namespace miab {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool is_beacon(const EventPayload& p) {
  return std::holds_alternative<event::BeaconTick>(p);
}

}  // namespace

std::string_view to_string(Fault::Op op) {
  switch (op) {
    case Fault::Op::fail_node:
      return "fail_node";
    case Fault::Op::restore_node:
      return "restore_node";
    case Fault::Op::fail_link:
      return "fail_link";
    case Fault::Op::restore_link:
      return "restore_link";
  }
  return "?";
}

Fault::Op fault_op_from_string(std::string_view s) {
  for (auto op : {Fault::Op::fail_node, Fault::Op::restore_node,
                  Fault::Op::fail_link, Fault::Op::restore_link}) {
    if (to_string(op) == s) {
      return op;
    }
  }
  throw ConfigError("unknown fault op '" + std::string(s) + "'");
}

std::string_view to_string(FailReason r) {
  return r == FailReason::link_down ? "link_down" : "receiver_down";
}

std::string_view to_string(EndReason r) {
  return r == EndReason::quiescent ? "quiescent" : "horizon";
}

std::uint64_t EventQueue::schedule(Tick at, EventPayload payload) {
  if (at < now_) {
    throw ConfigError("event scheduled at t=" + std::to_string(at) +
                      " before current time t=" + std::to_string(now_));
  }
  const std::uint64_t seq = next_seq_++;
  heap_.push(Event{at, seq, std::move(payload)});
  return seq;
}

Event EventQueue::pop() {
  Event ev = heap_.top();
  heap_.pop();
  now_ = ev.at;
  return ev;
}

Simulator::Simulator(Topology topology, ProtocolConfig cfg, std::uint64_t seed)
    : topology_(std::move(topology)), cfg_(cfg) {
  if (cfg_.per_hop_latency == 0) {
    throw ConfigError("protocol.per_hop_latency must be positive");
  }
  if (cfg_.beacon_period == 0) {
    throw ConfigError("protocol.beacon_period must be positive");
  }
  for (NodeId n : topology_.nodes()) {
    NodeState state(n);
    state.nbors = topology_.neighbors(n);
    nodes_.emplace(n, std::move(state));
    rngs_.emplace(n, Rng(seed, n.value));
  }
  for (NodeId n : topology_.nodes()) {
    queue_.schedule(n.value % cfg_.beacon_period, event::BeaconTick{n});
  }
}

const NodeState& Simulator::node(NodeId n) const {
  auto it = nodes_.find(n);
  if (it == nodes_.end()) {
    throw UnknownNode("unknown node " + to_string(n));
  }
  return it->second;
}

void Simulator::schedule(Tick at, EventPayload payload) {
  if (is_beacon(payload)) {
    queue_.schedule(at, std::move(payload));
  } else {
    schedule_work(at, std::move(payload));
  }
}

void Simulator::schedule_work(Tick at, EventPayload payload) {
  queue_.schedule(at, std::move(payload));
  ++pending_work_;
}

void Simulator::schedule_request(Tick at, NodeId src, NodeId dest,
                                 std::uint32_t payload_len) {
  if (!topology_.has_node(src) || !topology_.has_node(dest)) {
    throw ConfigError("request " + to_string(src) + "->" + to_string(dest) +
                      " names a node outside the topology");
  }
  schedule_work(at, event::AppRequest{src, dest, payload_len});
}

void Simulator::schedule_fault(Tick at, Fault fault) {
  const bool link = fault.op == Fault::Op::fail_link ||
                    fault.op == Fault::Op::restore_link;
  if (link ? !topology_.has_edge(fault.a, fault.b)
           : !topology_.has_node(fault.a)) {
    throw ConfigError(std::string(to_string(fault.op)) +
                      " names an element outside the topology");
  }
  schedule_work(at, event::FaultInjection{fault});
}

void Simulator::run(std::optional<Tick> horizon) {
  if (ran_) {
    throw ConfigError("simulator already ran");
  }
  ran_ = true;
  EndReason reason = EndReason::quiescent;
  while (!queue_.empty()) {
    const Event& next = queue_.top();
    if (pending_work_ == 0 && next.at > last_work_ + cfg_.beacon_period) {
      break;
    }
    if (horizon && next.at > *horizon) {
      reason = EndReason::horizon;
      break;
    }
    Event ev = queue_.pop();
    if (!is_beacon(ev.payload)) {
      --pending_work_;
      last_work_ = ev.at;
    }
    const std::size_t before = trace_.size();
    dispatch(ev);
    if (observer_) {
      observer_(*this, std::span<const TraceEvent>(trace_).subspan(before));
    }
  }
  emit(std::nullopt, record::RunEnd{reason});
}

void Simulator::emit(std::optional<NodeId> node, Record record) {
  trace_.push_back(TraceEvent{now(), trace_.size(), node, std::move(record)});
}

void Simulator::dispatch(const Event& ev) {
  const Tick t = now();
  std::visit(
      overloaded{
          [&](const event::AppRequest& r) {
            if (!topology_.node_up(r.src)) {
              emit(r.src, record::DataDropped{r.src, r.dest,
                                              DropReason::node_down});
              return;
            }
            NodeState& node = nodes_.at(r.src);
            node.pkt_queue.push_back(
                DataPacket{r.src, r.dest, r.payload_len, {}});
            apply(r.src, service(node, t, cfg_, rngs_.at(r.src)));
          },
          [&](const event::BottleArrival& a) {
            if (!topology_.node_up(a.node)) {
              emit(a.from, record::DeliveryFailed{a.msg, a.node,
                                                  FailReason::receiver_down});
              return;
            }
            emit(a.node, record::Received{a.msg, a.from});
            NodeState& node = nodes_.at(a.node);
            node.btl_queue.push_back(a.bottle);
            apply(a.node, service(node, t, cfg_, rngs_.at(a.node)));
          },
          [&](const event::DataArrival& a) {
            if (!topology_.node_up(a.node)) {
              emit(a.from, record::DeliveryFailed{a.msg, a.node,
                                                  FailReason::receiver_down});
              return;
            }
            emit(a.node, record::Received{a.msg, a.from});
            NodeState& node = nodes_.at(a.node);
            node.pkt_queue.push_back(a.packet);
            apply(a.node, service(node, t, cfg_, rngs_.at(a.node)));
          },
          [&](const event::TimerFire& f) {
            // A failed node is frozen; its timers are re-armed on restore.
            if (!topology_.node_up(f.node)) {
              return;
            }
            apply(f.node, on_timeout(nodes_.at(f.node), f.id, t, cfg_,
                                     rngs_.at(f.node)));
          },
          [&](const event::BeaconTick& b) {
            if (topology_.node_up(b.node)) {
              for (auto& [dest, entry] :
                   hello_tick(topology_, nodes_.at(b.node))) {
                emit(b.node, record::RouteRemoved{dest, entry.next_hop,
                                                  entry.hop_count});
              }
            }
            queue_.schedule(t + cfg_.beacon_period, b);
          },
          [&](const event::FaultInjection& f) {
            const Fault& fault = f.fault;
            switch (fault.op) {
              case Fault::Op::fail_node:
                topology_.fail_node(fault.a);
                break;
              case Fault::Op::restore_node:
                topology_.restore_node(fault.a);
                for (const auto& [id, req] : nodes_.at(fault.a).pending) {
                  schedule_work(std::max(t, req.deadline),
                                event::TimerFire{fault.a, id});
                }
                break;
              case Fault::Op::fail_link:
                topology_.fail_link(fault.a, fault.b);
                break;
              case Fault::Op::restore_link:
                topology_.restore_link(fault.a, fault.b);
                break;
            }
            emit(fault.a, record::FaultApplied{fault});
          },
      },
      ev.payload);
}

void Simulator::apply(NodeId n, Actions actions) {
  for (Action& a : actions) {
    std::visit(
        overloaded{
            [&](action::Send& s) {
              transmit(n, s.to, Payload{std::move(s.bottle)});
            },
            [&](action::SendData& s) {
              transmit(n, s.to, Payload{std::move(s.packet)});
            },
            [&](action::Eliminate& e) {
              emit(n, record::Eliminated{e.id, e.reason});
            },
            [&](action::SetTimer& s) {
              schedule_work(s.deadline, event::TimerFire{n, s.id});
            },
            [&](action::DeclareInaccessible& d) {
              emit(n, record::Inaccessible{d.dest});
            },
            [&](action::TableUpdated& u) {
              emit(n, record::TableUpdated{u.dest, u.entry.next_hop,
                                           u.entry.hop_count});
            },
            [&](action::RouteRemoved& r) {
              emit(n, record::RouteRemoved{r.dest, r.entry.next_hop,
                                           r.entry.hop_count});
            },
            [&](action::DiscoveryAttempt& d) {
              emit(n, record::DiscoveryAttempt{d.dest, d.id, d.attempt});
            },
            [&](action::RouteFound& f) {
              emit(n, record::RouteFound{f.dest, std::move(f.path)});
            },
            [&](action::Deliver& d) {
              emit(n, record::DataDelivered{
                          d.packet.src,
                          static_cast<std::uint32_t>(d.packet.path.size())});
            },
            [&](action::DropData& d) {
              emit(n, record::DataDropped{d.packet.src, d.packet.dest,
                                          d.reason});
            },
        },
        a);
  }
}

void Simulator::transmit(NodeId n, NodeId to, Payload payload) {
  const std::uint64_t msg = next_msg_++;
  if (const auto* b = std::get_if<Bottle>(&payload)) {
    bottle_bytes_ += bottle_wire_size(b->history.size());
  }
  emit(n, record::Sent{msg, to, payload});

  if (topology_.link_live(n, to)) {
    const Tick at = now() + cfg_.per_hop_latency;
    if (auto* b = std::get_if<Bottle>(&payload)) {
      schedule_work(at, event::BottleArrival{to, n, msg, std::move(*b)});
    } else {
      schedule_work(at, event::DataArrival{to, n, msg,
                                           std::get<DataPacket>(payload)});
    }
    return;
  }
  emit(n, record::DeliveryFailed{msg, to, FailReason::link_down});
  Undelivered item = std::holds_alternative<Bottle>(payload)
                         ? Undelivered{std::get<Bottle>(payload)}
                         : Undelivered{std::get<DataPacket>(payload)};
  apply(n, on_delivery_failure(nodes_.at(n), item, to, now(), cfg_,
                               rngs_.at(n)));
}

}  // namespace miab
