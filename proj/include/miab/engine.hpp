#pragma once

// Deterministic discrete-event loop. Events at equal times run in the order
// they were scheduled; per-node random streams are split from one seed.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "miab/fsm.hpp"
#include "miab/network.hpp"
#include "miab/random.hpp"

namespace miab {

struct Fault {
  enum class Op { fail_node, restore_node, fail_link, restore_link };
  Op op;
  NodeId a;
  NodeId b;  // second endpoint for link operations

  friend bool operator==(const Fault&, const Fault&) = default;
};

std::string_view to_string(Fault::Op op);
Fault::Op fault_op_from_string(std::string_view s);

namespace event {

struct BottleArrival {
  NodeId node;
  NodeId from;
  std::uint64_t msg;
  Bottle bottle;
};
struct DataArrival {
  NodeId node;
  NodeId from;
  std::uint64_t msg;
  DataPacket packet;
};
struct TimerFire {
  NodeId node;
  BottleId id;
};
struct BeaconTick {
  NodeId node;
};
struct FaultInjection {
  Fault fault;
};
struct AppRequest {
  NodeId src;
  NodeId dest;
  std::uint32_t payload_len = 0;
};

}  // namespace event

using EventPayload =
    std::variant<event::BottleArrival, event::DataArrival, event::TimerFire,
                 event::BeaconTick, event::FaultInjection, event::AppRequest>;

struct Event {
  Tick at = 0;
  std::uint64_t seq = 0;
  EventPayload payload;
};

/// Min-queue on (at, seq).
class EventQueue {
 public:
  /// Throws ConfigError when `at` precedes the current time.
  std::uint64_t schedule(Tick at, EventPayload payload);
  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }
  const Event& top() const { return heap_.top(); }
  Event pop();
  Tick now() const { return now_; }

 private:
  struct Later {
    bool operator()(const Event& x, const Event& y) const {
      return x.at != y.at ? x.at > y.at : x.seq > y.seq;
    }
  };
  std::priority_queue<Event, std::vector<Event>, Later> heap_;
  std::uint64_t next_seq_ = 0;
  Tick now_ = 0;
};

enum class FailReason { link_down, receiver_down };
enum class EndReason { quiescent, horizon };

std::string_view to_string(FailReason r);
std::string_view to_string(EndReason r);

using Payload = std::variant<Bottle, DataPacket>;

namespace record {

struct Sent {
  std::uint64_t msg;
  NodeId to;
  Payload payload;
};
struct Received {
  std::uint64_t msg;
  NodeId from;
};
struct DeliveryFailed {
  std::uint64_t msg;
  NodeId to;
  FailReason reason;
};
struct Eliminated {
  BottleId id;
  EliminateReason reason;
};
struct TableUpdated {
  NodeId dest;
  NodeId next_hop;
  std::uint32_t hops;
};
struct RouteRemoved {
  NodeId dest;
  NodeId next_hop;
  std::uint32_t hops;
};
struct DiscoveryAttempt {
  NodeId dest;
  BottleId id;
  std::uint32_t attempt;
};
struct RouteFound {
  NodeId dest;
  Path path;
};
struct Inaccessible {
  NodeId dest;
};
struct DataDelivered {
  NodeId src;
  std::uint32_t hops;
};
struct DataDropped {
  NodeId src;
  NodeId dest;
  DropReason reason;
};
struct FaultApplied {
  Fault fault;
};
struct RunEnd {
  EndReason reason;
};

}  // namespace record

using Record =
    std::variant<record::Sent, record::Received, record::DeliveryFailed,
                 record::Eliminated, record::TableUpdated,
                 record::RouteRemoved, record::DiscoveryAttempt,
                 record::RouteFound, record::Inaccessible,
                 record::DataDelivered, record::DataDropped,
                 record::FaultApplied, record::RunEnd>;

struct TraceEvent {
  Tick at = 0;
  std::uint64_t seq = 0;
  std::optional<NodeId> node;
  Record record;
};

using Trace = std::vector<TraceEvent>;

/// One JSON object per line with a fixed field order.
std::string trace_line(const TraceEvent& ev);
std::string format_trace(std::span<const TraceEvent> trace);
TraceEvent parse_trace_line(const std::string& line);
Trace parse_trace(const std::string& text);

class Simulator {
 public:
  /// Called after every processed event with the records it produced.
  using Observer =
      std::function<void(const Simulator&, std::span<const TraceEvent>)>;

  Simulator(Topology topology, ProtocolConfig cfg, std::uint64_t seed);

  void schedule(Tick at, EventPayload payload);
  void schedule_request(Tick at, NodeId src, NodeId dest,
                        std::uint32_t payload_len = 0);
  void schedule_fault(Tick at, Fault fault);
  void set_observer(Observer observer) { observer_ = std::move(observer); }

  /// Processes events until the horizon passes or the network is quiescent:
  /// no events other than beacons remain and one full beacon period has
  /// elapsed since the last of them.
  void run(std::optional<Tick> horizon = std::nullopt);

  Tick now() const { return queue_.now(); }
  const Trace& trace() const { return trace_; }
  const Topology& topology() const { return topology_; }
  const ProtocolConfig& config() const { return cfg_; }
  const NodeState& node(NodeId n) const;
  const std::map<NodeId, NodeState>& nodes() const { return nodes_; }
  /// Running total of encoded bottle bytes over every send.
  std::uint64_t bottle_bytes() const { return bottle_bytes_; }

 private:
  void dispatch(const Event& ev);
  void apply(NodeId n, Actions actions);
  void transmit(NodeId n, NodeId to, Payload payload);
  void emit(std::optional<NodeId> node, Record record);
  void schedule_work(Tick at, EventPayload payload);

  Topology topology_;
  ProtocolConfig cfg_;
  std::map<NodeId, NodeState> nodes_;
  std::map<NodeId, Rng> rngs_;
  EventQueue queue_;
  Trace trace_;
  Observer observer_;
  std::uint64_t next_msg_ = 0;
  std::uint64_t bottle_bytes_ = 0;
  std::size_t pending_work_ = 0;  // queued events other than beacons
  Tick last_work_ = 0;
  bool ran_ = false;
};

}  // namespace miab
