#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "miab/engine.hpp"
#include "miab/network.hpp"

namespace miab {

struct RunSummary {
  std::uint64_t discoveries_attempted = 0;
  std::uint64_t discoveries_succeeded = 0;
  std::uint64_t discoveries_failed = 0;
  std::uint64_t retries = 0;
  std::optional<double> mean_discovery_latency;  // ticks
  std::optional<double> mean_stretch;            // found hops / shortest hops
  std::uint64_t total_bottle_bytes = 0;
  std::uint64_t bottle_sends = 0;
  std::optional<double> mean_bottle_bytes;
  std::uint64_t table_entries = 0;
  std::optional<double> table_optimality;
  std::uint64_t data_delivered = 0;
  std::uint64_t data_dropped = 0;
  std::optional<double> mean_delivery_stretch;
};

/// Rebuilds routing tables and the faulted topology by replaying a trace.
class TraceReplay {
 public:
  explicit TraceReplay(Topology initial) : topology_(std::move(initial)) {}

  void apply(const TraceEvent& ev);

  const Topology& topology() const { return topology_; }
  const std::map<NodeId, RoutingTable>& tables() const { return tables_; }

 private:
  Topology topology_;
  std::map<NodeId, RoutingTable> tables_;
};

/// Fraction of entries whose hop count equals the shortest live distance.
/// nullopt when there are no entries.
std::optional<double> table_optimality(
    const std::map<NodeId, RoutingTable>& tables, const Topology& t);

struct DeliverySample {
  Tick at;
  NodeId src;
  NodeId dest;
  std::uint32_t hops;
  double stretch;
};

/// Every delivered data packet with its stretch against the topology at the
/// moment of delivery.
std::vector<DeliverySample> delivery_samples(std::span<const TraceEvent> trace,
                                             const Topology& initial);

/// Throws IncompleteTrace unless the trace ends with a run-end record.
RunSummary summarize(std::span<const TraceEvent> trace,
                     const Topology& initial);

std::string summary_json(const RunSummary& s);
std::string summary_table(const RunSummary& s);

}  // namespace miab
