#pragma once

// Ground truth for tests and metrics: breadth-first search over the live
// topology. Recomputed from scratch on every query.

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "miab/network.hpp"

namespace miab::oracle {

/// Shortest live hop count from a to b, or nullopt when unreachable.
/// Throws UnknownNode.
std::optional<std::uint32_t> bfs_distance(const Topology& t, NodeId a,
                                          NodeId b);

bool connected(const Topology& t, NodeId a, NodeId b);

/// Distances from a to every node reachable over live links (a included).
std::map<NodeId, std::uint32_t> distances_from(const Topology& t, NodeId a);

/// Connected components over live links; failed nodes are excluded.
std::vector<NodeSet> components(const Topology& t);

}  // namespace miab::oracle
