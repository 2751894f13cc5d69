#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "miab/network.hpp"

namespace miab {

enum class TopologyKind { generic, sparse_partitioned, dense };

std::string_view to_string(TopologyKind k);
/// Accepts "generic", "sparse-partitioned" and "dense".
TopologyKind topology_kind_from_string(std::string_view s);

/// Deterministic per (kind, n, seed). Throws InvalidCount when n < 2.
///
///  generic             Erdos-Renyi graph with mean degree 3; components are
///                      joined and surplus cycle edges removed until the
///                      graph is connected with the sampled edge count.
///  sparse-partitioned  Two or more clusters, each a ring over a random node
///                      order with a few random chords (mean degree ~2.2).
///                      Clusters are never joined.
///  dense               Erdos-Renyi graph with mean degree n/2, minimum
///                      degree raised to n/4, then joined if disconnected.
Topology generate_topology(TopologyKind kind, std::size_t n,
                           std::uint64_t seed);

/// Graphviz rendering. Highlighted path edges are drawn red; failed nodes and
/// links are dashed. Throws InvalidPath if the highlight is not a path in t.
std::string export_dot(const Topology& t,
                       const std::optional<Path>& highlight = std::nullopt);

}  // namespace miab
