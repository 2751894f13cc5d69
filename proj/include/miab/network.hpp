#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "miab/domain.hpp"

namespace miab {

/// Undirected edge with endpoints stored in ascending order.
struct Edge {
  NodeId a;
  NodeId b;

  Edge() = default;
  Edge(NodeId x, NodeId y) : a(std::min(x, y)), b(std::max(x, y)) {}

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Static graph plus the set of failed nodes and links. A failed node takes
/// all its links down without removing them.
class Topology {
 public:
  Topology() = default;

  /// Builds a topology, rejecting duplicate nodes, duplicate edges, self
  /// loops and edges to unknown nodes.
  static Topology from_edges(const std::vector<NodeId>& nodes,
                             const std::vector<Edge>& edges);

  void add_node(NodeId n);
  void add_edge(NodeId x, NodeId y);

  const NodeSet& nodes() const { return nodes_; }
  std::size_t node_count() const { return nodes_.size(); }
  std::vector<Edge> edges() const;
  std::size_t edge_count() const { return edge_count_; }

  bool has_node(NodeId n) const { return nodes_.contains(n); }
  bool has_edge(NodeId x, NodeId y) const;
  bool node_up(NodeId n) const;
  /// True when the edge exists, is not failed, and both endpoints are up.
  bool link_live(NodeId x, NodeId y) const;

  /// Live neighbors of n. Throws UnknownNode.
  NodeSet neighbors(NodeId n) const;
  /// Every adjacent node regardless of failures. Throws UnknownNode.
  const NodeSet& adjacent(NodeId n) const;

  void fail_node(NodeId n);
  void restore_node(NodeId n);
  void fail_link(NodeId x, NodeId y);
  void restore_link(NodeId x, NodeId y);

  const std::set<NodeId>& down_nodes() const { return down_nodes_; }
  const std::set<Edge>& down_edges() const { return down_edges_; }

  friend bool operator==(const Topology&, const Topology&) = default;

 private:
  void require_node(NodeId n) const;
  void require_edge(NodeId x, NodeId y) const;

  NodeSet nodes_;
  std::map<NodeId, NodeSet> adjacency_;
  std::size_t edge_count_ = 0;
  std::set<NodeId> down_nodes_;
  std::set<Edge> down_edges_;
};

/// Refreshes node.nbors from the live topology. Routes whose next hop
/// vanished are purged and returned; new neighbors install no routes.
std::vector<std::pair<NodeId, RouteEntry>> hello_tick(const Topology& t,
                                                      NodeState& node);

// Topology file: {"nodes": [ints], "edges": [[a, b], ...]}.
Topology parse_topology(const std::string& text,
                        const std::string& origin = "<topology>");
Topology load_topology(const std::filesystem::path& path);
std::string dump_topology(const Topology& t);

}  // namespace miab
