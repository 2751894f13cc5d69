#include "miab/oracle.hpp"

#include <deque>

namespace miab::oracle {

std::map<NodeId, std::uint32_t> distances_from(const Topology& t, NodeId a) {
  if (!t.has_node(a)) {
    throw UnknownNode("unknown node " + to_string(a));
  }
  std::map<NodeId, std::uint32_t> dist;
  if (!t.node_up(a)) {
    return dist;
  }
  dist[a] = 0;
  std::deque<NodeId> frontier{a};
  while (!frontier.empty()) {
    const NodeId u = frontier.front();
    frontier.pop_front();
    for (NodeId v : t.neighbors(u)) {
      if (dist.emplace(v, dist[u] + 1).second) {
        frontier.push_back(v);
      }
    }
  }
  return dist;
}

std::optional<std::uint32_t> bfs_distance(const Topology& t, NodeId a,
                                          NodeId b) {
  if (!t.has_node(b)) {
    throw UnknownNode("unknown node " + to_string(b));
  }
  const auto dist = distances_from(t, a);
  auto it = dist.find(b);
  if (it == dist.end()) {
    return std::nullopt;
  }
  return it->second;
}

bool connected(const Topology& t, NodeId a, NodeId b) {
  return bfs_distance(t, a, b).has_value();
}

std::vector<NodeSet> components(const Topology& t) {
  std::vector<NodeSet> out;
  NodeSet seen;
  for (NodeId n : t.nodes()) {
    if (seen.contains(n) || !t.node_up(n)) {
      continue;
    }
    NodeSet comp;
    for (const auto& [m, d] : distances_from(t, n)) {
      comp.insert(m);
      seen.insert(m);
    }
    out.push_back(std::move(comp));
  }
  return out;
}

}  // namespace miab::oracle
