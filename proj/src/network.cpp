#include "miab/network.hpp"

#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace miab {

using nlohmann::json;

Topology Topology::from_edges(const std::vector<NodeId>& nodes,
                              const std::vector<Edge>& edges) {
  Topology t;
  for (NodeId n : nodes) {
    t.add_node(n);
  }
  for (const Edge& e : edges) {
    t.add_edge(e.a, e.b);
  }
  return t;
}

void Topology::add_node(NodeId n) {
  if (!nodes_.insert(n).second) {
    throw ConfigError("duplicate node " + to_string(n));
  }
  adjacency_[n];
}

void Topology::add_edge(NodeId x, NodeId y) {
  if (x == y) {
    throw ConfigError("self-loop at node " + to_string(x));
  }
  require_node(x);
  require_node(y);
  if (!adjacency_[x].insert(y).second) {
    throw ConfigError("duplicate edge " + to_string(x) + "-" + to_string(y));
  }
  adjacency_[y].insert(x);
  ++edge_count_;
}

std::vector<Edge> Topology::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count_);
  for (const auto& [n, adj] : adjacency_) {
    for (NodeId m : adj) {
      if (n < m) {
        out.emplace_back(n, m);
      }
    }
  }
  return out;
}

bool Topology::has_edge(NodeId x, NodeId y) const {
  auto it = adjacency_.find(x);
  return it != adjacency_.end() && it->second.contains(y);
}

bool Topology::node_up(NodeId n) const {
  return has_node(n) && !down_nodes_.contains(n);
}

bool Topology::link_live(NodeId x, NodeId y) const {
  return has_edge(x, y) && node_up(x) && node_up(y) &&
         !down_edges_.contains(Edge{x, y});
}

NodeSet Topology::neighbors(NodeId n) const {
  require_node(n);
  NodeSet out;
  if (down_nodes_.contains(n)) {
    return out;
  }
  for (NodeId m : adjacency_.at(n)) {
    if (!down_nodes_.contains(m) && !down_edges_.contains(Edge{n, m})) {
      out.insert(out.end(), m);
    }
  }
  return out;
}

const NodeSet& Topology::adjacent(NodeId n) const {
  require_node(n);
  return adjacency_.at(n);
}

void Topology::fail_node(NodeId n) {
  require_node(n);
  down_nodes_.insert(n);
}

void Topology::restore_node(NodeId n) {
  require_node(n);
  down_nodes_.erase(n);
}

void Topology::fail_link(NodeId x, NodeId y) {
  require_edge(x, y);
  down_edges_.insert(Edge{x, y});
}

void Topology::restore_link(NodeId x, NodeId y) {
  require_edge(x, y);
  down_edges_.erase(Edge{x, y});
}

void Topology::require_node(NodeId n) const {
  if (!has_node(n)) {
    throw UnknownNode("unknown node " + to_string(n));
  }
}

void Topology::require_edge(NodeId x, NodeId y) const {
  if (!has_edge(x, y)) {
    throw UnknownEdge("unknown edge " + to_string(x) + "-" + to_string(y));
  }
}

std::vector<std::pair<NodeId, RouteEntry>> hello_tick(const Topology& t,
                                                      NodeState& node) {
  if (t.down_nodes().empty() && t.down_edges().empty() &&
      t.adjacent(node.nid) == node.nbors) {
    return {};
  }
  NodeSet fresh = t.neighbors(node.nid);
  if (fresh == node.nbors) {
    return {};
  }
  std::vector<std::pair<NodeId, RouteEntry>> purged;
  for (NodeId old : node.nbors) {
    if (!fresh.contains(old)) {
      auto removed = node.rtab.purge_next_hop(old);
      purged.insert(purged.end(), removed.begin(), removed.end());
    }
  }
  node.nbors = std::move(fresh);
  return purged;
}

namespace {

NodeId node_from_json(const json& v, const std::string& where) {
  if (!v.is_number_integer() || v.get<long long>() < 0 ||
      v.get<long long>() > std::numeric_limits<std::uint16_t>::max()) {
    throw ConfigError(where + ": expected a node id in [0, 65535], got " +
                      v.dump());
  }
  return NodeId{v.get<std::uint16_t>()};
}

}  // namespace

Topology parse_topology(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  if (!doc.is_object() || !doc.contains("nodes") || !doc["nodes"].is_array()) {
    throw ConfigError(origin + ": field 'nodes' must be an array");
  }
  if (!doc.contains("edges") || !doc["edges"].is_array()) {
    throw ConfigError(origin + ": field 'edges' must be an array");
  }
  Topology t;
  try {
    for (const json& n : doc["nodes"]) {
      t.add_node(node_from_json(n, origin + ": field 'nodes'"));
    }
    for (const json& e : doc["edges"]) {
      if (!e.is_array() || e.size() != 2) {
        throw ConfigError(origin + ": field 'edges': expected [a, b], got " +
                          e.dump());
      }
      const std::string where = origin + ": field 'edges'";
      t.add_edge(node_from_json(e[0], where), node_from_json(e[1], where));
    }
  } catch (const UnknownNode& e) {
    throw ConfigError(origin + ": field 'edges': " + e.what());
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    if (msg.rfind(origin, 0) == 0) {
      throw;
    }
    throw ConfigError(origin + ": " + msg);
  }
  return t;
}

Topology load_topology(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError(path.string() + ": cannot open topology file");
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_topology(buf.str(), path.string());
}

std::string dump_topology(const Topology& t) {
  json doc;
  doc["nodes"] = json::array();
  for (NodeId n : t.nodes()) {
    doc["nodes"].push_back(n.value);
  }
  doc["edges"] = json::array();
  for (const Edge& e : t.edges()) {
    doc["edges"].push_back({e.a.value, e.b.value});
  }
  return doc.dump() + "\n";
}

}  // namespace miab
