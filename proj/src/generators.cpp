#include "miab/generators.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <vector>

#include "miab/oracle.hpp"
#include "miab/random.hpp"

namespace miab {

namespace {

using EdgeSet = std::set<Edge>;

Topology build(std::size_t n, const EdgeSet& edges) {
  Topology t;
  for (std::size_t i = 0; i < n; ++i) {
    t.add_node(NodeId{static_cast<std::uint16_t>(i)});
  }
  for (const Edge& e : edges) {
    t.add_edge(e.a, e.b);
  }
  return t;
}

NodeId nid(std::size_t i) { return NodeId{static_cast<std::uint16_t>(i)}; }

EdgeSet sample_gnp(std::size_t n, double p, Rng& rng) {
  EdgeSet edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (rng.chance(p)) {
        edges.emplace(nid(i), nid(j));
      }
    }
  }
  return edges;
}

template <typename Set>
NodeId pick(const Set& s, Rng& rng) {
  auto it = s.begin();
  std::advance(it, static_cast<std::ptrdiff_t>(rng.below(s.size())));
  return *it;
}

// Links every component to the first one with a single random edge.
void join_components(std::size_t n, EdgeSet& edges, Rng& rng) {
  auto comps = oracle::components(build(n, edges));
  for (std::size_t c = 1; c < comps.size(); ++c) {
    edges.emplace(pick(comps[c], rng), pick(comps[0], rng));
  }
}

bool is_bridge(std::size_t n, const EdgeSet& edges, const Edge& e) {
  EdgeSet without = edges;
  without.erase(e);
  return !oracle::connected(build(n, without), e.a, e.b);
}

Topology generic(std::size_t n, Rng& rng) {
  const double p = std::min(1.0, 3.0 / static_cast<double>(n - 1));
  EdgeSet edges = sample_gnp(n, p, rng);
  const std::size_t target = std::max(edges.size(), n - 1);
  join_components(n, edges, rng);
  // Rewire: drop random cycle edges until the sampled edge count is back.
  while (edges.size() > target) {
    std::vector<Edge> removable;
    for (const Edge& e : edges) {
      if (!is_bridge(n, edges, e)) {
        removable.push_back(e);
      }
    }
    if (removable.empty()) {
      break;
    }
    edges.erase(removable[rng.below(removable.size())]);
  }
  return build(n, edges);
}

Topology sparse_partitioned(std::size_t n, Rng& rng) {
  constexpr std::size_t kMinCluster = 3;
  std::vector<NodeId> order;
  for (std::size_t i = 0; i < n; ++i) {
    order.push_back(nid(i));
  }
  for (std::size_t i = n; i > 1; --i) {
    std::swap(order[i - 1], order[rng.below(i)]);
  }

  // Two or more clusters when there is room for them, up to one per 20 nodes.
  const std::size_t max_clusters =
      std::max<std::size_t>(1, std::min(n / kMinCluster, std::max<std::size_t>(2, n / 20)));
  const std::size_t min_clusters = std::min<std::size_t>(2, max_clusters);
  const std::size_t k =
      min_clusters + rng.below(max_clusters - min_clusters + 1);
  std::vector<std::size_t> sizes(k, std::min(kMinCluster, n / k));
  std::size_t assigned = sizes[0] * k;
  while (assigned < n) {
    ++sizes[rng.below(k)];
    ++assigned;
  }

  EdgeSet edges;
  std::size_t offset = 0;
  for (std::size_t size : sizes) {
    std::vector<NodeId> cluster(order.begin() + offset,
                                order.begin() + offset + size);
    offset += size;
    if (size == 2) {
      edges.emplace(cluster[0], cluster[1]);
      continue;
    }
    for (std::size_t i = 0; size >= 3 && i < size; ++i) {
      edges.emplace(cluster[i], cluster[(i + 1) % size]);
    }
    const std::size_t chords = size / 10;
    for (std::size_t c = 0, tries = 0; c < chords && tries < 10 * size;
         ++tries) {
      const NodeId x = cluster[rng.below(size)];
      const NodeId y = cluster[rng.below(size)];
      if (x != y && edges.emplace(x, y).second) {
        ++c;
      }
    }
  }
  return build(n, edges);
}

Topology dense(std::size_t n, Rng& rng) {
  const double p = std::min(
      1.0, (static_cast<double>(n) / 2.0) / static_cast<double>(n - 1));
  EdgeSet edges = sample_gnp(n, p, rng);
  const std::size_t min_degree = std::min(n - 1, std::max<std::size_t>(1, n / 4));
  std::vector<NodeSet> adj(n);
  for (const Edge& e : edges) {
    adj[e.a.value].insert(e.b);
    adj[e.b.value].insert(e.a);
  }
  for (std::size_t i = 0; i < n; ++i) {
    while (adj[i].size() < min_degree) {
      std::vector<NodeId> candidates;
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i && !adj[i].contains(nid(j))) {
          candidates.push_back(nid(j));
        }
      }
      const NodeId j = candidates[rng.below(candidates.size())];
      edges.emplace(nid(i), j);
      adj[i].insert(j);
      adj[j.value].insert(nid(i));
    }
  }
  join_components(n, edges, rng);
  return build(n, edges);
}

}  // namespace

std::string_view to_string(TopologyKind k) {
  switch (k) {
    case TopologyKind::generic:
      return "generic";
    case TopologyKind::sparse_partitioned:
      return "sparse-partitioned";
    case TopologyKind::dense:
      return "dense";
  }
  return "?";
}

TopologyKind topology_kind_from_string(std::string_view s) {
  for (auto k : {TopologyKind::generic, TopologyKind::sparse_partitioned,
                 TopologyKind::dense}) {
    if (to_string(k) == s) {
      return k;
    }
  }
  throw ConfigError("unknown topology kind '" + std::string(s) + "'");
}

Topology generate_topology(TopologyKind kind, std::size_t n,
                           std::uint64_t seed) {
  if (n < 2 || n > std::numeric_limits<std::uint16_t>::max() + std::size_t{1}) {
    throw InvalidCount("node count must be in [2, 65536], got " +
                       std::to_string(n));
  }
  Rng rng(seed, kTopologyStream + static_cast<std::uint64_t>(kind));
  switch (kind) {
    case TopologyKind::generic:
      return generic(n, rng);
    case TopologyKind::sparse_partitioned:
      return sparse_partitioned(n, rng);
    case TopologyKind::dense:
      return dense(n, rng);
  }
  throw InvalidCount("unknown topology kind");
}

std::string export_dot(const Topology& t, const std::optional<Path>& highlight) {
  std::set<Edge> marked;
  if (highlight) {
    for (NodeId n : *highlight) {
      if (!t.has_node(n)) {
        throw InvalidPath("highlight names unknown node " + to_string(n));
      }
    }
    for (std::size_t i = 1; i < highlight->size(); ++i) {
      const NodeId x = (*highlight)[i - 1];
      const NodeId y = (*highlight)[i];
      if (!t.has_edge(x, y)) {
        throw InvalidPath("highlight step " + to_string(x) + "-" +
                          to_string(y) + " is not an edge");
      }
      marked.emplace(x, y);
    }
  }

  std::string out = "graph miabnet {\n  node [shape=circle];\n";
  for (NodeId n : t.nodes()) {
    out += "  " + to_string(n);
    if (!t.node_up(n)) {
      out += " [style=dashed]";
    }
    out += ";\n";
  }
  for (const Edge& e : t.edges()) {
    out += "  " + to_string(e.a) + " -- " + to_string(e.b);
    std::vector<std::string> attrs;
    if (marked.contains(e)) {
      attrs.emplace_back("color=red");
      attrs.emplace_back("penwidth=2");
    }
    if (t.down_edges().contains(e)) {
      attrs.emplace_back("style=dashed");
    }
    if (!attrs.empty()) {
      out += " [";
      for (std::size_t i = 0; i < attrs.size(); ++i) {
        out += (i ? ", " : "") + attrs[i];
      }
      out += "]";
    }
    out += ";\n";
  }
  out += "}\n";
  return out;
}

}  // namespace miab
