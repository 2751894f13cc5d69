#include <gtest/gtest.h>

#include <functional>

#include "miab/generators.hpp"
#include "miab/oracle.hpp"
#include "test_util.hpp"

using namespace miab;
using namespace miab::testing;

namespace {

// Exhaustive simple-path search, independent of the BFS under test.
std::optional<std::uint32_t> brute_distance(const Topology& t, NodeId a,
                                            NodeId b) {
  std::optional<std::uint32_t> best;
  NodeSet seen{a};
  std::function<void(NodeId, std::uint32_t)> walk = [&](NodeId u,
                                                        std::uint32_t d) {
    if (u == b) {
      if (!best || d < *best) best = d;
      return;
    }
    if (best && d >= *best) return;
    for (NodeId v : t.neighbors(u)) {
      if (seen.insert(v).second) {
        walk(v, d + 1);
        seen.erase(v);
      }
    }
  };
  if (t.node_up(a)) walk(a, 0);
  return best;
}

}  // namespace

TEST(BfsDistance, Examples) {
  const Topology line = path_graph(4);
  EXPECT_EQ(oracle::bfs_distance(line, n(0), n(0)), 0u);
  EXPECT_EQ(oracle::bfs_distance(line, n(0), n(3)), 3u);

  const Topology triangles =
      graph(6, {{0, 1}, {1, 2}, {2, 0}, {3, 4}, {4, 5}, {5, 3}});
  EXPECT_FALSE(oracle::bfs_distance(triangles, n(0), n(4)));
  EXPECT_THROW(oracle::bfs_distance(line, n(0), n(9)), UnknownNode);
}

TEST(Connected, BridgeNodeFailureSplitsGraph) {
  Topology t = graph(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {0, 2}});
  EXPECT_TRUE(oracle::connected(t, n(0), n(4)));
  t.fail_node(n(2));
  EXPECT_FALSE(oracle::connected(t, n(0), n(4)));
  EXPECT_FALSE(brute_distance(t, n(0), n(4)));
  EXPECT_EQ(oracle::components(t).size(), 2u);
}

TEST(BfsDistance, MatchesExhaustiveSearch) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Topology t = generate_topology(TopologyKind::generic, 10, seed);
    if (seed % 2 == 1) t.fail_node(n(static_cast<int>(seed)));
    for (NodeId a : t.nodes()) {
      for (NodeId b : t.nodes()) {
        ASSERT_EQ(oracle::bfs_distance(t, a, b), brute_distance(t, a, b))
            << seed << " " << to_string(a) << "->" << to_string(b);
      }
    }
  }
}

TEST(BfsDistance, SymmetricAndTriangleInequality) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Topology t = generate_topology(TopologyKind::generic, 20, seed);
    std::map<NodeId, std::map<NodeId, std::uint32_t>> d;
    for (NodeId a : t.nodes()) d[a] = oracle::distances_from(t, a);
    for (NodeId a : t.nodes()) {
      for (NodeId b : t.nodes()) {
        ASSERT_EQ(d[a][b], d[b][a]);
        for (NodeId c : t.nodes()) {
          ASSERT_LE(d[a][c], d[a][b] + d[b][c]);
        }
      }
    }
  }
}
