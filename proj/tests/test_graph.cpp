#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "rumorloc/graph.hpp"
#include "rumorloc/rng.hpp"

using namespace rumorloc;

namespace {

SocialGraph from_pairs(const std::vector<std::pair<NodeId, NodeId>>& pairs, double mean = 1.0,
                       double var = 0.0) {
  std::vector<EdgeRecord> recs;
  for (const auto& [u, v] : pairs) recs.push_back({u, v, {mean, var}});
  return SocialGraph(recs);
}

// Random connected graph: spanning tree + a few extra edges, means in [1,2].
SocialGraph random_graph(int n, int extra_edges, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<EdgeRecord> recs;
  std::set<std::pair<NodeId, NodeId>> seen;
  for (NodeId i = 1; i < n; ++i) {
    const NodeId p = static_cast<NodeId>(rng.uniform_below(static_cast<std::uint64_t>(i)));
    recs.push_back({p, i, {rng.uniform(1.0, 2.0), rng.uniform(0.0, 0.1)}});
    seen.insert({p, i});
  }
  int added = 0;
  while (added < extra_edges) {
    const NodeId a = static_cast<NodeId>(rng.uniform_below(static_cast<std::uint64_t>(n)));
    const NodeId b = static_cast<NodeId>(rng.uniform_below(static_cast<std::uint64_t>(n)));
    if (a == b) continue;
    const auto key = a < b ? std::pair{a, b} : std::pair{b, a};
    if (!seen.insert(key).second) continue;
    recs.push_back({key.first, key.second, {rng.uniform(1.0, 2.0), rng.uniform(0.0, 0.1)}});
    ++added;
  }
  return SocialGraph(recs);
}

// All-simple-paths minimum (mean-weight) from root to every node; the
// independent oracle for Dijkstra on small graphs.
void min_paths_dfs(const SocialGraph& g, int at, int goal, std::vector<char>& used, double cost,
                   double& best) {
  if (at == goal) {
    best = std::min(best, cost);
    return;
  }
  for (const auto& nb : g.neighbors_at(at)) {
    if (used[static_cast<std::size_t>(nb.target)]) continue;
    used[static_cast<std::size_t>(nb.target)] = 1;
    min_paths_dfs(g, nb.target, goal, used, cost + nb.mean, best);
    used[static_cast<std::size_t>(nb.target)] = 0;
  }
}

double brute_force_dist(const SocialGraph& g, int from, int to) {
  std::vector<char> used(static_cast<std::size_t>(g.node_count()), 0);
  used[static_cast<std::size_t>(from)] = 1;
  double best = std::numeric_limits<double>::infinity();
  min_paths_dfs(g, from, to, used, 0.0, best);
  return best;
}

// Naive betweenness oracle: Floyd-Warshall distances (independent of the
// library's Dijkstra), shortest-path counts by DAG dynamic programming,
// pair dependencies summed directly over ordered pairs.
std::vector<double> brute_force_betweenness(const SocialGraph& g, double tie_tol) {
  const int n = g.node_count();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> dist(n, std::vector<double>(n, inf));
  for (int i = 0; i < n; ++i) dist[i][i] = 0.0;
  for (const auto& e : g.edges()) {
    const int a = g.index_of(e.u), b = g.index_of(e.v);
    dist[a][b] = std::min(dist[a][b], e.delay.mean);
    dist[b][a] = std::min(dist[b][a], e.delay.mean);
  }
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (dist[i][k] + dist[k][j] < dist[i][j]) dist[i][j] = dist[i][k] + dist[k][j];

  const auto on_path = [&](int s, int v, int t) {
    return std::abs(dist[s][v] + dist[v][t] - dist[s][t]) <= tie_tol;
  };
  // sigma[s][t]: count paths along the shortest-path DAG in distance order.
  std::vector<std::vector<double>> sigma(n, std::vector<double>(n, 0.0));
  for (int s = 0; s < n; ++s) {
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) { return dist[s][a] < dist[s][b]; });
    sigma[s][s] = 1.0;
    for (const int v : order) {
      if (v == s || dist[s][v] == inf) continue;
      for (const auto& nb : g.neighbors_at(v)) {
        const int u = nb.target;
        if (std::abs(dist[s][u] + nb.mean - dist[s][v]) <= tie_tol) sigma[s][v] += sigma[s][u];
      }
    }
  }
  std::vector<double> score(static_cast<std::size_t>(n), 0.0);
  for (int s = 0; s < n; ++s) {
    for (int t = 0; t < n; ++t) {
      if (s == t || dist[s][t] == inf) continue;
      for (int v = 0; v < n; ++v) {
        if (v == s || v == t) continue;
        if (on_path(s, v, t)) {
          score[static_cast<std::size_t>(v)] += sigma[s][v] * sigma[v][t] / sigma[s][t];
        }
      }
    }
  }
  if (n >= 3) {
    const double norm = static_cast<double>(n - 1) * static_cast<double>(n - 2);
    for (auto& x : score) x /= norm;
  }
  return score;
}

double direct_modularity(const SocialGraph& g, const std::vector<ClusterId>& by_index) {
  // Q = (1/2m) sum_ij (A_ij - k_i k_j / 2m) delta(c_i, c_j), zero-diagonal A.
  const int n = g.node_count();
  const double two_m = 2.0 * g.edge_count();
  if (two_m == 0.0) return 0.0;
  std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
  for (const auto& e : g.edges()) {
    const int i = g.index_of(e.u), j = g.index_of(e.v);
    a[i][j] += 1.0;
    a[j][i] += 1.0;
  }
  std::vector<double> deg(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) deg[static_cast<std::size_t>(i)] += a[i][j];
  double q = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (by_index[static_cast<std::size_t>(i)] != by_index[static_cast<std::size_t>(j)]) continue;
      q += a[i][j] - deg[static_cast<std::size_t>(i)] * deg[static_cast<std::size_t>(j)] / two_m;
    }
  }
  return q / two_m;
}

}  // namespace

TEST_CASE("load_edge_list basics") {
  SUBCASE("two lines with defaults make a path graph") {
    std::istringstream in("0 1\n1 2");
    const SocialGraph g = load_graph(in, {1.0, 0.1});
    CHECK(g.node_count() == 3);
    CHECK(g.edge_count() == 2);
    CHECK(g.edges()[0].delay.mean == 1.0);
    CHECK(g.edges()[0].delay.variance == 0.1);
  }
  SUBCASE("empty stream gives an empty graph") {
    std::istringstream in("");
    const SocialGraph g = load_graph(in);
    CHECK(g.node_count() == 0);
    CHECK(g.edge_count() == 0);
  }
  SUBCASE("explicit fields are echoed") {
    std::istringstream in("0 1 2.5 0.4");
    const SocialGraph g = load_graph(in);
    REQUIRE(g.edge_count() == 1);
    CHECK(g.edges()[0].delay.mean == 2.5);
    CHECK(g.edges()[0].delay.variance == 0.4);
  }
  SUBCASE("comments and blank lines are skipped") {
    std::istringstream in("# header\n\n0 1 # trailing comment\n# bye\n");
    const SocialGraph g = load_graph(in);
    CHECK(g.edge_count() == 1);
  }
  SUBCASE("malformed line reports its number") {
    std::istringstream in("0 1\nnot numbers here\n");
    try {
      load_graph(in);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
  }
  SUBCASE("too many fields is malformed") {
    std::istringstream in("0 1 2.5 0.4 9");
    CHECK_THROWS_AS(load_graph(in), ParseError);
  }
  SUBCASE("nonpositive mean is rejected") {
    std::istringstream in("0 1 -1 0.1");
    CHECK_THROWS_AS(load_graph(in), ValidationError);
  }
  SUBCASE("duplicate edges collapse keeping the first record") {
    std::istringstream in("0 1 2.0 0.1\n1 0 9.0 9.0");
    const SocialGraph g = load_graph(in);
    REQUIRE(g.edge_count() == 1);
    CHECK(g.edges()[0].delay.mean == 2.0);
  }
}

TEST_CASE("SocialGraph invariants") {
  SUBCASE("self-loop rejected") {
    CHECK_THROWS_AS(from_pairs({{3, 3}}), ValidationError);
  }
  SUBCASE("negative variance rejected") {
    const std::vector<EdgeRecord> recs{{0, 1, {1.0, -0.5}}};
    CHECK_THROWS_AS(SocialGraph{recs}, ValidationError);
  }
  SUBCASE("edges are canonical and sorted") {
    const SocialGraph g = from_pairs({{5, 2}, {1, 0}});
    REQUIRE(g.edge_count() == 2);
    CHECK(g.edges()[0].u == 0);
    CHECK(g.edges()[0].v == 1);
    CHECK(g.edges()[1].u == 2);
    CHECK(g.edges()[1].v == 5);
  }
  SUBCASE("nodes ascend and index round-trips") {
    const SocialGraph g = from_pairs({{7, 2}, {9, 2}});
    CHECK(g.nodes() == std::vector<NodeId>{2, 7, 9});
    for (int i = 0; i < g.node_count(); ++i) CHECK(g.index_of(g.node_at(i)) == i);
    CHECK_THROWS_AS(g.index_of(4), NotFoundError);
  }
  SUBCASE("extra_nodes admits isolated nodes") {
    std::vector<EdgeRecord> recs{{0, 1, {1.0, 0.0}}};
    const SocialGraph g(recs, {5});
    CHECK(g.node_count() == 3);
    CHECK(g.degree_at(g.index_of(5)) == 0);
  }
}

TEST_CASE("shortest_path_tree examples") {
  SUBCASE("path graph accumulates means") {
    const SocialGraph g = from_pairs({{0, 1}, {1, 2}});
    const ShortestPathTree t = shortest_path_tree(g, 0);
    CHECK(t.dist_mean[0] == 0.0);
    CHECK(t.dist_mean[1] == 1.0);
    CHECK(t.dist_mean[2] == 2.0);
    CHECK(t.dist_var[0] == 0.0);
  }
  SUBCASE("star center reaches all leaves at the spoke mean") {
    const SocialGraph g = from_pairs({{0, 1}, {0, 2}, {0, 3}}, 2.0);
    const ShortestPathTree t = shortest_path_tree(g, 0);
    for (const NodeId leaf : {1, 2, 3}) {
      CHECK(t.dist_mean[static_cast<std::size_t>(g.index_of(leaf))] == 2.0);
    }
  }
  SUBCASE("equal-cost routes resolve to the smaller parent id") {
    // diamond: 0-1-3 and 0-2-3 tie on mean; variance exposes the choice
    std::vector<EdgeRecord> recs{
        {0, 1, {1.0, 5.0}}, {0, 2, {1.0, 1.0}}, {1, 3, {1.0, 5.0}}, {2, 3, {1.0, 1.0}}};
    const SocialGraph g(recs);
    const ShortestPathTree t = shortest_path_tree(g, 0);
    CHECK(g.node_at(t.parent[static_cast<std::size_t>(g.index_of(3))]) == 1);
    CHECK(t.dist_var[static_cast<std::size_t>(g.index_of(3))] == 10.0);
  }
  SUBCASE("missing root errors") {
    const SocialGraph g = from_pairs({{0, 1}});
    CHECK_THROWS_AS(shortest_path_tree(g, 9), NotFoundError);
  }
  SUBCASE("unreachable nodes stay at infinity") {
    const SocialGraph g = from_pairs({{0, 1}, {2, 3}});
    const ShortestPathTree t = shortest_path_tree(g, 0);
    CHECK_FALSE(t.reachable(g.index_of(2)));
    CHECK(t.parent[static_cast<std::size_t>(g.index_of(2))] == -1);
  }
}

TEST_CASE("dijkstra matches all-simple-paths enumeration on small graphs") {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const SocialGraph g = random_graph(10 + static_cast<int>(seed % 3), 6, seed);
    const ShortestPathTree t = shortest_path_tree(g, g.node_at(0));
    for (int v = 0; v < g.node_count(); ++v) {
      const double oracle = brute_force_dist(g, 0, v);
      CHECK(t.dist_mean[static_cast<std::size_t>(v)] ==
            doctest::Approx(oracle).epsilon(1e-12));
    }
    // path edge lists agree with the parent pointers and the distance sums
    for (int v = 0; v < g.node_count(); ++v) {
      double mean_sum = 0.0, var_sum = 0.0;
      for (const int e : t.path_edges(v)) {
        mean_sum += g.edges()[static_cast<std::size_t>(e)].delay.mean;
        var_sum += g.edges()[static_cast<std::size_t>(e)].delay.variance;
      }
      CHECK(mean_sum == doctest::Approx(t.dist_mean[static_cast<std::size_t>(v)]).epsilon(1e-12));
      CHECK(var_sum == doctest::Approx(t.dist_var[static_cast<std::size_t>(v)]).epsilon(1e-12));
      if (t.parent[static_cast<std::size_t>(v)] >= 0) {
        const auto p = static_cast<std::size_t>(t.parent[static_cast<std::size_t>(v)]);
        CHECK(t.dist_mean[p] <= t.dist_mean[static_cast<std::size_t>(v)]);
      }
    }
  }
}

TEST_CASE("betweenness examples") {
  SUBCASE("path 0-1-2: only the interior node scores") {
    const SocialGraph g = from_pairs({{0, 1}, {1, 2}});
    const auto bc = betweenness_centrality(g);
    CHECK(bc[static_cast<std::size_t>(g.index_of(1))] == doctest::Approx(1.0));
    CHECK(bc[static_cast<std::size_t>(g.index_of(0))] == 0.0);
    CHECK(bc[static_cast<std::size_t>(g.index_of(2))] == 0.0);
  }
  SUBCASE("star center carries every leaf pair") {
    const SocialGraph g = from_pairs({{0, 1}, {0, 2}, {0, 3}});
    const auto bc = betweenness_centrality(g);
    CHECK(bc[static_cast<std::size_t>(g.index_of(0))] == doctest::Approx(1.0));
  }
  SUBCASE("P4 interior node") {
    const SocialGraph g = from_pairs({{0, 1}, {1, 2}, {2, 3}});
    const auto bc = betweenness_centrality(g);
    CHECK(bc[static_cast<std::size_t>(g.index_of(1))] == doctest::Approx(4.0 / 6.0));
  }
  SUBCASE("complete K4 is all-equal (zero: direct edges win)") {
    const SocialGraph g =
        from_pairs({{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}});
    for (const double s : betweenness_centrality(g)) CHECK(s == doctest::Approx(0.0));
  }
  SUBCASE("tiny graphs get zero scores") {
    const SocialGraph g = from_pairs({{0, 1}});
    for (const double s : betweenness_centrality(g)) CHECK(s == 0.0);
  }
}

TEST_CASE("betweenness matches the counting oracle") {
  SUBCASE("random weighted graphs (unique shortest paths)") {
    for (std::uint64_t seed = 11; seed <= 14; ++seed) {
      const SocialGraph g = random_graph(20, 12, seed);
      const auto got = betweenness_centrality(g);
      const auto want = brute_force_betweenness(g, 1e-9);
      for (std::size_t i = 0; i < want.size(); ++i) {
        CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-9));
      }
    }
  }
  SUBCASE("unit-weight grid exercises equal-cost path splitting") {
    std::vector<std::pair<NodeId, NodeId>> pairs;
    const int w = 4, h = 3;  // 3x4 grid, many tied geodesics
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const NodeId id = y * w + x;
        if (x + 1 < w) pairs.push_back({id, id + 1});
        if (y + 1 < h) pairs.push_back({id, id + w});
      }
    }
    const SocialGraph g = from_pairs(pairs);
    const auto got = betweenness_centrality(g);
    const auto want = brute_force_betweenness(g, 1e-12);
    for (std::size_t i = 0; i < want.size(); ++i) {
      CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-9));
    }
  }
}

TEST_CASE("select_sensors") {
  SUBCASE("path graph, k=2 picks the interior then node 0") {
    const SocialGraph g = from_pairs({{0, 1}, {1, 2}});
    const auto s = select_sensors(g, 2, betweenness_centrality(g));
    CHECK(s == std::vector<NodeId>{1, 0});
  }
  SUBCASE("all-equal scores fall back to smallest ids") {
    const SocialGraph g = from_pairs({{4, 7}, {7, 9}, {9, 12}});
    const std::vector<double> flat(4, 0.5);
    CHECK(select_sensors(g, 3, flat) == std::vector<NodeId>{4, 7, 9});
  }
  SUBCASE("k out of range errors") {
    const SocialGraph g = from_pairs({{0, 1}, {1, 2}});
    CHECK_THROWS_AS(select_sensors(g, 1, betweenness_centrality(g)), ArgumentError);
    CHECK_THROWS_AS(select_sensors(g, 4, betweenness_centrality(g)), ArgumentError);
  }
  SUBCASE("matches a sort-by-(score desc, id asc) oracle") {
    const SocialGraph g = random_graph(20, 10, 99);
    const auto bc = betweenness_centrality(g);
    std::vector<NodeId> want = g.nodes();
    std::sort(want.begin(), want.end(), [&](NodeId a, NodeId b) {
      const double sa = bc[static_cast<std::size_t>(g.index_of(a))];
      const double sb = bc[static_cast<std::size_t>(g.index_of(b))];
      if (sa != sb) return sa > sb;
      return a < b;
    });
    want.resize(5);
    CHECK(select_sensors(g, 5, bc) == want);
  }
}

TEST_CASE("modularity") {
  SUBCASE("single edge, both nodes together vs apart") {
    const SocialGraph g = from_pairs({{0, 1}});
    CHECK(modularity_of(g, {0, 0}) == doctest::Approx(direct_modularity(g, {0, 0})).epsilon(1e-12));
    CHECK(modularity_of(g, {0, 1}) == doctest::Approx(direct_modularity(g, {0, 1})).epsilon(1e-12));
  }
  SUBCASE("random assignments agree with the double-loop definition") {
    const SocialGraph g = random_graph(14, 8, 5);
    Rng rng(77);
    for (int rep = 0; rep < 10; ++rep) {
      std::vector<ClusterId> by_index;
      for (int i = 0; i < g.node_count(); ++i) {
        by_index.push_back(static_cast<ClusterId>(rng.uniform_below(4)));
      }
      CHECK(modularity_of(g, by_index) ==
            doctest::Approx(direct_modularity(g, by_index)).epsilon(1e-12));
    }
  }
}

TEST_CASE("louvain") {
  SUBCASE("two K5 cliques joined by a bridge split exactly in two") {
    std::vector<std::pair<NodeId, NodeId>> pairs;
    for (NodeId a = 0; a < 5; ++a)
      for (NodeId b = a + 1; b < 5; ++b) pairs.push_back({a, b});
    for (NodeId a = 5; a < 10; ++a)
      for (NodeId b = a + 1; b < 10; ++b) pairs.push_back({a, b});
    pairs.push_back({4, 5});
    const SocialGraph g = from_pairs(pairs);
    const Partition p = louvain_partition(g, 42);
    REQUIRE(p.cluster_count() == 2);
    for (int i = 0; i < 5; ++i) CHECK(p.cluster_by_index[static_cast<std::size_t>(i)] ==
                                      p.cluster_by_index[0]);
    for (int i = 5; i < 10; ++i) CHECK(p.cluster_by_index[static_cast<std::size_t>(i)] ==
                                       p.cluster_by_index[5]);
    CHECK(p.cluster_by_index[0] != p.cluster_by_index[5]);

    // the 2-clique split beats every assignment into at most 3 blocks
    double best = -1.0;
    std::vector<ClusterId> by_index(10, 0);
    for (long long code = 0; code < 59049; ++code) {  // 3^10
      long long c = code;
      for (int i = 0; i < 10; ++i) {
        by_index[static_cast<std::size_t>(i)] = static_cast<ClusterId>(c % 3);
        c /= 3;
      }
      best = std::max(best, modularity_of(g, by_index));
    }
    CHECK(p.modularity == doctest::Approx(best).epsilon(1e-12));
  }
  SUBCASE("modularity echo matches recomputation") {
    const SocialGraph g = random_graph(24, 14, 123);
    const Partition p = louvain_partition(g, 7);
    CHECK(p.modularity ==
          doctest::Approx(modularity_of(g, p.cluster_by_index)).epsilon(1e-12));
  }
  SUBCASE("beats the all-singletons baseline") {
    const SocialGraph g = random_graph(24, 14, 321);
    const Partition p = louvain_partition(g, 7);
    std::vector<ClusterId> singletons;
    for (int i = 0; i < g.node_count(); ++i) singletons.push_back(i);
    CHECK(p.modularity >= modularity_of(g, singletons));
  }
  SUBCASE("disconnected triangles never merge") {
    const SocialGraph g = from_pairs({{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}});
    const Partition p = louvain_partition(g, 1);
    CHECK(p.cluster_count() == 2);
  }
  SUBCASE("deterministic per seed") {
    const SocialGraph g = random_graph(30, 20, 9);
    const Partition a = louvain_partition(g, 5);
    const Partition b = louvain_partition(g, 5);
    CHECK(a.cluster_by_index == b.cluster_by_index);
    CHECK(a.modularity == b.modularity);
  }
}

TEST_CASE("partition_from_assignment renumbers by first appearance") {
  const SocialGraph g = from_pairs({{0, 1}, {1, 2}});
  const Partition p = partition_from_assignment(g, {7, 3, 7});
  CHECK(p.cluster_by_index == std::vector<ClusterId>{0, 1, 0});
  REQUIRE(p.cluster_count() == 2);
  CHECK(p.members[0] == std::vector<int>{0, 2});
  CHECK(p.members[1] == std::vector<int>{1});
}

TEST_CASE("gateway graph") {
  SUBCASE("minimal bridge") {
    const SocialGraph g = from_pairs({{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}, {2, 3}});
    const Partition p = partition_from_assignment(g, {0, 0, 0, 1, 1, 1});
    const GatewayGraph gw = build_gateway_graph(g, p);
    CHECK(gw.gateway_nodes == std::vector<NodeId>{2, 3});
    REQUIRE(gw.graph.edge_count() == 1);
    CHECK(gw.graph.edges()[0].u == 2);
    CHECK(gw.graph.edges()[0].v == 3);
    CHECK(gw.home_cluster.at(2) == 0);
    CHECK(gw.home_cluster.at(3) == 1);
  }
  SUBCASE("three clusters in a bridge triangle") {
    std::vector<std::pair<NodeId, NodeId>> pairs;
    for (NodeId base : {0, 3, 6}) {
      pairs.push_back({base, base + 1});
      pairs.push_back({base + 1, base + 2});
      pairs.push_back({base, base + 2});
    }
    pairs.push_back({2, 3});
    pairs.push_back({5, 6});
    pairs.push_back({8, 0});
    const SocialGraph g = from_pairs(pairs);
    const Partition p = partition_from_assignment(g, {0, 0, 0, 1, 1, 1, 2, 2, 2});
    const GatewayGraph gw = build_gateway_graph(g, p);
    CHECK(gw.gateway_nodes == std::vector<NodeId>{0, 2, 3, 5, 6, 8});
    CHECK(gw.graph.edge_count() == 6);  // 3 bridges + 3 induced intra-cluster edges
    // every gateway node touches an inter-cluster edge
    for (const NodeId v : gw.gateway_nodes) {
      bool crosses = false;
      for (const auto& nb : g.neighbors(v)) {
        const int vi = g.index_of(v);
        if (p.cluster_by_index[static_cast<std::size_t>(vi)] !=
            p.cluster_by_index[static_cast<std::size_t>(nb.target)]) {
          crosses = true;
        }
      }
      CHECK(crosses);
    }
  }
  SUBCASE("single cluster errors") {
    const SocialGraph g = from_pairs({{0, 1}, {1, 2}});
    const Partition p = partition_from_assignment(g, {0, 0, 0});
    CHECK_THROWS_AS(build_gateway_graph(g, p), EmptyGatewayError);
  }
}

TEST_CASE("extract_subgraph and bfs_hops") {
  const SocialGraph g = from_pairs({{0, 1}, {1, 2}, {2, 3}});
  SUBCASE("induced edges survive, absent ones do not") {
    const SocialGraph s = extract_subgraph(g, {0, 1, 3});
    CHECK(s.node_count() == 3);
    CHECK(s.edge_count() == 1);
    CHECK(s.degree_at(s.index_of(3)) == 0);
  }
  SUBCASE("hop distances") {
    CHECK(bfs_hops(g, 0, 3) == 3);
    CHECK(bfs_hops(g, 2, 2) == 0);
    const SocialGraph h = from_pairs({{0, 1}, {2, 3}});
    CHECK(bfs_hops(h, 0, 3) == -1);
  }
}
