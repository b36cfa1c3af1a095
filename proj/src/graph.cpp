#include "rumorloc/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <queue>
#include <set>
#include <sstream>
#include <unordered_map>

#include "rumorloc/rng.hpp"

namespace rumorloc {

namespace {

std::pair<NodeId, NodeId> canonical(NodeId u, NodeId v) {
  return u < v ? std::pair{u, v} : std::pair{v, u};
}

}  // namespace

SocialGraph::SocialGraph(const std::vector<EdgeRecord>& records,
                         const std::vector<NodeId>& extra_nodes) {
  std::set<std::pair<NodeId, NodeId>> seen;
  edges_.reserve(records.size());
  for (const auto& r : records) {
    if (r.u == r.v) {
      throw ValidationError("self-loop on node " + std::to_string(r.u));
    }
    if (!(r.delay.mean > 0.0)) {
      throw ValidationError("edge (" + std::to_string(r.u) + ", " + std::to_string(r.v) +
                            ") has nonpositive mean delay");
    }
    if (r.delay.variance < 0.0) {
      throw ValidationError("edge (" + std::to_string(r.u) + ", " + std::to_string(r.v) +
                            ") has negative delay variance");
    }
    const auto key = canonical(r.u, r.v);
    if (!seen.insert(key).second) continue;  // duplicate: keep first
    edges_.push_back(EdgeRecord{key.first, key.second, r.delay});
  }
  std::sort(edges_.begin(), edges_.end(), [](const EdgeRecord& a, const EdgeRecord& b) {
    return std::pair{a.u, a.v} < std::pair{b.u, b.v};
  });

  std::set<NodeId> node_set(extra_nodes.begin(), extra_nodes.end());
  for (const auto& e : edges_) {
    node_set.insert(e.u);
    node_set.insert(e.v);
  }
  nodes_.assign(node_set.begin(), node_set.end());

  adjacency_.assign(nodes_.size(), {});
  for (int ei = 0; ei < static_cast<int>(edges_.size()); ++ei) {
    const auto& e = edges_[static_cast<std::size_t>(ei)];
    const int ui = index_of(e.u);
    const int vi = index_of(e.v);
    adjacency_[static_cast<std::size_t>(ui)].push_back(
        Neighbor{vi, e.delay.mean, e.delay.variance, ei});
    adjacency_[static_cast<std::size_t>(vi)].push_back(
        Neighbor{ui, e.delay.mean, e.delay.variance, ei});
  }
  for (auto& nbrs : adjacency_) {
    std::sort(nbrs.begin(), nbrs.end(),
              [](const Neighbor& a, const Neighbor& b) { return a.target < b.target; });
  }
}

bool SocialGraph::has_node(NodeId id) const {
  return std::binary_search(nodes_.begin(), nodes_.end(), id);
}

int SocialGraph::index_of(NodeId id) const {
  const auto it = std::lower_bound(nodes_.begin(), nodes_.end(), id);
  if (it == nodes_.end() || *it != id) {
    throw NotFoundError("node " + std::to_string(id) + " not in graph");
  }
  return static_cast<int>(it - nodes_.begin());
}

std::vector<int> ShortestPathTree::path_edges(int index) const {
  if (!reachable(index)) {
    throw NotFoundError("node index " + std::to_string(index) + " unreachable from root");
  }
  std::vector<int> rev;
  int cur = index;
  while (parent[static_cast<std::size_t>(cur)] != -1) {
    rev.push_back(parent_edge[static_cast<std::size_t>(cur)]);
    cur = parent[static_cast<std::size_t>(cur)];
  }
  std::reverse(rev.begin(), rev.end());
  return rev;
}

std::vector<EdgeRecord> load_edge_list(std::istream& in, EdgeDelay default_delay) {
  std::vector<EdgeRecord> records;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    if (line.find_first_not_of(" \t\r\n\v\f") == std::string::npos) continue;
    std::istringstream fields(line);
    NodeId u, v;
    if (!(fields >> u) || !(fields >> v)) {
      throw ParseError("line " + std::to_string(line_no) + ": expected two node ids");
    }
    EdgeRecord r{u, v, default_delay};
    double mean, variance;
    if (fields >> mean) {
      r.delay.mean = mean;
      if (fields >> variance) r.delay.variance = variance;
    }
    std::string trailing;
    if (fields >> trailing) {
      throw ParseError("line " + std::to_string(line_no) + ": unexpected trailing field '" +
                       trailing + "'");
    }
    if (!(r.delay.mean > 0.0)) {
      throw ValidationError("line " + std::to_string(line_no) + ": mean delay must be positive");
    }
    if (r.delay.variance < 0.0) {
      throw ValidationError("line " + std::to_string(line_no) + ": variance must be nonnegative");
    }
    records.push_back(r);
  }
  return records;
}

SocialGraph load_graph(std::istream& in, EdgeDelay default_delay) {
  return SocialGraph(load_edge_list(in, default_delay));
}

ShortestPathTree shortest_path_tree(const SocialGraph& g, NodeId root) {
  const int n = g.node_count();
  const int root_idx = g.index_of(root);

  ShortestPathTree t;
  t.root = root;
  t.root_index = root_idx;
  t.dist_mean.assign(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  t.dist_var.assign(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  t.parent.assign(static_cast<std::size_t>(n), -1);
  t.parent_edge.assign(static_cast<std::size_t>(n), -1);

  t.dist_mean[static_cast<std::size_t>(root_idx)] = 0.0;
  t.dist_var[static_cast<std::size_t>(root_idx)] = 0.0;

  using Item = std::pair<double, int>;  // (dist, node index)
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> queue;
  std::vector<char> settled(static_cast<std::size_t>(n), 0);
  queue.emplace(0.0, root_idx);

  while (!queue.empty()) {
    const auto [dist, u] = queue.top();
    queue.pop();
    if (settled[static_cast<std::size_t>(u)]) continue;
    settled[static_cast<std::size_t>(u)] = 1;
    for (const auto& nb : g.neighbors_at(u)) {
      if (settled[static_cast<std::size_t>(nb.target)]) continue;
      const double cand = dist + nb.mean;
      const double cur = t.dist_mean[static_cast<std::size_t>(nb.target)];
      const bool better = cand < cur;
      // Equal-cost tie: keep the parent with the smaller NodeId. Safe
      // because positive means guarantee the target is not yet settled.
      const bool tie_win =
          cand == cur && t.parent[static_cast<std::size_t>(nb.target)] != -1 &&
          g.node_at(u) < g.node_at(t.parent[static_cast<std::size_t>(nb.target)]);
      if (better || tie_win) {
        t.dist_mean[static_cast<std::size_t>(nb.target)] = cand;
        t.dist_var[static_cast<std::size_t>(nb.target)] =
            t.dist_var[static_cast<std::size_t>(u)] + nb.variance;
        t.parent[static_cast<std::size_t>(nb.target)] = u;
        t.parent_edge[static_cast<std::size_t>(nb.target)] = nb.edge;
        if (better) queue.emplace(cand, nb.target);
      }
    }
  }
  return t;
}

std::vector<double> betweenness_centrality(const SocialGraph& g) {
  const int n = g.node_count();
  std::vector<double> score(static_cast<std::size_t>(n), 0.0);
  if (n < 3) return score;

  // Brandes accumulation; one Dijkstra per source. Ordered-pair counting:
  // each unordered pair contributes from both endpoints.
  std::vector<double> dist(static_cast<std::size_t>(n));
  std::vector<double> sigma(static_cast<std::size_t>(n));
  std::vector<double> delta(static_cast<std::size_t>(n));
  std::vector<std::vector<int>> pred(static_cast<std::size_t>(n));
  std::vector<char> settled(static_cast<std::size_t>(n));
  std::vector<int> order;
  order.reserve(static_cast<std::size_t>(n));

  for (int s = 0; s < n; ++s) {
    std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
    std::fill(sigma.begin(), sigma.end(), 0.0);
    std::fill(delta.begin(), delta.end(), 0.0);
    std::fill(settled.begin(), settled.end(), 0);
    for (auto& p : pred) p.clear();
    order.clear();

    dist[static_cast<std::size_t>(s)] = 0.0;
    sigma[static_cast<std::size_t>(s)] = 1.0;
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> queue;
    queue.emplace(0.0, s);

    while (!queue.empty()) {
      const auto [d, u] = queue.top();
      queue.pop();
      if (settled[static_cast<std::size_t>(u)]) continue;
      settled[static_cast<std::size_t>(u)] = 1;
      order.push_back(u);
      for (const auto& nb : g.neighbors_at(u)) {
        const int w = nb.target;
        if (settled[static_cast<std::size_t>(w)]) continue;
        const double cand = d + nb.mean;
        if (cand < dist[static_cast<std::size_t>(w)]) {
          dist[static_cast<std::size_t>(w)] = cand;
          sigma[static_cast<std::size_t>(w)] = sigma[static_cast<std::size_t>(u)];
          pred[static_cast<std::size_t>(w)].assign(1, u);
          queue.emplace(cand, w);
        } else if (cand == dist[static_cast<std::size_t>(w)]) {
          sigma[static_cast<std::size_t>(w)] += sigma[static_cast<std::size_t>(u)];
          pred[static_cast<std::size_t>(w)].push_back(u);
        }
      }
    }

    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const int w = *it;
      for (const int v : pred[static_cast<std::size_t>(w)]) {
        delta[static_cast<std::size_t>(v)] += sigma[static_cast<std::size_t>(v)] /
                                              sigma[static_cast<std::size_t>(w)] *
                                              (1.0 + delta[static_cast<std::size_t>(w)]);
      }
      if (w != s) score[static_cast<std::size_t>(w)] += delta[static_cast<std::size_t>(w)];
    }
  }

  const double norm = static_cast<double>(n - 1) * static_cast<double>(n - 2);
  for (auto& v : score) v /= norm;
  return score;
}

std::vector<NodeId> select_sensors(const SocialGraph& g, int k, const std::vector<double>& scores) {
  const int n = g.node_count();
  if (k < 2) throw ArgumentError("select_sensors: k must be at least 2");
  if (k > n) throw ArgumentError("select_sensors: k exceeds node count");
  if (static_cast<int>(scores.size()) != n) {
    throw ArgumentError("select_sensors: scores length must equal node count");
  }
  std::vector<int> idx(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    const double sa = scores[static_cast<std::size_t>(a)];
    const double sb = scores[static_cast<std::size_t>(b)];
    if (sa != sb) return sa > sb;
    return g.node_at(a) < g.node_at(b);
  });
  std::vector<NodeId> out;
  out.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) out.push_back(g.node_at(idx[static_cast<std::size_t>(i)]));
  return out;
}

double modularity_of(const SocialGraph& g, const std::vector<ClusterId>& by_index) {
  if (static_cast<int>(by_index.size()) != g.node_count()) {
    throw ArgumentError("modularity_of: assignment length must equal node count");
  }
  const double m = static_cast<double>(g.edge_count());
  if (m == 0.0) return 0.0;

  ClusterId max_cluster = 0;
  for (const auto c : by_index) max_cluster = std::max(max_cluster, c);
  std::vector<double> internal(static_cast<std::size_t>(max_cluster) + 1, 0.0);
  std::vector<double> degree(static_cast<std::size_t>(max_cluster) + 1, 0.0);

  for (const auto& e : g.edges()) {
    const int ui = g.index_of(e.u);
    const int vi = g.index_of(e.v);
    const ClusterId cu = by_index[static_cast<std::size_t>(ui)];
    const ClusterId cv = by_index[static_cast<std::size_t>(vi)];
    if (cu == cv) internal[static_cast<std::size_t>(cu)] += 1.0;
    degree[static_cast<std::size_t>(cu)] += 1.0;
    degree[static_cast<std::size_t>(cv)] += 1.0;
  }

  double q = 0.0;
  for (std::size_t c = 0; c < internal.size(); ++c) {
    const double frac = degree[c] / (2.0 * m);
    q += internal[c] / m - frac * frac;
  }
  return q;
}

Partition partition_from_assignment(const SocialGraph& g, const std::vector<ClusterId>& by_index) {
  if (static_cast<int>(by_index.size()) != g.node_count()) {
    throw ArgumentError("partition_from_assignment: assignment length must equal node count");
  }
  // Renumber clusters by first appearance in node-index order.
  std::unordered_map<ClusterId, ClusterId> renumber;
  std::vector<ClusterId> dense(by_index.size());
  for (std::size_t i = 0; i < by_index.size(); ++i) {
    const auto [it, inserted] =
        renumber.try_emplace(by_index[i], static_cast<ClusterId>(renumber.size()));
    dense[i] = it->second;
    (void)inserted;
  }
  Partition p;
  p.cluster_by_index = dense;
  p.members.assign(renumber.size(), {});
  for (std::size_t i = 0; i < dense.size(); ++i) {
    p.members[static_cast<std::size_t>(dense[i])].push_back(static_cast<int>(i));
  }
  p.modularity = modularity_of(g, dense);
  return p;
}

namespace {

// One Louvain level on a weighted multigraph (self-loop weight counted once
// in loop_weight, twice in degree). Returns the community assignment and
// whether any node moved.
struct LevelGraph {
  std::vector<std::vector<std::pair<int, double>>> adj;  // no self entries
  std::vector<double> loop_weight;
  std::vector<double> degree;  // 2*loop + sum of incident weights
  double total_weight = 0.0;   // m: sum of edge weights incl. loops
};

bool louvain_level(const LevelGraph& lg, Rng& rng, std::vector<int>& community) {
  const int n = static_cast<int>(lg.adj.size());
  community.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) community[static_cast<std::size_t>(i)] = i;

  std::vector<double> community_degree(lg.degree);
  const double m = lg.total_weight;

  std::vector<int> visit(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) visit[static_cast<std::size_t>(i)] = i;

  bool any_move = false;
  bool moved = true;
  while (moved) {
    moved = false;
    rng.shuffle(visit);
    for (const int node : visit) {
      const int old_comm = community[static_cast<std::size_t>(node)];
      const double k_node = lg.degree[static_cast<std::size_t>(node)];

      // Weight from node to each neighboring community.
      std::map<int, double> links;
      links[old_comm] += 0.0;
      for (const auto& [nbr, w] : lg.adj[static_cast<std::size_t>(node)]) {
        links[community[static_cast<std::size_t>(nbr)]] += w;
      }

      community_degree[static_cast<std::size_t>(old_comm)] -= k_node;
      const double base_gain = links[old_comm] - community_degree[static_cast<std::size_t>(old_comm)] * k_node / (2.0 * m);

      int best_comm = old_comm;
      double best_gain = base_gain;
      for (const auto& [comm, w] : links) {
        if (comm == old_comm) continue;
        const double gain = w - community_degree[static_cast<std::size_t>(comm)] * k_node / (2.0 * m);
        if (gain > best_gain + 1e-12 || (std::abs(gain - best_gain) <= 1e-12 && comm < best_comm)) {
          best_gain = gain;
          best_comm = comm;
        }
      }

      community_degree[static_cast<std::size_t>(best_comm)] += k_node;
      if (best_comm != old_comm) {
        community[static_cast<std::size_t>(node)] = best_comm;
        moved = true;
        any_move = true;
      }
    }
  }
  return any_move;
}

LevelGraph aggregate(const LevelGraph& lg, const std::vector<int>& community, int n_comms) {
  LevelGraph out;
  out.adj.assign(static_cast<std::size_t>(n_comms), {});
  out.loop_weight.assign(static_cast<std::size_t>(n_comms), 0.0);
  out.degree.assign(static_cast<std::size_t>(n_comms), 0.0);
  out.total_weight = lg.total_weight;

  std::vector<std::map<int, double>> acc(static_cast<std::size_t>(n_comms));
  for (int u = 0; u < static_cast<int>(lg.adj.size()); ++u) {
    const int cu = community[static_cast<std::size_t>(u)];
    out.loop_weight[static_cast<std::size_t>(cu)] += lg.loop_weight[static_cast<std::size_t>(u)];
    for (const auto& [v, w] : lg.adj[static_cast<std::size_t>(u)]) {
      const int cv = community[static_cast<std::size_t>(v)];
      if (cu == cv) {
        if (u < v) out.loop_weight[static_cast<std::size_t>(cu)] += w;
      } else {
        acc[static_cast<std::size_t>(cu)][cv] += w;
      }
    }
  }
  for (int c = 0; c < n_comms; ++c) {
    for (const auto& [d, w] : acc[static_cast<std::size_t>(c)]) {
      out.adj[static_cast<std::size_t>(c)].emplace_back(d, w);
    }
    double deg = 2.0 * out.loop_weight[static_cast<std::size_t>(c)];
    for (const auto& [d, w] : out.adj[static_cast<std::size_t>(c)]) deg += w;
    out.degree[static_cast<std::size_t>(c)] = deg;
  }
  return out;
}

}  // namespace

Partition louvain_partition(const SocialGraph& g, std::uint64_t seed) {
  const int n = g.node_count();
  if (n == 0) throw ArgumentError("louvain_partition: empty graph");

  // Full-graph assignment tracked across levels.
  std::vector<ClusterId> assignment(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) assignment[static_cast<std::size_t>(i)] = i;

  if (g.edge_count() == 0) return partition_from_assignment(g, assignment);

  LevelGraph lg;
  lg.adj.assign(static_cast<std::size_t>(n), {});
  lg.loop_weight.assign(static_cast<std::size_t>(n), 0.0);
  lg.degree.assign(static_cast<std::size_t>(n), 0.0);
  lg.total_weight = static_cast<double>(g.edge_count());
  for (const auto& e : g.edges()) {
    const int ui = g.index_of(e.u);
    const int vi = g.index_of(e.v);
    lg.adj[static_cast<std::size_t>(ui)].emplace_back(vi, 1.0);
    lg.adj[static_cast<std::size_t>(vi)].emplace_back(ui, 1.0);
  }
  for (int i = 0; i < n; ++i) {
    lg.degree[static_cast<std::size_t>(i)] = static_cast<double>(lg.adj[static_cast<std::size_t>(i)].size());
  }

  Rng rng(derive_seed(seed, 0x1001));

  while (true) {
    std::vector<int> community;
    const bool improved = louvain_level(lg, rng, community);

    // Compact community ids for this level.
    std::unordered_map<int, int> compact;
    for (const int c : community) compact.try_emplace(c, static_cast<int>(compact.size()));
    std::vector<int> dense(community.size());
    for (std::size_t i = 0; i < community.size(); ++i) {
      dense[i] = compact.at(community[i]);
    }
    const int n_comms = static_cast<int>(compact.size());

    for (auto& a : assignment) {
      a = dense[static_cast<std::size_t>(a)];
    }

    if (!improved || n_comms == static_cast<int>(lg.adj.size())) break;
    lg = aggregate(lg, dense, n_comms);
  }

  return partition_from_assignment(g, assignment);
}

GatewayGraph build_gateway_graph(const SocialGraph& g, const Partition& p) {
  if (static_cast<int>(p.cluster_by_index.size()) != g.node_count()) {
    throw ArgumentError("build_gateway_graph: partition does not cover graph");
  }
  std::set<NodeId> gateway;
  for (const auto& e : g.edges()) {
    const ClusterId cu = p.cluster_by_index[static_cast<std::size_t>(g.index_of(e.u))];
    const ClusterId cv = p.cluster_by_index[static_cast<std::size_t>(g.index_of(e.v))];
    if (cu != cv) {
      gateway.insert(e.u);
      gateway.insert(e.v);
    }
  }
  if (gateway.empty()) {
    throw EmptyGatewayError("partition has no inter-cluster edge");
  }
  std::vector<EdgeRecord> kept;
  for (const auto& e : g.edges()) {
    if (gateway.count(e.u) && gateway.count(e.v)) kept.push_back(e);
  }
  GatewayGraph gw;
  gw.gateway_nodes.assign(gateway.begin(), gateway.end());
  gw.graph = SocialGraph(kept, gw.gateway_nodes);
  for (const NodeId id : gw.gateway_nodes) {
    gw.home_cluster[id] = p.cluster_by_index[static_cast<std::size_t>(g.index_of(id))];
  }
  return gw;
}

SocialGraph extract_subgraph(const SocialGraph& g, const std::vector<NodeId>& keep) {
  std::set<NodeId> kept(keep.begin(), keep.end());
  for (const NodeId id : keep) {
    if (!g.has_node(id)) throw NotFoundError("node " + std::to_string(id) + " not in graph");
  }
  std::vector<EdgeRecord> records;
  for (const auto& e : g.edges()) {
    if (kept.count(e.u) && kept.count(e.v)) records.push_back(e);
  }
  return SocialGraph(records, keep);
}

int bfs_hops(const SocialGraph& g, NodeId a, NodeId b) {
  const int ai = g.index_of(a);
  const int bi = g.index_of(b);
  if (ai == bi) return 0;
  std::vector<int> dist(static_cast<std::size_t>(g.node_count()), -1);
  std::deque<int> frontier{ai};
  dist[static_cast<std::size_t>(ai)] = 0;
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop_front();
    for (const auto& nb : g.neighbors_at(u)) {
      if (dist[static_cast<std::size_t>(nb.target)] != -1) continue;
      dist[static_cast<std::size_t>(nb.target)] = dist[static_cast<std::size_t>(u)] + 1;
      if (nb.target == bi) return dist[static_cast<std::size_t>(nb.target)];
      frontier.push_back(nb.target);
    }
  }
  return -1;
}

}  // namespace rumorloc
