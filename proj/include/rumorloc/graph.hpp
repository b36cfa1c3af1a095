#pragma once

#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rumorloc/errors.hpp"

namespace rumorloc {

using NodeId = std::int64_t;
using ClusterId = int;

struct EdgeDelay {
  double mean = 1.0;
  double variance = 0.0;
};

struct EdgeRecord {
  NodeId u = 0;
  NodeId v = 0;
  EdgeDelay delay;
};

// Undirected graph with per-edge Gaussian delay parameters. Nodes are
// arbitrary 64-bit ids mapped to dense indices [0, n); the structure is
// immutable after construction and safe to share across threads.
class SocialGraph {
public:
  struct Neighbor {
    int target = -1;   // dense index of the other endpoint
    double mean = 0.0;
    double variance = 0.0;
    int edge = -1;     // index into edges()
  };

  SocialGraph() = default;

  // Self-loops and nonpositive means are rejected; duplicate edges are
  // collapsed keeping the first occurrence. extra_nodes admits nodes with
  // no incident edge (induced subgraphs can isolate nodes).
  explicit SocialGraph(const std::vector<EdgeRecord>& records,
                       const std::vector<NodeId>& extra_nodes = {});

  int node_count() const { return static_cast<int>(nodes_.size()); }
  int edge_count() const { return static_cast<int>(edges_.size()); }

  const std::vector<NodeId>& nodes() const { return nodes_; }

  // Canonical edge list: u < v within each record, sorted by (u, v).
  const std::vector<EdgeRecord>& edges() const { return edges_; }

  bool has_node(NodeId id) const;
  int index_of(NodeId id) const;  // NotFoundError if absent
  NodeId node_at(int index) const { return nodes_.at(static_cast<std::size_t>(index)); }

  const std::vector<Neighbor>& neighbors_at(int index) const {
    return adjacency_.at(static_cast<std::size_t>(index));
  }
  const std::vector<Neighbor>& neighbors(NodeId id) const { return adjacency_[index_of(id)]; }

  int degree_at(int index) const { return static_cast<int>(neighbors_at(index).size()); }

private:
  std::vector<NodeId> nodes_;                         // ascending
  std::vector<EdgeRecord> edges_;                     // canonical order
  std::vector<std::vector<Neighbor>> adjacency_;      // sorted by target index
};

// Shortest-path tree under cumulative mean delay, with the variance of the
// chosen path carried along. Indices refer to the graph the tree was built
// from; unreachable nodes keep dist_mean == infinity and parent == -1.
struct ShortestPathTree {
  NodeId root = 0;
  int root_index = -1;
  std::vector<double> dist_mean;
  std::vector<double> dist_var;
  std::vector<int> parent;       // dense index, -1 for root/unreachable
  std::vector<int> parent_edge;  // edge index into graph.edges(), -1 likewise

  bool reachable(int index) const {
    return dist_mean.at(static_cast<std::size_t>(index)) != std::numeric_limits<double>::infinity();
  }

  // Edge indices along the root -> node path, in root-first order.
  std::vector<int> path_edges(int index) const;
};

// Community partition. Cluster ids are dense [0, cluster_count) and
// renumbered so that cluster 0 holds the smallest node index.
struct Partition {
  std::vector<ClusterId> cluster_by_index;       // size = node_count
  std::vector<std::vector<int>> members;         // cluster -> ascending node indices
  double modularity = 0.0;

  int cluster_count() const { return static_cast<int>(members.size()); }
};

// Gateway structure: the subgraph induced by endpoints of inter-cluster
// edges, plus the home cluster of each gateway node.
struct GatewayGraph {
  SocialGraph graph;
  std::vector<NodeId> gateway_nodes;             // ascending
  std::map<NodeId, ClusterId> home_cluster;
};

// --- construction and IO ---------------------------------------------------

// Parses lines of "u v [mean] [variance]"; '#' starts a comment, blank lines
// are skipped. Missing delay fields are filled from default_delay.
std::vector<EdgeRecord> load_edge_list(std::istream& in, EdgeDelay default_delay);
SocialGraph load_graph(std::istream& in, EdgeDelay default_delay = EdgeDelay{1.0, 0.0});

// --- shortest paths ----------------------------------------------------------

// Dijkstra under edge means; dist ties resolve to the smaller parent NodeId.
ShortestPathTree shortest_path_tree(const SocialGraph& g, NodeId root);

// --- centrality and sensors -------------------------------------------------

// Exact Brandes betweenness under mean-delay weights, indexed like nodes().
// Scores are over ordered pairs and normalized by (n-1)(n-2) for n >= 3.
std::vector<double> betweenness_centrality(const SocialGraph& g);

// Top-k nodes by score, ties to the smaller NodeId. First entry is the
// reference sensor. Requires 2 <= k <= node_count.
std::vector<NodeId> select_sensors(const SocialGraph& g, int k, const std::vector<double>& scores);

// --- clustering ---------------------------------------------------------------

// Unweighted modularity of an assignment (cluster id per dense index).
double modularity_of(const SocialGraph& g, const std::vector<ClusterId>& by_index);

Partition partition_from_assignment(const SocialGraph& g, const std::vector<ClusterId>& by_index);

// Louvain local-move + aggregation loop, deterministic given seed.
Partition louvain_partition(const SocialGraph& g, std::uint64_t seed);

GatewayGraph build_gateway_graph(const SocialGraph& g, const Partition& p);

// --- misc -------------------------------------------------------------------

// Subgraph induced by `keep` (every kept node must exist; isolated kept
// nodes survive with no edges).
SocialGraph extract_subgraph(const SocialGraph& g, const std::vector<NodeId>& keep);

// Unweighted hop distance, -1 if unreachable.
int bfs_hops(const SocialGraph& g, NodeId a, NodeId b);

}  // namespace rumorloc
