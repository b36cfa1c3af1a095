#include "rumorloc/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rumorloc/errors.hpp"

namespace rumorloc {

CandidateStats candidate_stats(const SocialGraph& g, NodeId v, const std::vector<NodeId>& sensors) {
  if (sensors.size() < 2) {
    throw ArgumentError("candidate_stats: need a reference sensor plus at least one other");
  }
  const ShortestPathTree tree = shortest_path_tree(g, v);

  std::vector<int> sensor_idx;
  sensor_idx.reserve(sensors.size());
  for (const NodeId s : sensors) {
    const int idx = g.index_of(s);
    if (!tree.reachable(idx)) {
      throw CoverageError("sensor " + std::to_string(s) + " unreachable from candidate " +
                          std::to_string(v));
    }
    sensor_idx.push_back(idx);
  }

  const int k = static_cast<int>(sensors.size()) - 1;
  const auto& edges = g.edges();

  // Reference-path edge variances, stamped by edge index.
  std::vector<double> ref_stamp(static_cast<std::size_t>(g.edge_count()), 0.0);
  double ref_var_total = 0.0;
  for (const int e : tree.path_edges(sensor_idx[0])) {
    const double var = edges[static_cast<std::size_t>(e)].delay.variance;
    ref_stamp[static_cast<std::size_t>(e)] = var;
    ref_var_total += var;
  }

  std::vector<std::vector<int>> paths(static_cast<std::size_t>(k));
  CandidateStats stats;
  stats.candidate = v;
  stats.mu.resize(k);
  stats.lambda.resize(k, k);

  const double ref_mean = tree.dist_mean[static_cast<std::size_t>(sensor_idx[0])];
  std::vector<double> ref_overlap(static_cast<std::size_t>(k), 0.0);  // sum var over P_r ∩ P_ref
  for (int r = 0; r < k; ++r) {
    const int idx = sensor_idx[static_cast<std::size_t>(r + 1)];
    paths[static_cast<std::size_t>(r)] = tree.path_edges(idx);
    stats.mu(r) = tree.dist_mean[static_cast<std::size_t>(idx)] - ref_mean;
    double w = 0.0;
    for (const int e : paths[static_cast<std::size_t>(r)]) {
      w += ref_stamp[static_cast<std::size_t>(e)];
    }
    ref_overlap[static_cast<std::size_t>(r)] = w;
  }

  // Cov(T_a - T_ref, T_b - T_ref) decomposes into shared-edge variance sums.
  std::vector<double> stamp(static_cast<std::size_t>(g.edge_count()), 0.0);
  for (int a = 0; a < k; ++a) {
    for (const int e : paths[static_cast<std::size_t>(a)]) {
      stamp[static_cast<std::size_t>(e)] = edges[static_cast<std::size_t>(e)].delay.variance;
    }
    for (int b = a; b < k; ++b) {
      double shared = 0.0;
      for (const int e : paths[static_cast<std::size_t>(b)]) {
        shared += stamp[static_cast<std::size_t>(e)];
      }
      const double cov = shared - ref_overlap[static_cast<std::size_t>(a)] -
                         ref_overlap[static_cast<std::size_t>(b)] + ref_var_total;
      stats.lambda(a, b) = cov;
      stats.lambda(b, a) = cov;
    }
    for (const int e : paths[static_cast<std::size_t>(a)]) {
      stamp[static_cast<std::size_t>(e)] = 0.0;
    }
  }
  return stats;
}

double log_likelihood(const CandidateStats& stats, const ObservationVector& obs) {
  const Eigen::Index k = stats.mu.size();
  if (static_cast<Eigen::Index>(obs.values.size()) != k) {
    throw ArgumentError("log_likelihood: observation length does not match candidate stats");
  }
  if (!obs.fully_present()) {
    throw ArgumentError("log_likelihood: observation must be fully present (recover first)");
  }

  // Ridge keeps overlapping-path covariances factorizable; the all-zero
  // variance limit gets an absolute floor instead (trace is 0 there).
  double ridge = 1e-9 * stats.lambda.trace() / static_cast<double>(k);
  if (!(ridge > 0.0)) ridge = 1e-12;
  Eigen::MatrixXd reg = stats.lambda;
  reg.diagonal().array() += ridge;

  const Eigen::LLT<Eigen::MatrixXd> llt(reg);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("log_likelihood: covariance for candidate " +
                         std::to_string(stats.candidate) + " is not positive definite");
  }
  double logdet = 0.0;
  const auto& l = llt.matrixL();
  for (Eigen::Index i = 0; i < k; ++i) logdet += 2.0 * std::log(l(i, i));

  Eigen::VectorXd r(k);
  for (Eigen::Index i = 0; i < k; ++i) r(i) = obs.values[static_cast<std::size_t>(i)] - stats.mu(i);
  const double quad = r.dot(llt.solve(r));
  return -0.5 * (logdet + quad);
}

namespace {

// Shared argmax loop: evaluates candidates in ascending NodeId order so a
// strict comparison realizes the smaller-id tie-break.
NodeId argmax_candidates(const SocialGraph& path_graph, const std::vector<NodeId>& candidates,
                         const ObservationVector& obs, const std::vector<NodeId>& sensors,
                         std::vector<LikelihoodEntry>* table) {
  std::vector<NodeId> ordered = candidates;
  std::sort(ordered.begin(), ordered.end());
  ordered.erase(std::unique(ordered.begin(), ordered.end()), ordered.end());

  std::vector<LikelihoodEntry> entries;
  bool have_best = false;
  NodeId best = 0;
  double best_ll = 0.0;
  for (const NodeId v : ordered) {
    double ll;
    try {
      ll = log_likelihood(candidate_stats(path_graph, v, sensors), obs);
    } catch (const CoverageError&) {
      continue;  // candidate cannot explain every sensor, drop it
    }
    if (!std::isfinite(ll)) continue;
    entries.push_back(LikelihoodEntry{v, ll});
    if (!have_best || ll > best_ll) {
      have_best = true;
      best = v;
      best_ll = ll;
    }
  }
  if (!have_best) {
    throw CoverageError("no candidate can reach every sensor");
  }
  if (table) *table = std::move(entries);
  return best;
}

}  // namespace

NodeId stage1_estimate(const GatewayGraph& gw, const ObservationVector& obs,
                       const std::vector<NodeId>& sensors, std::vector<LikelihoodEntry>* table) {
  if (sensors.size() < 2) throw ArgumentError("stage1_estimate: need at least 2 sensors");
  for (const NodeId s : sensors) {
    if (!gw.graph.has_node(s)) {
      throw ArgumentError("stage1_estimate: sensor " + std::to_string(s) +
                          " is not a gateway node");
    }
  }
  return argmax_candidates(gw.graph, gw.gateway_nodes, obs, sensors, table);
}

NodeId stage2_estimate(const SocialGraph& g, const std::vector<NodeId>& candidates,
                       const ObservationVector& obs, const std::vector<NodeId>& sensors,
                       std::vector<LikelihoodEntry>* table) {
  if (candidates.empty()) throw ArgumentError("stage2_estimate: empty candidate set");
  if (candidates.size() == 1) {
    if (table) table->clear();
    return candidates.front();  // forced choice, no likelihood needed
  }
  if (sensors.size() < 2) throw ArgumentError("stage2_estimate: need at least 2 sensors");
  return argmax_candidates(g, candidates, obs, sensors, table);
}

SourceEstimate two_stage_localize(const SocialGraph& g, const Partition& partition,
                                  const ObservationProvider& observe_at,
                                  const TwoStageOptions& options) {
  if (g.node_count() == 0) throw ArgumentError("two_stage_localize: empty graph");
  SourceEstimate est;

  bool fallback = false;
  std::optional<GatewayGraph> gw;
  try {
    gw = build_gateway_graph(g, partition);
  } catch (const EmptyGatewayError&) {
    fallback = true;
  }

  if (!fallback) {
    std::vector<NodeId> s1;
    if (options.stage1_sensors) {
      s1 = *options.stage1_sensors;
      if (s1.size() < 2) throw ArgumentError("two_stage_localize: need at least 2 stage-1 sensors");
    } else {
      const int k1 = std::clamp(options.stage1_sensor_count, 2, gw->graph.node_count());
      s1 = select_sensors(gw->graph, k1, betweenness_centrality(gw->graph));
    }
    try {
      const ObservationVector obs1 = observe_at(s1);
      est.stage1_pick = stage1_estimate(*gw, obs1, s1, &est.stage1_table);
    } catch (const CoverageError&) {
      fallback = true;  // gateway graph too fragmented for these sensors
    }
  }

  if (!fallback) {
    const ClusterId cid = gw->home_cluster.at(*est.stage1_pick);
    est.cluster = cid;
    std::vector<NodeId> cluster_nodes;
    for (const int idx : partition.members[static_cast<std::size_t>(cid)]) {
      cluster_nodes.push_back(g.node_at(idx));
    }
    if (cluster_nodes.size() == 1) {
      est.stage2_pick = cluster_nodes.front();
    } else {
      const SocialGraph sub = extract_subgraph(g, cluster_nodes);
      const int k2 = std::clamp(options.stage2_sensor_count, 2, sub.node_count());
      const std::vector<NodeId> s2 = select_sensors(sub, k2, betweenness_centrality(sub));
      const ObservationVector obs2 = observe_at(s2);
      est.stage2_pick = stage2_estimate(g, cluster_nodes, obs2, s2, &est.stage2_table);
    }
  } else {
    est.used_fallback = true;
    est.stage1_pick.reset();
    est.cluster.reset();
    est.stage1_table.clear();
    const int k = std::clamp(options.stage2_sensor_count, 2, g.node_count());
    const std::vector<NodeId> sensors = select_sensors(g, k, betweenness_centrality(g));
    const ObservationVector obs = observe_at(sensors);
    est.stage2_pick = stage2_estimate(g, g.nodes(), obs, sensors, &est.stage2_table);
  }

  if (options.true_source) {
    est.hop_error = bfs_hops(g, est.stage2_pick, *options.true_source);
  }
  return est;
}

}  // namespace rumorloc
