#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <vector>

#include "rumorloc/diffusion.hpp"
#include "rumorloc/graph.hpp"

namespace rumorloc {

// Per-candidate Gaussian model of the observation vector: mu is the expected
// Delta-t and lambda its covariance, both induced by independent edge delays
// summed along the candidate's shortest paths to each sensor. lambda is
// symmetric PSD by construction; a ridge is added at factorization time.
struct CandidateStats {
  NodeId candidate = 0;
  Eigen::VectorXd mu;       // length k-1
  Eigen::MatrixXd lambda;   // (k-1) x (k-1)
};

struct LikelihoodEntry {
  NodeId candidate = 0;
  double log_likelihood = 0.0;
};

struct SourceEstimate {
  std::optional<NodeId> stage1_pick;   // unset when the fallback ran
  NodeId stage2_pick = 0;
  std::optional<ClusterId> cluster;    // cluster searched in stage 2
  bool used_fallback = false;
  std::vector<LikelihoodEntry> stage1_table;
  std::vector<LikelihoodEntry> stage2_table;
  std::optional<int> hop_error;        // set when the true source is supplied
};

struct TwoStageOptions {
  int stage1_sensor_count = 8;   // clamped to [2, gateway size]
  int stage2_sensor_count = 8;   // clamped to [2, cluster size]
  // Explicit stage-1 sensor list (must lie in the gateway graph). When unset,
  // sensors are picked by betweenness within the gateway graph.
  std::optional<std::vector<NodeId>> stage1_sensors;
  std::optional<NodeId> true_source;   // enables hop_error
};

// Answers "what would these sensors have observed"; called once per stage.
// The returned vector must be fully present (recovery happens in the
// provider when observations are lossy).
using ObservationProvider = std::function<ObservationVector(const std::vector<NodeId>&)>;

// sensors is the full ordered list, reference first. Every sensor must be
// reachable from v in g.
CandidateStats candidate_stats(const SocialGraph& g, NodeId v, const std::vector<NodeId>& sensors);

// -1/2 log det(Lambda) - 1/2 (dt-mu)^T Lambda^{-1} (dt-mu), via Cholesky on
// the ridge-regularized covariance. The 2*pi constant is omitted: it is the
// same for every candidate and cancels in the argmax.
double log_likelihood(const CandidateStats& stats, const ObservationVector& obs);

// Argmax of log_likelihood over all gateway nodes; candidates that cannot
// reach every sensor inside the gateway graph are skipped. Ties resolve to
// the smaller NodeId. `table` (optional) receives all evaluated candidates.
NodeId stage1_estimate(const GatewayGraph& gw, const ObservationVector& obs,
                       const std::vector<NodeId>& sensors,
                       std::vector<LikelihoodEntry>* table = nullptr);

// Same argmax over an explicit candidate set, with paths taken in g.
// A singleton candidate set short-circuits without touching obs.
NodeId stage2_estimate(const SocialGraph& g, const std::vector<NodeId>& candidates,
                       const ObservationVector& obs, const std::vector<NodeId>& sensors,
                       std::vector<LikelihoodEntry>* table = nullptr);

// Stage 1 over the gateway graph picks a cluster, stage 2 searches inside
// it. When the partition has no inter-cluster edge (or no stage-1 candidate
// can be evaluated), falls back to a single stage over all of V using
// stage2_sensor_count sensors selected by global betweenness.
SourceEstimate two_stage_localize(const SocialGraph& g, const Partition& partition,
                                  const ObservationProvider& observe_at,
                                  const TwoStageOptions& options);

}  // namespace rumorloc
