#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "rumorloc/graph.hpp"

namespace rumorloc {

// One realized diffusion: the rumor starts at `source` at absolute time
// `start_epoch` and reaches each node along the fastest route under the
// sampled per-edge delays. Unreached nodes are absent from `arrival`.
struct Cascade {
  NodeId source = 0;
  double start_epoch = 0.0;
  std::map<NodeId, double> arrival;
  std::uint64_t seed = 0;
};

// Relative arrival times at sensors: values[i] = t(sensors[i]) - t(reference).
// The unknown start epoch cancels in the subtraction. mask[i] marks whether
// values[i] survived (true = present).
struct ObservationVector {
  NodeId reference = 0;
  std::vector<NodeId> sensors;  // l2..lk, excludes the reference
  std::vector<double> values;
  std::vector<char> mask;

  std::size_t size() const { return values.size(); }
  bool fully_present() const;
  std::size_t missing_count() const;
};

enum class MissingMode { sporadic, burst };

struct MissingnessSpec {
  MissingMode mode = MissingMode::sporadic;
  double rate = 0.0;  // fraction of entries removed, in [0, 1]
  std::uint64_t seed = 0;
};

struct LoadedCascade {
  Cascade cascade;
  std::vector<std::string> warnings;  // arrivals before start etc., not fatal
};

// One positive delay per canonical edge (Gaussian, resampled until positive,
// capped at 64 attempts then mean/1000), indexed like g.edges(). This is the
// exact realization simulate_cascade(g, ., ., seed) propagates over.
std::vector<double> sample_edge_delays(const SocialGraph& g, std::uint64_t seed);

// Propagates by shortest path on the sampled realization.
Cascade simulate_cascade(const SocialGraph& g, NodeId source, double start_epoch,
                         std::uint64_t seed);

// sensors is the full ordered list, reference first; |sensors| >= 2.
ObservationVector observe(const Cascade& c, const std::vector<NodeId>& sensors);

// Masks ceil(rate * length) entries: uniformly chosen for sporadic, one
// contiguous run with uniform start for burst. Masked values are zeroed.
ObservationVector apply_missingness(const ObservationVector& o, const MissingnessSpec& spec);

// Text format: "source <id> <time>" first, then one "<id> <time>" per node.
LoadedCascade load_cascade(std::istream& in);
void save_cascade(const Cascade& c, std::ostream& out);

}  // namespace rumorloc
