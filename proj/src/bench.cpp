#include "rumorloc/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <deque>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "rumorloc/estimator.hpp"
#include "rumorloc/format.hpp"
#include "rumorloc/recovery.hpp"
#include "rumorloc/rng.hpp"

namespace rumorloc {

std::string to_string(NetworkFamily f) {
  switch (f) {
    case NetworkFamily::barabasi_albert: return "barabasi_albert";
    case NetworkFamily::watts_strogatz: return "watts_strogatz";
    case NetworkFamily::tree: return "tree";
    case NetworkFamily::two_clique: return "two_clique";
  }
  return "unknown";
}

std::string to_string(RecoveryMethod m) {
  switch (m) {
    case RecoveryMethod::cs: return "cs";
    case RecoveryMethod::dn: return "dn";
    case RecoveryMethod::dn_renewal: return "dn-renewal";
    case RecoveryMethod::none: return "none";
  }
  return "unknown";
}

std::string to_string(MissingMode m) {
  return m == MissingMode::sporadic ? "sporadic" : "burst";
}

NetworkFamily parse_family(const std::string& s) {
  if (s == "barabasi_albert" || s == "ba") return NetworkFamily::barabasi_albert;
  if (s == "watts_strogatz" || s == "ws") return NetworkFamily::watts_strogatz;
  if (s == "tree") return NetworkFamily::tree;
  if (s == "two_clique") return NetworkFamily::two_clique;
  throw ArgumentError("unknown network family '" + s + "'");
}

RecoveryMethod parse_method(const std::string& s) {
  if (s == "cs") return RecoveryMethod::cs;
  if (s == "dn") return RecoveryMethod::dn;
  if (s == "dn-renewal" || s == "dn_renewal") return RecoveryMethod::dn_renewal;
  if (s == "none") return RecoveryMethod::none;
  throw ArgumentError("unknown recovery method '" + s + "'");
}

MissingMode parse_mode(const std::string& s) {
  if (s == "sporadic") return MissingMode::sporadic;
  if (s == "burst") return MissingMode::burst;
  throw ArgumentError("unknown missingness mode '" + s + "'");
}

void ExperimentConfig::validate() const {
  if (trials < 1) throw ArgumentError("config: trials must be at least 1");
  if (threads < 1) throw ArgumentError("config: threads must be at least 1");
  if (k2 < 2) throw ArgumentError("config: k2 must be at least 2");
  if (idle_mean < 0.0) throw ArgumentError("config: idle mean must be nonnegative");
  if (sensor_pcts.empty()) throw ArgumentError("config: need at least one sensor percentage");
  if (missing_rates.empty()) throw ArgumentError("config: need at least one missing rate");
  for (const double r : missing_rates) {
    if (r < 0.0 || r > 1.0) throw ArgumentError("config: missing rates must lie in [0, 1]");
  }
  const int min_sensors = (method == RecoveryMethod::dn || method == RecoveryMethod::dn_renewal) ? 3 : 2;
  for (const double p : sensor_pcts) {
    if (p <= 0.0 || p > 1.0) throw ArgumentError("config: sensor percentages must lie in (0, 1]");
    const int k = static_cast<int>(std::ceil(p * network.nodes));
    if (k < min_sensors) {
      throw ArgumentError("config: sensor percentage " + format_double(p) + " yields fewer than " +
                          std::to_string(min_sensors) + " sensors");
    }
  }
}

namespace {

bool connected(const std::set<std::pair<NodeId, NodeId>>& edges, int n) {
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  for (const auto& [u, v] : edges) {
    adj[static_cast<std::size_t>(u)].push_back(static_cast<int>(v));
    adj[static_cast<std::size_t>(v)].push_back(static_cast<int>(u));
  }
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::deque<int> frontier{0};
  seen[0] = 1;
  int count = 1;
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop_front();
    for (const int w : adj[static_cast<std::size_t>(u)]) {
      if (!seen[static_cast<std::size_t>(w)]) {
        seen[static_cast<std::size_t>(w)] = 1;
        ++count;
        frontier.push_back(w);
      }
    }
  }
  return count == n;
}

std::set<std::pair<NodeId, NodeId>> build_edges(const NetworkSpec& spec, std::uint64_t seed) {
  std::set<std::pair<NodeId, NodeId>> edges;
  const auto add = [&edges](NodeId a, NodeId b) {
    if (a == b) return false;
    return edges.insert(a < b ? std::pair{a, b} : std::pair{b, a}).second;
  };
  Rng rng(derive_seed(seed, 0x51));

  switch (spec.family) {
    case NetworkFamily::tree: {
      for (NodeId i = 1; i < spec.nodes; ++i) {
        add(static_cast<NodeId>(rng.uniform_below(static_cast<std::uint64_t>(i))), i);
      }
      break;
    }
    case NetworkFamily::barabasi_albert: {
      const int m = spec.attach;
      const NodeId core = std::min<NodeId>(m + 1, spec.nodes);
      for (NodeId a = 0; a < core; ++a) {
        for (NodeId b = a + 1; b < core; ++b) add(a, b);
      }
      // Endpoint pool realizes preferential attachment: nodes appear once
      // per incident edge.
      std::vector<NodeId> pool;
      for (const auto& [u, v] : edges) {
        pool.push_back(u);
        pool.push_back(v);
      }
      for (NodeId i = core; i < spec.nodes; ++i) {
        std::set<NodeId> targets;
        while (static_cast<int>(targets.size()) < m) {
          targets.insert(pool[static_cast<std::size_t>(rng.uniform_below(pool.size()))]);
        }
        for (const NodeId t : targets) {
          add(i, t);
          pool.push_back(t);
          pool.push_back(i);
        }
      }
      break;
    }
    case NetworkFamily::watts_strogatz: {
      const int n = spec.nodes;
      const int half = spec.ws_k / 2;
      std::vector<std::pair<NodeId, NodeId>> ring;
      for (NodeId i = 0; i < n; ++i) {
        for (int j = 1; j <= half; ++j) {
          const NodeId t = (i + j) % n;
          ring.emplace_back(i, t);
        }
      }
      for (const auto& [u, v] : ring) {
        NodeId target = v;
        const bool rewire = rng.uniform01() < spec.ws_p;
        // A kept slot can already be taken when an earlier rewire landed on
        // it; redraw then too so the edge count is preserved.
        const auto kept = u < v ? std::pair{u, v} : std::pair{v, u};
        if (rewire || edges.count(kept)) {
          for (int attempt = 0; attempt < 32; ++attempt) {
            const NodeId candidate = static_cast<NodeId>(rng.uniform_below(static_cast<std::uint64_t>(n)));
            if (candidate == u) continue;
            const auto key = u < candidate ? std::pair{u, candidate} : std::pair{candidate, u};
            if (edges.count(key)) continue;
            target = candidate;
            break;
          }
        }
        add(u, target);
      }
      break;
    }
    case NetworkFamily::two_clique: {
      const NodeId a = spec.clique_a;
      const NodeId b = spec.clique_b;
      for (NodeId i = 0; i < a; ++i) {
        for (NodeId j = i + 1; j < a; ++j) add(i, j);
      }
      for (NodeId i = a; i < a + b; ++i) {
        for (NodeId j = i + 1; j < a + b; ++j) add(i, j);
      }
      add(a - 1, a);  // bridge
      break;
    }
  }
  return edges;
}

std::string classify_error(const Error& e) {
  if (dynamic_cast<const ParseError*>(&e)) return "parse";
  if (dynamic_cast<const ValidationError*>(&e)) return "validation";
  if (dynamic_cast<const NotFoundError*>(&e)) return "not_found";
  if (dynamic_cast<const CoverageError*>(&e)) return "coverage";
  if (dynamic_cast<const NumericalError*>(&e)) return "numerical";
  if (dynamic_cast<const ConvergenceError*>(&e)) return "convergence";
  if (dynamic_cast<const InfeasibleError*>(&e)) return "infeasible";
  if (dynamic_cast<const DegenerateInputError*>(&e)) return "degenerate";
  if (dynamic_cast<const EmptyGatewayError*>(&e)) return "empty_gateway";
  if (dynamic_cast<const IoError*>(&e)) return "io";
  if (dynamic_cast<const ArgumentError*>(&e)) return "argument";
  return "error";
}

}  // namespace

SocialGraph generate_network(const NetworkSpec& spec, std::uint64_t seed) {
  if (spec.nodes < 2) throw ArgumentError("generate_network: need at least 2 nodes");
  if (!(spec.mean_lo > 0.0) || spec.mean_hi < spec.mean_lo) {
    throw ArgumentError("generate_network: delay mean range must be positive and ordered");
  }
  if (spec.var_lo < 0.0 || spec.var_hi < spec.var_lo) {
    throw ArgumentError("generate_network: delay variance range must be nonnegative and ordered");
  }
  switch (spec.family) {
    case NetworkFamily::barabasi_albert:
      if (spec.attach < 1 || spec.attach >= spec.nodes) {
        throw ArgumentError("generate_network: attachment count must satisfy 1 <= m < nodes");
      }
      break;
    case NetworkFamily::watts_strogatz:
      if (spec.ws_k < 2 || spec.ws_k % 2 != 0 || spec.ws_k >= spec.nodes) {
        throw ArgumentError("generate_network: ring degree must be even, >= 2 and < nodes");
      }
      if (spec.ws_p < 0.0 || spec.ws_p > 1.0) {
        throw ArgumentError("generate_network: rewire probability must lie in [0, 1]");
      }
      break;
    case NetworkFamily::two_clique:
      if (spec.clique_a < 1 || spec.clique_b < 1) {
        throw ArgumentError("generate_network: clique sizes must be at least 1");
      }
      if (spec.clique_a + spec.clique_b != spec.nodes) {
        throw ArgumentError("generate_network: two_clique sizes must sum to nodes");
      }
      break;
    case NetworkFamily::tree:
      break;
  }

  std::set<std::pair<NodeId, NodeId>> edges;
  const int max_attempts = spec.family == NetworkFamily::watts_strogatz ? 100 : 1;
  bool ok = false;
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    edges = build_edges(spec, derive_seed(seed, static_cast<std::uint64_t>(attempt)));
    if (connected(edges, spec.nodes)) {
      ok = true;
      break;
    }
  }
  if (!ok) {
    throw ArgumentError("generate_network: could not build a connected graph with these parameters");
  }

  // Delay sampling runs over the canonical (sorted) edge order so two graphs
  // with equal structure get equal delays.
  Rng delay_rng(derive_seed(seed, 0xde1a));
  std::vector<EdgeRecord> records;
  records.reserve(edges.size());
  for (const auto& [u, v] : edges) {
    EdgeRecord r;
    r.u = u;
    r.v = v;
    r.delay.mean = delay_rng.uniform(spec.mean_lo, spec.mean_hi);
    r.delay.variance = delay_rng.uniform(spec.var_lo, spec.var_hi);
    records.push_back(r);
  }
  return SocialGraph(records);
}

namespace {

// ---- shared recovery helpers -----------------------------------------------

ObservationVector zero_fill(const ObservationVector& masked) {
  ObservationVector out = masked;
  for (std::size_t i = 0; i < out.mask.size(); ++i) {
    if (!out.mask[i]) {
      out.values[i] = 0.0;
      out.mask[i] = 1;
    }
  }
  return out;
}

// A sensor that fails to report loses its timestamp but not its slot in the
// collection order, so the dropout is drawn over the arrival-rank arrangement
// of the observation. Rank-sorted arrival vectors are also the smooth ones —
// neighbouring ranks differ by single shortest-path steps — which is the
// arrangement the DCT recovery is built for. `masked` carries the same
// dropouts mapped back to the requested sensor order that the estimator and
// the matrix-completion path consume.
struct RankedMask {
  ObservationVector masked;         // requested sensor order, dropouts applied
  ObservationVector ranked_masked;  // ascending arrival order, same dropouts
  std::vector<std::size_t> rank_to_req;
};

RankedMask rank_and_mask(const ObservationVector& full, const MissingnessSpec& mspec) {
  const std::size_t n = full.values.size();
  RankedMask out;
  out.rank_to_req.resize(n);
  std::iota(out.rank_to_req.begin(), out.rank_to_req.end(), std::size_t{0});
  std::sort(out.rank_to_req.begin(), out.rank_to_req.end(),
            [&](std::size_t a, std::size_t b) {
              if (full.values[a] != full.values[b]) return full.values[a] < full.values[b];
              return full.sensors[a] < full.sensors[b];
            });
  ObservationVector ranked = full;
  for (std::size_t i = 0; i < n; ++i) {
    ranked.values[i] = full.values[out.rank_to_req[i]];
    ranked.sensors[i] = full.sensors[out.rank_to_req[i]];
  }
  out.ranked_masked = apply_missingness(ranked, mspec);
  out.masked = full;
  for (std::size_t i = 0; i < n; ++i) {
    if (!out.ranked_masked.mask[i]) {
      out.masked.values[out.rank_to_req[i]] = 0.0;
      out.masked.mask[out.rank_to_req[i]] = 0;
    }
  }
  return out;
}

// DCT interpolation happens on the rank arrangement; present entries pass
// through bit-exact, recovered ones land back in the requested order.
ObservationVector recover_ranked_cs(const RankedMask& rm) {
  const ObservationVector rec = cs_recover(rm.ranked_masked);
  ObservationVector out = rm.masked;
  for (std::size_t i = 0; i < rm.rank_to_req.size(); ++i) {
    if (!rm.ranked_masked.mask[i]) {
      out.values[rm.rank_to_req[i]] = rec.values[i];
      out.mask[rm.rank_to_req[i]] = 1;
    }
  }
  return out;
}

struct PairMoments {
  Eigen::MatrixXd mean;
  Eigen::MatrixXd var;
};

// Shortest-path delay moments from each of `from` to each of `to`.
PairMoments path_moments(const SocialGraph& g, const std::vector<NodeId>& from,
                         const std::vector<NodeId>& to) {
  PairMoments pm;
  pm.mean.resize(static_cast<Eigen::Index>(from.size()), static_cast<Eigen::Index>(to.size()));
  pm.var.resize(pm.mean.rows(), pm.mean.cols());
  for (std::size_t i = 0; i < from.size(); ++i) {
    const ShortestPathTree t = shortest_path_tree(g, from[i]);
    for (std::size_t j = 0; j < to.size(); ++j) {
      const int idx = g.index_of(to[j]);
      if (!t.reachable(idx)) {
        throw CoverageError("sensor " + std::to_string(to[j]) + " unreachable from sensor " +
                            std::to_string(from[i]));
      }
      pm.mean(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          t.dist_mean[static_cast<std::size_t>(idx)];
      pm.var(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          t.dist_var[static_cast<std::size_t>(idx)];
    }
  }
  return pm;
}

// Sample covariance treating each row of `rows` as one observation.
Eigen::MatrixXd row_sample_covariance(const Eigen::MatrixXd& rows) {
  const Eigen::Index m = rows.rows();
  if (m < 2) return Eigen::MatrixXd::Zero(rows.cols(), rows.cols());
  const Eigen::RowVectorXd mean = rows.colwise().mean();
  const Eigen::MatrixXd centered = rows.rowwise() - mean;
  return centered.transpose() * centered / static_cast<double>(m - 1);
}

RenewalParams renewal_params_for(const PairMoments& pm, double idle_mean) {
  RenewalParams r;
  r.transit_mean = pm.mean;
  r.transit_var = pm.var;
  r.idle_mean = Eigen::VectorXd::Constant(pm.mean.rows(), idle_mean);
  // Exponential idle periods: variance is the squared mean.
  r.idle_var = Eigen::VectorXd::Constant(pm.mean.rows(), idle_mean * idle_mean);
  return r;
}

// Pairwise-difference matrix completion over the stage sensor list; the
// missing sensors are permuted behind the overlap column. B and d carry
// pairwise relative measurements that the block-clique model assumes are
// observable even when absolute arrival offsets are not. Recovered offsets
// are magnitudes from the reference row (sign is not recoverable from a
// distance-like matrix).
ObservationVector dn_recover_vector(const SocialGraph& g, const ObservationVector& masked,
                                    const ObservationVector& truth, RecoveryMethod method,
                                    double idle_mean, double* delta_out) {
  std::vector<int> present, missing;
  for (std::size_t i = 0; i < masked.mask.size(); ++i) {
    (masked.mask[i] ? present : missing).push_back(static_cast<int>(i));
  }
  if (missing.empty()) return masked;
  if (present.empty()) {
    throw CoverageError("dn recovery: every non-reference entry is missing");
  }

  // group 1 = reference + all present sensors except the last, which serves
  // as the overlap row/column of the block clique.
  const int m = static_cast<int>(present.size());
  const int n = static_cast<int>(missing.size());
  std::vector<double> t1(static_cast<std::size_t>(m));
  std::vector<NodeId> g1(static_cast<std::size_t>(m));
  t1[0] = 0.0;
  g1[0] = masked.reference;
  for (int i = 0; i + 1 < m; ++i) {
    t1[static_cast<std::size_t>(i + 1)] = masked.values[static_cast<std::size_t>(present[static_cast<std::size_t>(i)])];
    g1[static_cast<std::size_t>(i + 1)] = masked.sensors[static_cast<std::size_t>(present[static_cast<std::size_t>(i)])];
  }
  const double t_overlap = masked.values[static_cast<std::size_t>(present.back())];
  std::vector<double> t2(static_cast<std::size_t>(n));
  std::vector<NodeId> g2(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    t2[static_cast<std::size_t>(j)] = truth.values[static_cast<std::size_t>(missing[static_cast<std::size_t>(j)])];
    g2[static_cast<std::size_t>(j)] = masked.sensors[static_cast<std::size_t>(missing[static_cast<std::size_t>(j)])];
  }

  PartialDelayMatrix p;
  p.m = m;
  p.n = n;
  p.A.resize(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      p.A(i, j) = std::abs(t1[static_cast<std::size_t>(i)] - t1[static_cast<std::size_t>(j)]);
    }
  }
  p.c.resize(m);
  for (int i = 0; i < m; ++i) p.c(i) = std::abs(t1[static_cast<std::size_t>(i)] - t_overlap);
  p.e = 0.0;
  p.d.resize(n);
  for (int j = 0; j < n; ++j) p.d(j) = std::abs(t_overlap - t2[static_cast<std::size_t>(j)]);
  p.B.resize(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      p.B(i, j) = std::abs(t2[static_cast<std::size_t>(i)] - t2[static_cast<std::size_t>(j)]);
    }
  }

  const ConditionLoad cl = condition_check_and_load(p, row_sample_covariance(p.A));
  if (delta_out) *delta_out = std::max(*delta_out, cl.delta);

  const PairMoments pm = path_moments(g, g1, g2);
  const DnCompletion comp =
      method == RecoveryMethod::dn_renewal
          ? dn_complete_renewal(cl.loaded, renewal_params_for(pm, idle_mean), 1e-9, 2000,
                                DnMode::normalized)
          : dn_complete(cl.loaded, pm.mean, 1e-9, 2000, DnMode::normalized);

  ObservationVector out = masked;
  for (int j = 0; j < n; ++j) {
    out.values[static_cast<std::size_t>(missing[static_cast<std::size_t>(j)])] = comp.X(0, j);
    out.mask[static_cast<std::size_t>(missing[static_cast<std::size_t>(j)])] = 1;
  }
  return out;
}

double masked_mse(const ObservationVector& recovered, const ObservationVector& truth,
                  const ObservationVector& masked) {
  double acc = 0.0;
  long long count = 0;
  for (std::size_t i = 0; i < masked.mask.size(); ++i) {
    if (!masked.mask[i]) {
      const double err = recovered.values[i] - truth.values[i];
      acc += err * err;
      ++count;
    }
  }
  return count == 0 ? 0.0 : acc / static_cast<double>(count);
}

// Runs `work` over trial indices, emitting each trial's rows to the sink in
// ascending trial order regardless of thread count.
void dispatch_trials(int trials, int threads,
                     const std::function<std::vector<MetricsRecord>(int)>& work,
                     const RecordSink& sink) {
  if (threads <= 1) {
    for (int t = 0; t < trials; ++t) {
      for (const auto& rec : work(t)) sink(rec);
    }
    return;
  }
  std::vector<std::vector<MetricsRecord>> rows(static_cast<std::size_t>(trials));
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  const int workers = std::min(threads, trials);
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (true) {
        const int t = next.fetch_add(1);
        if (t >= trials) return;
        try {
          rows[static_cast<std::size_t>(t)] = work(t);
        } catch (...) {
          const std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
  for (const auto& trial_rows : rows) {
    for (const auto& rec : trial_rows) sink(rec);
  }
}

struct TrialSetup {
  SocialGraph graph;
  NodeId source;
  Cascade cascade;
};

TrialSetup make_trial(const ExperimentConfig& cfg, std::uint64_t tseed) {
  TrialSetup s;
  s.graph = generate_network(cfg.network, derive_seed(tseed, 1));
  Rng pick(derive_seed(tseed, 2));
  s.source = s.graph.node_at(static_cast<int>(pick.uniform_below(
      static_cast<std::uint64_t>(s.graph.node_count()))));
  s.cascade = simulate_cascade(s.graph, s.source, 0.0, derive_seed(tseed, 3));
  return s;
}

MetricsRecord base_record(const ExperimentConfig& cfg, const char* experiment, int nodes,
                          int trial) {
  MetricsRecord rec;
  rec.experiment = experiment;
  rec.network = to_string(cfg.network.family);
  rec.nodes = nodes;
  rec.mode = to_string(cfg.mode);
  rec.method = to_string(cfg.method);
  rec.trial = trial;
  return rec;
}

int sensor_count(const ExperimentConfig& cfg, double pct, int nodes) {
  const int min_sensors =
      (cfg.method == RecoveryMethod::dn || cfg.method == RecoveryMethod::dn_renewal) ? 3 : 2;
  return std::clamp(static_cast<int>(std::ceil(pct * nodes)), min_sensors, nodes);
}

}  // namespace

void run_recovery_experiment(const ExperimentConfig& cfg, const RecordSink& sink) {
  cfg.validate();
  const bool matrix_track =
      cfg.method == RecoveryMethod::dn || cfg.method == RecoveryMethod::dn_renewal;

  const auto work = [&cfg, matrix_track](int trial) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::uint64_t tseed = derive_seed(cfg.seed, static_cast<std::uint64_t>(trial));
    std::vector<MetricsRecord> out;

    TrialSetup setup = make_trial(cfg, tseed);
    const int n = setup.graph.node_count();
    const std::vector<double> bc = betweenness_centrality(setup.graph);

    for (std::size_t pi = 0; pi < cfg.sensor_pcts.size(); ++pi) {
      const double pct = cfg.sensor_pcts[pi];
      const int k = sensor_count(cfg, pct, n);
      std::vector<NodeId> sensors;
      ObservationVector obs;
      bool observed = false;
      std::string obs_reason;
      try {
        sensors = select_sensors(setup.graph, k, bc);
        obs = observe(setup.cascade, sensors);
        observed = true;
      } catch (const Error& e) {
        obs_reason = classify_error(e);
      }

      // Matrix-track truth: residual delays of a vacation renewal process
      // per sensor pair, shared across missing rates and methods so dn vs
      // dn_renewal comparisons stay paired.
      Eigen::MatrixXd residual_truth;
      PairMoments pm;
      if (observed && matrix_track) {
        pm = path_moments(setup.graph, sensors, sensors);
        residual_truth.resize(k, k);
        residual_truth.setZero();
        Rng truth_rng(derive_seed(tseed, 7, static_cast<std::uint64_t>(pi)));
        for (int i = 0; i < k; ++i) {
          for (int j = i + 1; j < k; ++j) {
            const double mx = pm.mean(i, j);
            const double vx = pm.var(i, j);
            const double sd = std::sqrt(vx);
            const auto lifetime = [&](Rng& r) {
              double x = r.normal(mx, sd);
              for (int a = 0; a < 64 && !(x > 0.0); ++a) x = r.normal(mx, sd);
              if (!(x > 0.0)) x = mx / 1000.0;
              const double idle = cfg.idle_mean > 0.0 ? r.exponential(cfg.idle_mean) : 0.0;
              return x + idle;
            };
            const double horizon = 60.0 * (mx + cfg.idle_mean);
            const RenewalSim sim = simulate_renewal_residual(
                lifetime, horizon, 50, truth_rng.next_u64());
            residual_truth(i, j) = sim.expected_residual;
            residual_truth(j, i) = sim.expected_residual;
          }
        }
      }

      for (std::size_t ri = 0; ri < cfg.missing_rates.size(); ++ri) {
        const double rate = cfg.missing_rates[ri];
        MetricsRecord rec = base_record(cfg, "recovery", n, trial);
        rec.sensor_pct = pct;
        rec.missing_rate = rate;
        if (!observed) {
          rec.status = "failed";
          rec.reason = obs_reason;
          out.push_back(rec);
          continue;
        }
        try {
          if (!matrix_track) {
            const MissingnessSpec mspec{cfg.mode, rate,
                                        derive_seed(tseed, 100 + pi, ri)};
            const RankedMask rm = rank_and_mask(obs, mspec);
            rec.masked_count = static_cast<long long>(rm.masked.missing_count());
            ObservationVector recovered;
            if (rate == 0.0 || cfg.method == RecoveryMethod::none) {
              recovered = zero_fill(rm.masked);
            } else {
              recovered = recover_ranked_cs(rm);
            }
            rec.recovery_mse = masked_mse(recovered, obs, rm.masked);
          } else {
            // Burst loss of whole sensors: the trailing n_miss sensors of
            // the betweenness order lose their absolute offsets.
            const int n_miss = static_cast<int>(std::ceil(rate * (k - 1)));
            if (n_miss == 0) {
              rec.masked_count = 0;
              rec.recovery_mse = 0.0;
            } else if (n_miss > k - 2) {
              throw CoverageError("missing block leaves no known group");
            } else {
              const int m_known = k - 1 - n_miss;  // group 1 size
              PartialDelayMatrix p;
              p.m = m_known;
              p.n = n_miss;
              p.A = residual_truth.topLeftCorner(m_known, m_known);
              p.c = residual_truth.block(0, m_known, m_known, 1);
              p.e = 0.0;
              p.d = residual_truth.block(m_known, m_known + 1, 1, n_miss).transpose();
              p.B = residual_truth.bottomRightCorner(n_miss, n_miss);
              const Eigen::MatrixXd x_true =
                  residual_truth.topRightCorner(m_known, n_miss);

              const ConditionLoad cl =
                  condition_check_and_load(p, row_sample_covariance(p.A));
              rec.delta_load = cl.delta;

              const Eigen::MatrixXd ex = pm.mean.topRightCorner(m_known, n_miss);
              DnCompletion comp;
              if (cfg.method == RecoveryMethod::dn_renewal) {
                RenewalParams rp;
                rp.transit_mean = ex;
                rp.transit_var = pm.var.topRightCorner(m_known, n_miss);
                rp.idle_mean = Eigen::VectorXd::Constant(m_known, cfg.idle_mean);
                rp.idle_var = Eigen::VectorXd::Constant(m_known, cfg.idle_mean * cfg.idle_mean);
                comp = dn_complete_renewal(cl.loaded, rp, 1e-9, 2000, DnMode::normalized);
              } else {
                comp = dn_complete(cl.loaded, ex, 1e-9, 2000, DnMode::normalized);
              }
              rec.masked_count = static_cast<long long>(m_known) * n_miss;
              rec.recovery_mse = (comp.X - x_true).squaredNorm() /
                                 static_cast<double>(m_known * n_miss);
            }
          }
        } catch (const Error& e) {
          rec.status = "failed";
          rec.reason = classify_error(e);
        }
        out.push_back(rec);
      }
    }
    const auto t1 = std::chrono::steady_clock::now();
    const double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    for (auto& rec : out) rec.wall_ms = ms;
    return out;
  };

  dispatch_trials(cfg.trials, cfg.threads, work, sink);
}

void run_localization_experiment(const ExperimentConfig& cfg, const RecordSink& sink) {
  cfg.validate();

  const auto work = [&cfg](int trial) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::uint64_t tseed = derive_seed(cfg.seed, static_cast<std::uint64_t>(trial));
    std::vector<MetricsRecord> out;

    TrialSetup setup = make_trial(cfg, tseed);
    const int n = setup.graph.node_count();
    const Partition partition = louvain_partition(setup.graph, derive_seed(tseed, 5));

    for (std::size_t pi = 0; pi < cfg.sensor_pcts.size(); ++pi) {
      const double pct = cfg.sensor_pcts[pi];
      for (std::size_t ri = 0; ri < cfg.missing_rates.size(); ++ri) {
        const double rate = cfg.missing_rates[ri];
        MetricsRecord rec = base_record(cfg, "localization", n, trial);
        rec.sensor_pct = pct;
        rec.missing_rate = rate;
        try {
          double mse_acc = 0.0;
          long long mask_acc = 0;
          double delta_max = 0.0;
          int call_index = 0;
          const ObservationProvider provider = [&](const std::vector<NodeId>& stage_sensors) {
            const ObservationVector full = observe(setup.cascade, stage_sensors);
            const int call = call_index++;
            if (rate == 0.0) return full;
            const MissingnessSpec mspec{
                cfg.mode, rate,
                derive_seed(tseed, 200 + pi * 64 + ri, static_cast<std::uint64_t>(call))};
            const RankedMask rm = rank_and_mask(full, mspec);
            ObservationVector recovered;
            switch (cfg.method) {
              case RecoveryMethod::none:
                recovered = zero_fill(rm.masked);
                break;
              case RecoveryMethod::cs:
                recovered = recover_ranked_cs(rm);
                break;
              case RecoveryMethod::dn:
              case RecoveryMethod::dn_renewal:
                recovered = dn_recover_vector(setup.graph, rm.masked, full, cfg.method,
                                              cfg.idle_mean, &delta_max);
                break;
            }
            mse_acc += masked_mse(recovered, full, rm.masked) *
                       static_cast<double>(rm.masked.missing_count());
            mask_acc += static_cast<long long>(rm.masked.missing_count());
            return recovered;
          };

          TwoStageOptions opt;
          opt.stage1_sensor_count = std::max(2, static_cast<int>(std::ceil(pct * n)));
          opt.stage2_sensor_count = cfg.k2;
          opt.true_source = setup.source;

          const SourceEstimate est =
              two_stage_localize(setup.graph, partition, provider, opt);
          rec.hop_distance = est.hop_error ? std::optional<double>(*est.hop_error) : std::nullopt;
          rec.fallback = est.used_fallback ? 1 : 0;
          rec.masked_count = mask_acc;
          rec.recovery_mse = mask_acc > 0 ? mse_acc / static_cast<double>(mask_acc) : 0.0;
          if (delta_max > 0.0) rec.delta_load = delta_max;
        } catch (const Error& e) {
          rec.status = "failed";
          rec.reason = classify_error(e);
        }
        out.push_back(rec);
      }
    }
    const auto t1 = std::chrono::steady_clock::now();
    const double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    for (auto& rec : out) rec.wall_ms = ms;
    return out;
  };

  dispatch_trials(cfg.trials, cfg.threads, work, sink);
}

std::string csv_header() {
  return "experiment,network,nodes,sensor_pct,missing_rate,mode,method,trial,status,reason,"
         "masked_count,recovery_mse,hop_distance,fallback,delta_load";
}

std::string csv_row(const MetricsRecord& r) {
  std::string row;
  row += r.experiment;
  row += ',';
  row += r.network;
  row += ',';
  row += std::to_string(r.nodes);
  row += ',';
  row += format_double(r.sensor_pct);
  row += ',';
  row += format_double(r.missing_rate);
  row += ',';
  row += r.mode;
  row += ',';
  row += r.method;
  row += ',';
  row += std::to_string(r.trial);
  row += ',';
  row += r.status;
  row += ',';
  row += r.reason;
  row += ',';
  row += std::to_string(r.masked_count);
  row += ',';
  if (r.recovery_mse) row += format_double(*r.recovery_mse);
  row += ',';
  if (r.hop_distance) row += format_double(*r.hop_distance);
  row += ',';
  if (r.fallback) row += std::to_string(*r.fallback);
  row += ',';
  if (r.delta_load) row += format_double(*r.delta_load);
  return row;
}

void emit_csv(const std::vector<MetricsRecord>& records, const std::string& path) {
  namespace fs = std::filesystem;
  std::error_code ec;
  const bool append = fs::exists(path, ec) && fs::file_size(path, ec) > 0;
  std::ofstream out(path, append ? std::ios::app : std::ios::trunc);
  if (!out) throw IoError("emit_csv: cannot open '" + path + "' for writing");
  if (!append) out << csv_header() << '\n';
  for (const auto& rec : records) out << csv_row(rec) << '\n';
  out.flush();
  if (!out) throw IoError("emit_csv: write to '" + path + "' failed");
}

std::vector<SummaryLine> summarize(const std::vector<MetricsRecord>& records) {
  struct Acc {
    int ok = 0;
    int failed = 0;
    double mse_sum = 0.0;
    int mse_count = 0;
    double hop_sum = 0.0;
    int hop_count = 0;
  };
  std::map<std::tuple<std::string, std::string, double, double>, Acc> acc;
  for (const auto& r : records) {
    Acc& a = acc[{r.experiment, r.method, r.sensor_pct, r.missing_rate}];
    if (r.status == "ok") {
      ++a.ok;
      if (r.recovery_mse) {
        a.mse_sum += *r.recovery_mse;
        ++a.mse_count;
      }
      if (r.hop_distance) {
        a.hop_sum += *r.hop_distance;
        ++a.hop_count;
      }
    } else {
      ++a.failed;
    }
  }
  std::vector<SummaryLine> lines;
  for (const auto& [key, a] : acc) {
    SummaryLine line;
    line.experiment = std::get<0>(key);
    line.method = std::get<1>(key);
    line.sensor_pct = std::get<2>(key);
    line.missing_rate = std::get<3>(key);
    line.ok_rows = a.ok;
    line.failed_rows = a.failed;
    if (a.mse_count > 0) line.mean_mse = a.mse_sum / a.mse_count;
    if (a.hop_count > 0) line.mean_hops = a.hop_sum / a.hop_count;
    lines.push_back(line);
  }
  return lines;
}

std::string render_summary(const std::vector<SummaryLine>& lines) {
  std::ostringstream out;
  out << "experiment method sensor_pct missing_rate ok failed mean_mse mean_hops\n";
  for (const auto& l : lines) {
    out << l.experiment << ' ' << l.method << ' ' << format_double(l.sensor_pct) << ' '
        << format_double(l.missing_rate) << ' ' << l.ok_rows << ' ' << l.failed_rows << ' '
        << (l.mean_mse ? format_double(*l.mean_mse) : "-") << ' '
        << (l.mean_hops ? format_double(*l.mean_hops) : "-") << '\n';
  }
  return out.str();
}

}  // namespace rumorloc
