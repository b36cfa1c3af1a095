#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rumorloc/diffusion.hpp"
#include "rumorloc/graph.hpp"

namespace rumorloc {

enum class NetworkFamily { barabasi_albert, watts_strogatz, tree, two_clique };

struct NetworkSpec {
  NetworkFamily family = NetworkFamily::barabasi_albert;
  int nodes = 1000;
  int attach = 2;                 // barabasi_albert: edges per arriving node
  int ws_k = 4;                   // watts_strogatz: even ring degree
  double ws_p = 0.1;              // watts_strogatz: rewire probability
  int clique_a = 5;               // two_clique sizes
  int clique_b = 5;
  double mean_lo = 1.0, mean_hi = 2.0;   // edge delay mean range
  double var_lo = 0.01, var_hi = 0.05;   // edge delay variance range
};

// Connected graph with delays drawn uniformly from the spec ranges, sampled
// in canonical edge order; fully reproducible from the seed.
SocialGraph generate_network(const NetworkSpec& spec, std::uint64_t seed);

enum class RecoveryMethod { cs, dn, dn_renewal, none };

std::string to_string(NetworkFamily f);
std::string to_string(RecoveryMethod m);
std::string to_string(MissingMode m);
NetworkFamily parse_family(const std::string& s);
RecoveryMethod parse_method(const std::string& s);
MissingMode parse_mode(const std::string& s);

struct ExperimentConfig {
  NetworkSpec network;
  std::vector<double> sensor_pcts{0.1};
  std::vector<double> missing_rates{0.0, 0.15, 0.30};
  MissingMode mode = MissingMode::sporadic;
  RecoveryMethod method = RecoveryMethod::cs;
  int trials = 10;
  std::uint64_t seed = 1;
  int k2 = 20;              // stage-2 sensor count for localization
  double idle_mean = 1.0;   // transmitter idle period mean for the dn track
  int threads = 1;

  void validate() const;  // ArgumentError on violations
};

struct MetricsRecord {
  std::string experiment;  // "recovery" | "localization"
  std::string network;
  int nodes = 0;
  double sensor_pct = 0.0;
  double missing_rate = 0.0;
  std::string mode;
  std::string method;
  int trial = 0;
  std::string status = "ok";  // "ok" | "failed"
  std::string reason;         // short token when failed, else empty
  long long masked_count = 0;
  std::optional<double> recovery_mse;
  std::optional<double> hop_distance;
  std::optional<int> fallback;       // localization: 1 when the single-stage fallback ran
  std::optional<double> delta_load;  // dn track: diagonal load from the condition check
  double wall_ms = 0.0;  // measured per trial; intentionally never serialized,
                         // CSV output must be byte-identical across reruns
};

using RecordSink = std::function<void(const MetricsRecord&)>;

// Per (sensor pct, missing rate, trial): simulate, observe, mask, recover,
// score MSE over the masked entries. Failed trials become "failed" rows.
// Rows arrive at the sink in deterministic (trial, pct, rate) order.
void run_recovery_experiment(const ExperimentConfig& cfg, const RecordSink& sink);

// Same shape, ending in the two-stage source estimate and hop distance.
void run_localization_experiment(const ExperimentConfig& cfg, const RecordSink& sink);

std::string csv_header();
std::string csv_row(const MetricsRecord& r);

// Writes header + rows; appending to an existing non-empty file skips the
// header so sequential runs can share one artifact.
void emit_csv(const std::vector<MetricsRecord>& records, const std::string& path);

struct SummaryLine {
  std::string experiment;
  std::string method;
  double sensor_pct = 0.0;
  double missing_rate = 0.0;
  int ok_rows = 0;
  int failed_rows = 0;
  std::optional<double> mean_mse;
  std::optional<double> mean_hops;
};

std::vector<SummaryLine> summarize(const std::vector<MetricsRecord>& records);
std::string render_summary(const std::vector<SummaryLine>& lines);

}  // namespace rumorloc
