#include "rumorloc/diffusion.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>

#include "rumorloc/format.hpp"
#include "rumorloc/rng.hpp"

namespace rumorloc {

bool ObservationVector::fully_present() const {
  return std::all_of(mask.begin(), mask.end(), [](char m) { return m != 0; });
}

std::size_t ObservationVector::missing_count() const {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), char{0}));
}

namespace {

double sample_positive_delay(Rng& rng, double mean, double variance) {
  if (variance == 0.0) return mean;
  const double sd = std::sqrt(variance);
  for (int attempt = 0; attempt < 64; ++attempt) {
    const double d = rng.normal(mean, sd);
    if (d > 0.0) return d;
  }
  return mean / 1000.0;  // causality fallback, effectively unreachable regime
}

}  // namespace

std::vector<double> sample_edge_delays(const SocialGraph& g, std::uint64_t seed) {
  // One delay per canonical edge, sampled in edge order.
  Rng rng(seed);
  std::vector<double> sampled(static_cast<std::size_t>(g.edge_count()));
  for (int ei = 0; ei < g.edge_count(); ++ei) {
    const auto& e = g.edges()[static_cast<std::size_t>(ei)];
    sampled[static_cast<std::size_t>(ei)] = sample_positive_delay(rng, e.delay.mean, e.delay.variance);
  }
  return sampled;
}

Cascade simulate_cascade(const SocialGraph& g, NodeId source, double start_epoch,
                         std::uint64_t seed) {
  const int source_idx = g.index_of(source);
  const int n = g.node_count();

  const std::vector<double> sampled = sample_edge_delays(g, seed);

  // Dijkstra on the sampled realization.
  std::vector<double> dist(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  std::vector<char> settled(static_cast<std::size_t>(n), 0);
  dist[static_cast<std::size_t>(source_idx)] = 0.0;
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> queue;
  queue.emplace(0.0, source_idx);
  while (!queue.empty()) {
    const auto [d, u] = queue.top();
    queue.pop();
    if (settled[static_cast<std::size_t>(u)]) continue;
    settled[static_cast<std::size_t>(u)] = 1;
    for (const auto& nb : g.neighbors_at(u)) {
      if (settled[static_cast<std::size_t>(nb.target)]) continue;
      const double cand = d + sampled[static_cast<std::size_t>(nb.edge)];
      if (cand < dist[static_cast<std::size_t>(nb.target)]) {
        dist[static_cast<std::size_t>(nb.target)] = cand;
        queue.emplace(cand, nb.target);
      }
    }
  }

  Cascade c;
  c.source = source;
  c.start_epoch = start_epoch;
  c.seed = seed;
  for (int i = 0; i < n; ++i) {
    if (dist[static_cast<std::size_t>(i)] != std::numeric_limits<double>::infinity()) {
      c.arrival[g.node_at(i)] = start_epoch + dist[static_cast<std::size_t>(i)];
    }
  }
  return c;
}

ObservationVector observe(const Cascade& c, const std::vector<NodeId>& sensors) {
  if (sensors.size() < 2) {
    throw ArgumentError("observe: need a reference sensor plus at least one other");
  }
  for (const NodeId s : sensors) {
    if (!c.arrival.count(s)) {
      throw CoverageError("sensor " + std::to_string(s) + " was not reached by the cascade");
    }
  }
  ObservationVector o;
  o.reference = sensors.front();
  const double t1 = c.arrival.at(o.reference);
  o.sensors.assign(sensors.begin() + 1, sensors.end());
  o.values.reserve(o.sensors.size());
  for (const NodeId s : o.sensors) o.values.push_back(c.arrival.at(s) - t1);
  o.mask.assign(o.values.size(), char{1});
  return o;
}

ObservationVector apply_missingness(const ObservationVector& o, const MissingnessSpec& spec) {
  if (spec.rate < 0.0 || spec.rate > 1.0) {
    throw ArgumentError("apply_missingness: rate must lie in [0, 1]");
  }
  if (!o.fully_present()) {
    throw ArgumentError("apply_missingness: input must be fully present");
  }
  const std::size_t len = o.values.size();
  const std::size_t count = static_cast<std::size_t>(std::ceil(spec.rate * static_cast<double>(len)));
  ObservationVector out = o;
  if (count == 0) return out;

  Rng rng(spec.seed);
  if (spec.mode == MissingMode::sporadic) {
    for (const std::size_t i : rng.sample_indices(len, std::min(count, len))) {
      out.mask[i] = 0;
    }
  } else {
    const std::size_t run = std::min(count, len);
    const std::size_t start = static_cast<std::size_t>(rng.uniform_below(len - run + 1));
    for (std::size_t i = start; i < start + run; ++i) out.mask[i] = 0;
  }
  for (std::size_t i = 0; i < len; ++i) {
    if (!out.mask[i]) out.values[i] = 0.0;
  }
  return out;
}

LoadedCascade load_cascade(std::istream& in) {
  LoadedCascade loaded;
  std::string line;
  int line_no = 0;
  bool have_source = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream fields(line);
    std::string first;
    if (!(fields >> first)) continue;
    if (!have_source) {
      if (first != "source") {
        throw ParseError("line " + std::to_string(line_no) + ": expected 'source <id> <time>' first");
      }
      if (!(fields >> loaded.cascade.source >> loaded.cascade.start_epoch)) {
        throw ParseError("line " + std::to_string(line_no) + ": malformed source line");
      }
      have_source = true;
      continue;
    }
    NodeId id;
    double t;
    std::istringstream entry(first);
    if (!(entry >> id) || !(fields >> t)) {
      throw ParseError("line " + std::to_string(line_no) + ": expected '<id> <time>'");
    }
    if (loaded.cascade.arrival.count(id)) {
      throw ParseError("line " + std::to_string(line_no) + ": duplicate arrival for node " +
                       std::to_string(id));
    }
    loaded.cascade.arrival[id] = t;
    if (t < loaded.cascade.start_epoch) {
      loaded.warnings.push_back("node " + std::to_string(id) + " arrives before start epoch");
    }
  }
  if (!have_source) {
    throw ParseError("cascade stream has no 'source' line");
  }
  return loaded;
}

void save_cascade(const Cascade& c, std::ostream& out) {
  out << "source " << c.source << ' ' << format_double(c.start_epoch) << '\n';
  for (const auto& [id, t] : c.arrival) {
    out << id << ' ' << format_double(t) << '\n';
  }
}

}  // namespace rumorloc
