// Command-line benchmark driver: `recover` replays cascade observations
// through the missing-data recovery paths, `localize` runs the full
// two-stage source estimate. Rows stream to CSV as trials complete.
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rumorloc/bench.hpp"
#include "rumorloc/errors.hpp"

namespace {

void add_common_options(CLI::App* sub, rumorloc::ExperimentConfig& cfg, std::string& network,
                        std::string& mode, std::string& method, std::string& out) {
  sub->add_option("--network", network, "network family: barabasi_albert|watts_strogatz|tree|two_clique")
      ->capture_default_str();
  sub->add_option("--nodes", cfg.network.nodes, "node count")->capture_default_str();
  sub->add_option("--sensor-pct", cfg.sensor_pcts, "sensor fractions of the node count")
      ->capture_default_str();
  sub->add_option("--missing", cfg.missing_rates, "missing-entry rates in [0,1]")
      ->capture_default_str();
  sub->add_option("--mode", mode, "missingness mode")
      ->check(CLI::IsMember({"sporadic", "burst"}))
      ->capture_default_str();
  sub->add_option("--method", method, "recovery method")
      ->check(CLI::IsMember({"cs", "dn", "dn-renewal", "none"}))
      ->capture_default_str();
  sub->add_option("--trials", cfg.trials, "trials per configuration")->capture_default_str();
  sub->add_option("--seed", cfg.seed, "base seed")->capture_default_str();
  sub->add_option("--k2", cfg.k2, "stage-2 sensor count (localize)")->capture_default_str();
  sub->add_option("--threads", cfg.threads, "worker threads")->capture_default_str();
  sub->add_option("--idle-mean", cfg.idle_mean, "transmitter idle-period mean (dn tracks)")
      ->capture_default_str();
  sub->add_option("--attach", cfg.network.attach, "barabasi_albert: edges per new node")
      ->capture_default_str();
  sub->add_option("--ws-k", cfg.network.ws_k, "watts_strogatz: even ring degree")
      ->capture_default_str();
  sub->add_option("--ws-p", cfg.network.ws_p, "watts_strogatz: rewire probability")
      ->capture_default_str();
  sub->add_option("--clique-a", cfg.network.clique_a, "two_clique: first clique size")
      ->capture_default_str();
  sub->add_option("--clique-b", cfg.network.clique_b, "two_clique: second clique size")
      ->capture_default_str();
  sub->add_option("--mean-lo", cfg.network.mean_lo, "edge delay mean, lower bound")
      ->capture_default_str();
  sub->add_option("--mean-hi", cfg.network.mean_hi, "edge delay mean, upper bound")
      ->capture_default_str();
  sub->add_option("--var-lo", cfg.network.var_lo, "edge delay variance, lower bound")
      ->capture_default_str();
  sub->add_option("--var-hi", cfg.network.var_hi, "edge delay variance, upper bound")
      ->capture_default_str();
  sub->add_option("--out", out, "CSV output path (appends when the file already has rows)");
  // Documentation only: the token is expanded into option tokens before the
  // parser runs (CLI11's own config reader cannot target subcommand options
  // with plain sectionless keys).
  sub->add_option("--config", "plain key=value config file (keys match long option names)");
}

// Plain key=value config: one option per line, '#' starts a comment, blank
// lines ignored. Whitespace-separated values after '=' become separate
// tokens, so list options (`missing=0 0.15 0.3`) work. A key given
// explicitly on the command line wins outright; its config entry is dropped.
std::vector<std::string> config_tokens(const std::string& path,
                                       const std::vector<std::string>& given) {
  std::ifstream in(path);
  if (!in) throw rumorloc::ArgumentError("cannot read config file '" + path + "'");
  const auto explicitly_given = [&](const std::string& flag) {
    for (const std::string& a : given) {
      if (a == flag || (a.size() > flag.size() &&
                        a.compare(0, flag.size(), flag) == 0 && a[flag.size()] == '=')) {
        return true;
      }
    }
    return false;
  };
  const auto trim = [](const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
  };
  std::vector<std::string> toks;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string entry = trim(line);
    if (entry.empty()) continue;
    const auto eq = entry.find('=');
    const std::string key = eq == std::string::npos ? std::string{} : trim(entry.substr(0, eq));
    if (key.empty()) {
      throw rumorloc::ArgumentError(path + ":" + std::to_string(lineno) +
                                    ": expected key=value");
    }
    const std::string flag = "--" + key;
    if (explicitly_given(flag)) continue;
    toks.push_back(flag);
    std::istringstream vals(entry.substr(eq + 1));
    std::string v;
    while (vals >> v) toks.push_back(v);
  }
  return toks;
}

// Replaces `--config FILE` (or `--config=FILE`) with the file's expansion so
// the config lands in the same parsing scope the flag was written in.
void splice_config(std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::string path;
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw rumorloc::ArgumentError("--config needs a file path");
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
                 args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
    } else {
      continue;
    }
    const std::vector<std::string> toks = config_tokens(path, args);
    args.insert(args.begin() + static_cast<std::ptrdiff_t>(i), toks.begin(), toks.end());
    return;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rumor source localization benchmarks"};
  app.require_subcommand(1);

  rumorloc::ExperimentConfig cfg;
  std::string network = "barabasi_albert";
  std::string mode = "sporadic";
  std::string method = "cs";
  std::string out;

  CLI::App* recover = app.add_subcommand("recover", "observation recovery error (MSE)");
  CLI::App* localize = app.add_subcommand("localize", "two-stage source localization (hops)");
  add_common_options(recover, cfg, network, mode, method, out);
  add_common_options(localize, cfg, network, mode, method, out);

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    splice_config(args);
  } catch (const rumorloc::ArgumentError& e) {
    std::cerr << "argument error: " << e.what() << '\n';
    return 2;
  }
  try {
    app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    cfg.network.family = rumorloc::parse_family(network);
    cfg.mode = rumorloc::parse_mode(mode);
    cfg.method = rumorloc::parse_method(method);
    cfg.validate();

    std::ofstream file;
    const bool to_file = !out.empty();
    if (to_file) {
      namespace fs = std::filesystem;
      std::error_code ec;
      const bool append = fs::exists(out, ec) && fs::file_size(out, ec) > 0;
      file.open(out, append ? std::ios::app : std::ios::trunc);
      if (!file) throw rumorloc::IoError("cannot open '" + out + "' for writing");
      if (!append) file << rumorloc::csv_header() << '\n';
    } else {
      std::cout << rumorloc::csv_header() << '\n';
    }

    std::vector<rumorloc::MetricsRecord> records;
    const rumorloc::RecordSink sink = [&](const rumorloc::MetricsRecord& rec) {
      const std::string row = rumorloc::csv_row(rec);
      if (to_file) {
        file << row << '\n';
        file.flush();
        if (!file) throw rumorloc::IoError("write to '" + out + "' failed");
      } else {
        std::cout << row << '\n';
      }
      records.push_back(rec);
    };

    if (recover->parsed()) {
      rumorloc::run_recovery_experiment(cfg, sink);
    } else {
      rumorloc::run_localization_experiment(cfg, sink);
    }

    const std::string summary = rumorloc::render_summary(rumorloc::summarize(records));
    if (to_file) {
      std::cout << summary;
    } else {
      std::cerr << summary;
    }
    return 0;
  } catch (const rumorloc::ArgumentError& e) {
    std::cerr << "argument error: " << e.what() << '\n';
    return 2;
  } catch (const rumorloc::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
