// Command-line front end: run, sweep, validate, oracle.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#include "aoeecc/baselines.hpp"
#include "aoeecc/harness/config.hpp"
#include "aoeecc/harness/csv.hpp"
#include "aoeecc/harness/log.hpp"
#include "aoeecc/harness/run.hpp"
#include "aoeecc/harness/sweep.hpp"
#include "aoeecc/subset_dp.hpp"

namespace {

using namespace aoeecc;

enum Exit { ok = 0, config_error = 1, invariant_error = 2, io_error = 3 };

void emit(const std::vector<CsvRow>& rows, const std::string& path) {
  if (path.empty() || path == "-") {
    write_csv(std::cout, rows);
  } else {
    write_csv(path, rows);
    log::info("wrote " + std::to_string(rows.size()) + " rows to " + path);
  }
}

std::pair<std::uint64_t, std::uint64_t> parse_seed_range(const std::string& s) {
  const auto dots = s.find("..");
  try {
    if (dots == std::string::npos) {
      const auto v = std::stoull(s);
      return {v, v};
    }
    return {std::stoull(s.substr(0, dots)), std::stoull(s.substr(dots + 2))};
  } catch (const std::exception&) {
    throw ConfigError("--seeds", "expected A..B, got '" + s + "'");
  }
}

// All k-subsets of {0..K-1} in lexicographic order.
std::vector<std::vector<int>> all_subsets(int K, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(static_cast<std::size_t>(k));
  std::iota(cur.begin(), cur.end(), 0);
  while (true) {
    out.push_back(cur);
    int i = k - 1;
    while (i >= 0 && cur[static_cast<std::size_t>(i)] == K - k + i) --i;
    if (i < 0) break;
    ++cur[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k; ++j) cur[static_cast<std::size_t>(j)] = cur[static_cast<std::size_t>(j - 1)] + 1;
  }
  return out;
}

int cmd_oracle(const RunConfig& cfg) {
  if (cfg.K > 12) throw ConfigError("K", "oracle enumeration is limited to K <= 12");
  const auto subsets = all_subsets(cfg.K, cfg.k);
  Rng rng(cfg.seed);
  double worst_prob = 0.0, worst_marg = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> w(static_cast<std::size_t>(cfg.K));
    for (auto& x : w) x = std::exp(-5.0 * uniform01(rng));
    long double Z = 0.0L;
    for (const auto& s : subsets) {
      long double p = 1.0L;
      for (int f : s) p *= w[static_cast<std::size_t>(f)];
      Z += p;
    }
    SubsetDp dp;
    dp.reset(w, cfg.k);
    std::vector<double> marg(w.size(), 0.0);
    for (const auto& s : subsets) {
      long double p = 1.0L;
      for (int f : s) p *= w[static_cast<std::size_t>(f)];
      const double brute = static_cast<double>(p / Z);
      worst_prob = std::max(worst_prob, std::fabs(brute - dp.strategy_prob(Strategy(s))));
      for (int f : s) marg[static_cast<std::size_t>(f)] += brute;
    }
    const auto m = dp.marginals();
    for (std::size_t f = 0; f < w.size(); ++f) worst_marg = std::max(worst_marg, std::fabs(m[f] - marg[f]));
  }

  // Hindsight oracle against enumeration on a short run's loss totals.
  RunConfig small = cfg;
  small.n_rounds = std::min<long long>(cfg.n_rounds, 2000);
  auto env = build_environment(small, small.seed);
  std::vector<double> cum(static_cast<std::size_t>(cfg.K), 0.0);
  for (long long t = 1; t <= small.n_rounds; ++t) {
    const auto out = env->step(t, {});
    for (std::size_t f = 0; f < cum.size(); ++f) cum[f] += out.loss[f];
  }
  double brute_best = INFINITY;
  for (const auto& s : subsets) {
    double v = 0.0;
    for (int f : s) v += cum[static_cast<std::size_t>(f)];
    brute_best = std::min(brute_best, v);
  }
  const double hind_err = std::fabs(hindsight_best(cum, cfg.k).second - brute_best);

  std::cout << "strategies " << subsets.size() << "\n"
            << "max |P_dp - P_enum| " << worst_prob << "\n"
            << "max |rho_dp - rho_enum| " << worst_marg << "\n"
            << "hindsight |dp - enum| " << hind_err << "\n";
  const bool pass = worst_prob <= 1e-10 && worst_marg <= 1e-10 && hind_err <= 1e-9 * std::max(1.0, brute_best);
  std::cout << (pass ? "oracle: PASS" : "oracle: FAIL") << "\n";
  return pass ? ok : invariant_error;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constrained combinatorial semi-bandit lab"};
  app.require_subcommand(1);

  std::string config_path, out_path, seeds = "1..10";
  long long seed_override = -1;
  int parallel = 1;

  auto* run = app.add_subcommand("run", "run one configuration and write its checkpoint CSV");
  run->add_option("config", config_path, "config file")->required();
  run->add_option("--out,-o", out_path, "CSV path (default: config 'output', else stdout)");
  run->add_option("--seed", seed_override, "override the config seed");

  auto* sw = app.add_subcommand("sweep", "run a seed range and write mean/std per checkpoint");
  sw->add_option("config", config_path, "config file")->required();
  sw->add_option("--seeds", seeds, "seed range A..B")->capture_default_str();
  sw->add_option("--parallel,-j", parallel, "worker threads")->capture_default_str();
  sw->add_option("--out,-o", out_path, "CSV path (default: config 'output', else stdout)");

  auto* val = app.add_subcommand("validate", "parse and check a config without running it");
  val->add_option("config", config_path, "config file")->required();

  auto* orc = app.add_subcommand("oracle", "brute-force checks of the sampler and hindsight oracle (small K)");
  orc->add_option("config", config_path, "config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : config_error;
  }

  try {
    RunConfig cfg = load_config(config_path);
    if (out_path.empty()) out_path = cfg.output;
    if (*val) {
      std::cout << "ok: K=" << cfg.K << " k=" << cfg.k << " n=" << cfg.n_rounds << " policy=" << to_string(cfg.policy)
                << " regime=" << to_string(cfg.regime) << "\n";
      return ok;
    }
    if (*orc) return cmd_oracle(cfg);
    if (*run) {
      if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
      const auto res = run_experiment(cfg);
      emit(to_rows(res), out_path);
      return ok;
    }
    const auto [a, b] = parse_seed_range(seeds);
    const auto res = sweep(cfg, a, b, parallel);
    for (const auto& f : res.failures) log::error("seed " + std::to_string(f.seed) + ": " + f.message);
    emit(aggregate(res.runs), out_path);
    if (!res.failures.empty()) {
      const bool inv = std::any_of(res.failures.begin(), res.failures.end(), [](const auto& f) { return f.invariant; });
      return inv ? invariant_error : config_error;
    }
    return ok;
  } catch (const ConfigError& e) {
    log::error("config error: " + std::string(e.what()));
    return config_error;
  } catch (const IoError& e) {
    log::error("I/O error: " + std::string(e.what()));
    return io_error;
  } catch (const InvariantViolation& e) {
    log::error("invariant violation: " + std::string(e.what()));
    return invariant_error;
  } catch (const std::invalid_argument& e) {
    log::error("config error: " + std::string(e.what()));
    return config_error;
  } catch (const std::domain_error& e) {
    log::error("config error: " + std::string(e.what()));
    return config_error;
  }
}
