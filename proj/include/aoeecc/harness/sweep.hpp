#pragma once

// Seed sweeps: independent runs on a small thread pool, then per-checkpoint
// mean and standard deviation across the seeds that finished.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "aoeecc/harness/csv.hpp"
#include "aoeecc/harness/run.hpp"

namespace aoeecc {

struct SweepFailure {
  std::uint64_t seed = 0;
  std::string message;
  bool invariant = false;
};

struct SweepResult {
  std::vector<RunResult> runs;  // successful runs, ordered by seed
  std::vector<SweepFailure> failures;
};

inline SweepResult sweep(const RunConfig& cfg, std::uint64_t first_seed, std::uint64_t last_seed, int parallel = 1) {
  if (last_seed < first_seed) throw ConfigError("seeds", "empty seed range");
  const std::size_t count = static_cast<std::size_t>(last_seed - first_seed + 1);
  std::vector<std::optional<RunResult>> slots(count);
  std::vector<std::optional<SweepFailure>> errors(count);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      const std::uint64_t seed = first_seed + i;
      try {
        slots[i] = run_experiment(cfg, seed);
      } catch (const InvariantViolation& e) {
        errors[i] = SweepFailure{seed, e.what(), true};
      } catch (const std::exception& e) {
        errors[i] = SweepFailure{seed, e.what(), false};
      }
    }
  };
  const int threads = std::max(1, std::min<int>(parallel, static_cast<int>(count)));
  std::vector<std::thread> pool;
  for (int i = 1; i < threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  SweepResult out;
  for (std::size_t i = 0; i < count; ++i) {
    if (slots[i]) out.runs.push_back(std::move(*slots[i]));
    if (errors[i]) out.failures.push_back(std::move(*errors[i]));
  }
  return out;
}

/// Mean and sample standard deviation (n - 1 denominator; 0 for one value).
struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

inline MeanStd mean_std(std::span<const double> v) {
  MeanStd m;
  if (v.empty()) return m;
  for (double x : v) m.mean += x;
  m.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - m.mean) * (x - m.mean);
    m.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return m;
}

/// Two rows per checkpoint (seed = "mean", then "std"). All runs share the
/// checkpoint grid because it depends only on n.
inline std::vector<CsvRow> aggregate(const std::vector<RunResult>& runs) {
  std::vector<CsvRow> rows;
  if (runs.empty()) return rows;
  const auto& grid = runs.front().records;
  std::vector<double> buf(runs.size());
  for (std::size_t c = 0; c < grid.size(); ++c) {
    auto stat = [&](auto field) {
      for (std::size_t r = 0; r < runs.size(); ++r) buf[r] = field(runs[r].records[c]);
      return mean_std(buf);
    };
    const auto reg = stat([](const RoundRecord& x) { return x.regret; });
    const auto vio = stat([](const RoundRecord& x) { return x.violation; });
    const auto lam = stat([](const RoundRecord& x) { return x.lambda; });
    const auto ee = stat([](const RoundRecord& x) { return x.ee; });
    const auto pw = stat([](const RoundRecord& x) { return x.expected_power; });
    const auto& p = runs.front();
    rows.push_back({grid[c].t, p.policy, p.regime, "mean", reg.mean, vio.mean, lam.mean, ee.mean, pw.mean});
    rows.push_back({grid[c].t, p.policy, p.regime, "std", reg.std, vio.std, lam.std, ee.std, pw.std});
  }
  return rows;
}

}  // namespace aoeecc
