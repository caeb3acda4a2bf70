#pragma once

// Loss and power generators for the four operating regimes. Every
// environment emits the full per-channel vectors each round; masking to the
// played strategy is the driver's job.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "aoeecc/ee_model.hpp"
#include "aoeecc/rng.hpp"
#include "aoeecc/subset_dp.hpp"

namespace aoeecc {

struct RoundOutcome {
  std::vector<double> loss;   // [0, 1]
  std::vector<double> power;  // [0, 1/k]
  /// Expected loss of each channel this round given everything but the
  /// round's own randomness; empty when the generator has no closed form.
  std::vector<double> expected_loss;
};

enum class LossGenerator { bernoulli, ee_physical };

struct StochasticSpec {
  int k = 1;
  std::vector<double> mu;          // expected loss per channel
  std::vector<double> power_mean;  // in [0, 1/k]
  double power_spread = 0.0;       // uniform half-width around the mean
  LossGenerator generator = LossGenerator::bernoulli;
  PhysicalChannelModel physical;   // used by ee_physical

  int K() const { return static_cast<int>(power_mean.size()); }
};

/// Gap of each channel to the best expected loss.
inline std::vector<double> channel_gaps(std::span<const double> mu) {
  const double lo = *std::min_element(mu.begin(), mu.end());
  std::vector<double> g(mu.size());
  for (std::size_t f = 0; f < g.size(); ++f) g[f] = mu[f] - lo;
  return g;
}

/// Smallest positive gap; 0 when all channels tie.
inline double min_positive_gap(std::span<const double> mu) {
  double best = 0.0;
  for (double g : channel_gaps(mu)) {
    if (g > 0.0 && (best == 0.0 || g < best)) best = g;
  }
  return best;
}

/// Mean of a uniform draw on [m - s, m + s] clamped to [0, hi].
inline double clamped_uniform_mean(double m, double s, double hi) {
  if (s <= 0.0) return std::clamp(m, 0.0, hi);
  const double a = m - s, b = m + s;
  // Integral of clamp(x) over [a, b] divided by (b - a).
  auto prim = [hi](double x) {
    if (x <= 0.0) return 0.0;
    if (x <= hi) return 0.5 * x * x;
    return 0.5 * hi * hi + hi * (x - hi);
  };
  return (prim(b) - prim(a)) / (b - a);
}

inline std::vector<double> expected_power(const StochasticSpec& spec) {
  std::vector<double> p(spec.power_mean.size());
  for (std::size_t f = 0; f < p.size(); ++f) {
    p[f] = clamped_uniform_mean(spec.power_mean[f], spec.power_spread, 1.0 / spec.k);
  }
  return p;
}

inline void validate(const StochasticSpec& spec) {
  const auto K = spec.power_mean.size();
  if (spec.k < 1 || K < static_cast<std::size_t>(spec.k)) throw std::invalid_argument("need 1 <= k <= K");
  if (spec.generator == LossGenerator::bernoulli && spec.mu.size() != K) {
    throw std::invalid_argument("mu must have one entry per channel");
  }
  for (double m : spec.mu) {
    if (!(m >= 0.0 && m <= 1.0)) throw std::invalid_argument("mu entries must lie in [0, 1]");
  }
  for (double p : spec.power_mean) {
    if (!(p >= 0.0 && p <= 1.0 / spec.k + 1e-12)) {
      throw std::invalid_argument("power means must lie in [0, 1/k]");
    }
  }
  if (spec.generator == LossGenerator::ee_physical &&
      (spec.physical.links.size() != K || spec.physical.success.size() != K)) {
    throw std::invalid_argument("physical model needs one link per channel");
  }
}

/// IID round: Bernoulli(mu) losses or 1 - normalized physical EE, and powers
/// uniform around their means.
template <class G>
RoundOutcome stochastic_step(const StochasticSpec& spec, G& rng) {
  const auto K = spec.power_mean.size();
  const double hi = 1.0 / spec.k;
  RoundOutcome out;
  out.power.resize(K);
  for (std::size_t f = 0; f < K; ++f) {
    const double u = uniform01(rng);
    out.power[f] = std::clamp(spec.power_mean[f] + spec.power_spread * (2.0 * u - 1.0), 0.0, hi);
  }
  out.loss.resize(K);
  if (spec.generator == LossGenerator::bernoulli) {
    for (std::size_t f = 0; f < K; ++f) out.loss[f] = uniform01(rng) < spec.mu[f] ? 1.0 : 0.0;
    out.expected_loss = spec.mu;
  } else {
    const auto g = spec.physical.gains(out.power, spec.k, rng);
    for (std::size_t f = 0; f < K; ++f) out.loss[f] = 1.0 - g[f];
  }
  return out;
}

/// Oblivious jammer: per-channel loss inflation on a target set that changes
/// in phases. Phase p lasts phase_length * growth^p rounds and attacks
/// `targets` channels picked from the seed alone.
struct ObliviousJammerSpec {
  std::vector<double> attack_strength;
  std::uint64_t seed = 0;
  long long phase_length = 1000;
  double growth = 1.0;
  int targets = 1;
};

inline long long jammer_phase(const ObliviousJammerSpec& spec, long long t) {
  if (t < 1) throw std::domain_error("round index must be >= 1");
  const double L = static_cast<double>(spec.phase_length);
  if (spec.growth <= 1.0) return (t - 1) / spec.phase_length;
  // Start of phase p is L (g^p - 1) / (g - 1) + 1; invert, then fix rounding.
  auto start = [&](long long p) {
    return L * (std::pow(spec.growth, static_cast<double>(p)) - 1.0) / (spec.growth - 1.0) + 1.0;
  };
  long long p = static_cast<long long>(
      std::floor(std::log1p(static_cast<double>(t - 1) * (spec.growth - 1.0) / L) / std::log(spec.growth)));
  p = std::max(0LL, p);
  while (p > 0 && start(p) > static_cast<double>(t)) --p;
  while (start(p + 1) <= static_cast<double>(t)) ++p;
  return p;
}

/// 1 on the phase's target channels, 0 elsewhere.
inline std::vector<double> jammer_pattern(const ObliviousJammerSpec& spec, long long t) {
  const auto K = spec.attack_strength.size();
  const long long phase = jammer_phase(spec, t);
  std::vector<int> order(K);
  for (std::size_t f = 0; f < K; ++f) order[f] = static_cast<int>(f);
  SplitMix64 g(derive_seed(spec.seed, static_cast<std::uint64_t>(phase)));
  for (std::size_t i = K; i > 1; --i) std::swap(order[i - 1], order[uniform_index(g, i)]);
  std::vector<double> pattern(K, 0.0);
  for (int j = 0; j < std::min<int>(spec.targets, static_cast<int>(K)); ++j) {
    pattern[static_cast<std::size_t>(order[static_cast<std::size_t>(j)])] = 1.0;
  }
  return pattern;
}

/// Loss after inflation: clamp(base + s, 0, 1). For Bernoulli bases the
/// expected value is mu + (1 - mu) min(1, s).
inline void apply_attack(RoundOutcome& out, std::size_t f, double s) {
  if (s <= 0.0) return;
  out.loss[f] = std::clamp(out.loss[f] + s, 0.0, 1.0);
  if (!out.expected_loss.empty()) {
    const double m = out.expected_loss[f];
    out.expected_loss[f] = m + (1.0 - m) * std::min(1.0, s);
  }
}

/// Base stream of round t drawn from a per-round seed, so the sequence is a
/// pure function of (seed, t).
inline RoundOutcome seeded_base(const StochasticSpec& base, std::uint64_t seed, long long t) {
  SplitMix64 g(derive_seed(seed, static_cast<std::uint64_t>(t)));
  return stochastic_step(base, g);
}

inline RoundOutcome oblivious_step(const StochasticSpec& base, const ObliviousJammerSpec& spec,
                                   std::uint64_t base_seed, long long t) {
  RoundOutcome out = seeded_base(base, base_seed, t);
  const auto pattern = jammer_pattern(spec, t);
  for (std::size_t f = 0; f < out.loss.size(); ++f) apply_attack(out, f, spec.attack_strength[f] * pattern[f]);
  return out;
}

/// theta-memory adaptive jammer: attacks the j most played channels of the
/// last theta strategies (ties to the lower index). Idle until theta rounds
/// of history exist.
struct AdaptiveJammerSpec {
  int theta = 1;
  int j_channels = 1;
  double strength = 1.0;
};

inline std::vector<int> adaptive_targets(const AdaptiveJammerSpec& spec, int K, std::span<const Strategy> history,
                                         std::span<const int> eligible = {}) {
  if (static_cast<int>(history.size()) < spec.theta || spec.theta < 1) return {};
  std::vector<int> count(static_cast<std::size_t>(K), 0);
  for (std::size_t i = history.size() - static_cast<std::size_t>(spec.theta); i < history.size(); ++i) {
    for (int f : history[i]) ++count[static_cast<std::size_t>(f)];
  }
  std::vector<int> cand;
  if (eligible.empty()) {
    for (int f = 0; f < K; ++f) cand.push_back(f);
  } else {
    cand.assign(eligible.begin(), eligible.end());
  }
  std::stable_sort(cand.begin(), cand.end(), [&](int a, int b) {
    if (count[static_cast<std::size_t>(a)] != count[static_cast<std::size_t>(b)]) {
      return count[static_cast<std::size_t>(a)] > count[static_cast<std::size_t>(b)];
    }
    return a < b;
  });
  cand.resize(std::min<std::size_t>(cand.size(), static_cast<std::size_t>(std::max(0, spec.j_channels))));
  return cand;
}

template <class G>
RoundOutcome adaptive_step(const StochasticSpec& base, const AdaptiveJammerSpec& spec,
                           std::span<const Strategy> history, G& rng) {
  RoundOutcome out = stochastic_step(base, rng);
  for (int f : adaptive_targets(spec, base.K(), history)) apply_attack(out, static_cast<std::size_t>(f), spec.strength);
  return out;
}

enum class JammerKind { oblivious, adaptive };

struct MixedSpec {
  StochasticSpec base;
  std::vector<int> jammed_set;
  JammerKind kind = JammerKind::oblivious;
  ObliviousJammerSpec oblivious;
  AdaptiveJammerSpec adaptive;
};

/// Jammed channels follow the jammer, the rest stay stochastic.
inline RoundOutcome mixed_step(const MixedSpec& spec, std::uint64_t base_seed, long long t,
                               std::span<const Strategy> history) {
  RoundOutcome out = seeded_base(spec.base, base_seed, t);
  if (spec.kind == JammerKind::oblivious) {
    const auto pattern = jammer_pattern(spec.oblivious, t);
    for (int f : spec.jammed_set) {
      const auto i = static_cast<std::size_t>(f);
      apply_attack(out, i, spec.oblivious.attack_strength[i] * pattern[i]);
    }
  } else {
    for (int f : adaptive_targets(spec.adaptive, spec.base.K(), history, spec.jammed_set)) {
      apply_attack(out, static_cast<std::size_t>(f), spec.adaptive.strength);
    }
  }
  return out;
}

struct ContaminatedSpec {
  StochasticSpec base;
  double zeta = 0.0;    // attacking strength in [0, 1/2)
  long long tau0 = 0;   // contamination starts after this round
};

/// Stochastic losses with budgeted worst-case flips: after tau0 each
/// suboptimal channel f may be flipped to 0 in at most floor(t gap(f) zeta)
/// of the first t rounds, each best channel flipped to 1 in at most
/// floor(t gap_min zeta). Budgets are spent as early as allowed.
class ContaminationState {
 public:
  explicit ContaminationState(const ContaminatedSpec& spec) : spec_(spec) {
    if (!(spec.zeta >= 0.0 && spec.zeta < 0.5)) throw std::domain_error("attacking strength must lie in [0, 1/2)");
    if (spec.base.mu.empty()) throw std::invalid_argument("contamination needs expected losses");
    gaps_ = channel_gaps(spec.base.mu);
    const double dmin = min_positive_gap(spec.base.mu);
    for (auto& g : gaps_) {
      if (g == 0.0) {
        best_.push_back(true);
        g = dmin;
      } else {
        best_.push_back(false);
      }
    }
    used_.assign(gaps_.size(), 0);
  }

  /// Channels contaminated at round t, with their forced loss value.
  void apply(long long t, RoundOutcome& out) {
    if (t <= spec_.tau0) return;
    for (std::size_t f = 0; f < gaps_.size(); ++f) {
      if (used_[f] < budget(f, t)) {
        const double v = best_[f] ? 1.0 : 0.0;
        out.loss[f] = v;
        if (!out.expected_loss.empty()) out.expected_loss[f] = v;
        ++used_[f];
      }
    }
  }

  long long budget(std::size_t f, long long t) const {
    return static_cast<long long>(std::floor(static_cast<double>(t) * gaps_[f] * spec_.zeta));
  }
  long long used(std::size_t f) const { return used_[f]; }

 private:
  ContaminatedSpec spec_;
  std::vector<double> gaps_;
  std::vector<bool> best_;
  std::vector<long long> used_;
};

inline RoundOutcome contaminated_step(const ContaminatedSpec& spec, ContaminationState& state,
                                      std::uint64_t base_seed, long long t) {
  if (t < 1) throw std::domain_error("round index must be >= 1");
  RoundOutcome out = seeded_base(spec.base, base_seed, t);
  state.apply(t, out);
  return out;
}

/// Driver-facing environment. One instance per run.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual int K() const = 0;
  /// Outcome of round t (1-based); `history` holds past played strategies,
  /// oldest first, at least memory() of them when available.
  virtual RoundOutcome step(long long t, std::span<const Strategy> history) = 0;
  /// Mean per-channel power, used for budget accounting.
  virtual const std::vector<double>& mean_power() const = 0;
  /// Stationary expected losses when the regime has them.
  virtual std::optional<std::vector<double>> mean_loss() const { return std::nullopt; }
  virtual int memory() const { return 0; }
};

class StochasticEnv : public Environment {
 public:
  StochasticEnv(StochasticSpec spec, std::uint64_t seed) : spec_(std::move(spec)), seed_(seed) {
    validate(spec_);
    power_ = expected_power(spec_);
  }
  int K() const override { return spec_.K(); }
  RoundOutcome step(long long t, std::span<const Strategy>) override { return seeded_base(spec_, seed_, t); }
  const std::vector<double>& mean_power() const override { return power_; }
  std::optional<std::vector<double>> mean_loss() const override {
    if (spec_.generator != LossGenerator::bernoulli) return std::nullopt;
    return spec_.mu;
  }

 private:
  StochasticSpec spec_;
  std::uint64_t seed_;
  std::vector<double> power_;
};

class ObliviousEnv : public Environment {
 public:
  ObliviousEnv(StochasticSpec base, ObliviousJammerSpec jam, std::uint64_t seed)
      : base_(std::move(base)), jam_(std::move(jam)), seed_(seed) {
    validate(base_);
    if (jam_.attack_strength.size() != base_.power_mean.size()) {
      throw std::invalid_argument("attack strength needs one entry per channel");
    }
    power_ = expected_power(base_);
  }
  int K() const override { return base_.K(); }
  RoundOutcome step(long long t, std::span<const Strategy>) override { return oblivious_step(base_, jam_, seed_, t); }
  const std::vector<double>& mean_power() const override { return power_; }

 private:
  StochasticSpec base_;
  ObliviousJammerSpec jam_;
  std::uint64_t seed_;
  std::vector<double> power_;
};

class AdaptiveEnv : public Environment {
 public:
  AdaptiveEnv(StochasticSpec base, AdaptiveJammerSpec jam, std::uint64_t seed)
      : base_(std::move(base)), jam_(jam), seed_(seed) {
    validate(base_);
    power_ = expected_power(base_);
  }
  int K() const override { return base_.K(); }
  RoundOutcome step(long long t, std::span<const Strategy> history) override {
    SplitMix64 g(derive_seed(seed_, static_cast<std::uint64_t>(t)));
    return adaptive_step(base_, jam_, history, g);
  }
  const std::vector<double>& mean_power() const override { return power_; }
  int memory() const override { return jam_.theta; }

 private:
  StochasticSpec base_;
  AdaptiveJammerSpec jam_;
  std::uint64_t seed_;
  std::vector<double> power_;
};

class MixedEnv : public Environment {
 public:
  MixedEnv(MixedSpec spec, std::uint64_t seed) : spec_(std::move(spec)), seed_(seed) {
    validate(spec_.base);
    if (static_cast<int>(spec_.jammed_set.size()) > spec_.base.k) {
      throw std::invalid_argument("jammed set larger than k");
    }
    for (int f : spec_.jammed_set) {
      if (f < 0 || f >= spec_.base.K()) throw std::invalid_argument("jammed channel out of range");
    }
    if (spec_.kind == JammerKind::oblivious && spec_.oblivious.attack_strength.size() != spec_.base.power_mean.size()) {
      throw std::invalid_argument("attack strength needs one entry per channel");
    }
    power_ = expected_power(spec_.base);
  }
  int K() const override { return spec_.base.K(); }
  RoundOutcome step(long long t, std::span<const Strategy> history) override {
    return mixed_step(spec_, seed_, t, history);
  }
  const std::vector<double>& mean_power() const override { return power_; }
  int memory() const override { return spec_.kind == JammerKind::adaptive ? spec_.adaptive.theta : 0; }

 private:
  MixedSpec spec_;
  std::uint64_t seed_;
  std::vector<double> power_;
};

class ContaminatedEnv : public Environment {
 public:
  ContaminatedEnv(ContaminatedSpec spec, std::uint64_t seed)
      : spec_(std::move(spec)), state_(spec_), seed_(seed) {
    validate(spec_.base);
    power_ = expected_power(spec_.base);
  }
  int K() const override { return spec_.base.K(); }
  RoundOutcome step(long long t, std::span<const Strategy>) override {
    return contaminated_step(spec_, state_, seed_, t);
  }
  const std::vector<double>& mean_power() const override { return power_; }
  std::optional<std::vector<double>> mean_loss() const override { return spec_.base.mu; }
  const ContaminationState& contamination() const { return state_; }

 private:
  ContaminatedSpec spec_;
  ContaminationState state_;
  std::uint64_t seed_;
  std::vector<double> power_;
};

}  // namespace aoeecc
