#pragma once

// Single-run driver: builds the environment and learner from a RunConfig,
// runs the round loop and keeps regret, violation and EE accumulators at
// geometric checkpoints.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <memory>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "aoeecc/baselines.hpp"
#include "aoeecc/coop.hpp"
#include "aoeecc/envs.hpp"
#include "aoeecc/harness/config.hpp"
#include "aoeecc/harness/log.hpp"
#include "aoeecc/learner.hpp"
#include "aoeecc/policy.hpp"
#include "aoeecc/rng.hpp"

namespace aoeecc {

struct RoundRecord {
  long long t = 0;
  Strategy strategy;
  double loss = 0.0;            // true loss of the played strategy this round
  double expected_power = 0.0;  // sum_f rho_t(f) Pbar(f)
  double lambda = 0.0;
  double regret = 0.0;          // primary regret for the regime, cumulative
  double realized_regret = 0.0;
  double pseudo_regret = 0.0;   // NaN when the regime has no stationary means
  double violation = 0.0;       // [sum_s (expected power - P_o)]_+
  double ee = 0.0;              // running mean normalized gain per channel
};

struct RunResult {
  std::string policy;
  std::string regime;
  std::uint64_t seed = 0;
  long long n = 0;
  std::vector<RoundRecord> records;

  double realized_regret = 0.0;
  std::optional<double> pseudo_regret;
  double regret = 0.0;  // primary
  /// Unclamped sum of (expected power - P_o).
  double raw_violation = 0.0;
  double violation = 0.0;
  double mean_expected_power = 0.0;
  double max_lambda = 0.0;
  /// Sum over rounds of the played strategy's gain (k-channel sum, zero
  /// when the round was not used for access).
  double total_gain = 0.0;
  /// Best fixed strategy's total gain, counting every round.
  double hindsight_gain = 0.0;
  std::vector<long long> pulls;
  double mean_measured_m = 1.0;
  long long access_rounds = 0;
};

/// Rounds at which a record is kept: every round up to 1000, then a 1%
/// geometric grid that also hits every power of ten, plus the final round.
inline std::vector<long long> checkpoints(long long n) {
  std::vector<long long> out;
  for (long long t = 1; t <= std::min<long long>(n, 1000); ++t) out.push_back(t);
  long long t = 1000, decade = 10000;
  while (true) {
    t = std::max(t + 1, static_cast<long long>(std::ceil(static_cast<double>(t) * 1.01)));
    if (t > decade) t = decade;
    if (t == decade) decade *= 10;
    if (t >= n) break;
    out.push_back(t);
  }
  if (out.empty() || out.back() != n) out.push_back(n);
  return out;
}

/// Pseudo-regret sum_f N(f) gap(f).
inline double pseudo_regret(std::span<const long long> pulls, std::span<const double> mu) {
  const auto gaps = channel_gaps(mu);
  double r = 0.0;
  for (std::size_t f = 0; f < gaps.size(); ++f) r += static_cast<double>(pulls[f]) * gaps[f];
  return r;
}

/// Realized regret: played cumulative loss minus the best fixed strategy's.
inline double realized_regret(double played_loss, std::span<const double> cumulative_loss, int k) {
  return played_loss - hindsight_best(cumulative_loss, k).second;
}

/// [sum_t (p_t - P_o)]_+.
inline double compute_violation(std::span<const double> expected_power, double P_o) {
  double s = 0.0;
  for (double p : expected_power) s += p - P_o;
  return std::max(0.0, s);
}

inline std::vector<double> default_mu(const RunConfig& c) {
  if (!c.env.mu.empty()) return per_channel(c.env.mu, c.K);
  std::vector<double> mu(static_cast<std::size_t>(c.K), c.env.mu_best + c.env.gap);
  for (int f = 0; f < c.k; ++f) mu[static_cast<std::size_t>(f)] = c.env.mu_best;
  return mu;
}

inline std::vector<double> default_power(const RunConfig& c) {
  if (!c.env.power_mean.empty()) return per_channel(c.env.power_mean, c.K);
  const double best = c.env.power_best >= 0.0 ? c.env.power_best : 0.4 / c.k;
  const double other = c.env.power_other >= 0.0 ? c.env.power_other : 0.8 / c.k;
  std::vector<double> p(static_cast<std::size_t>(c.K), other);
  for (int f = 0; f < c.k; ++f) p[static_cast<std::size_t>(f)] = best;
  return p;
}

inline StochasticSpec make_base_spec(const RunConfig& c) {
  StochasticSpec s;
  s.k = c.k;
  s.power_mean = default_power(c);
  s.power_spread = c.env.power_spread >= 0.0 ? c.env.power_spread : 0.1 / c.k;
  if (c.env.generator == "bernoulli") {
    s.generator = LossGenerator::bernoulli;
    s.mu = default_mu(c);
  } else {
    s.generator = LossGenerator::ee_physical;
    const auto& p = c.physical;
    const auto pu = per_channel(p.pu_interference, c.K), jam = per_channel(p.jammer_interference, c.K),
               cross = per_channel(p.cross_su, c.K), gain = per_channel(p.gain, c.K), pc = per_channel(p.P_c, c.K),
               intr = per_channel(p.pr_interrupt, c.K);
    for (int f = 0; f < c.K; ++f) {
      const auto i = static_cast<std::size_t>(f);
      LinkParams l;
      l.W = p.W;
      l.theta_cap = p.theta_cap;
      l.noise_power = p.noise;
      l.pu_interference = pu[i];
      l.jammer_interference = jam[i];
      l.cross_su_interference = cross[i];
      l.gain_self = gain[i];
      l.P_c = pc[i];
      s.physical.links.push_back(l);
      s.physical.success.push_back(SuccessModel{intr[i]});
    }
    s.physical.power_scale = p.power_scale;
    s.physical.normalizer = p.normalizer;
    s.physical.fading.kind = p.fading == "rayleigh" ? FadingKind::rayleigh
                             : p.fading == "rician" ? FadingKind::rician
                                                    : FadingKind::none;
    s.physical.fading.rician_k = std::pow(10.0, p.rician_k_db / 10.0);
  }
  return s;
}

/// Seed streams: 1 environment, 2 learner, 3 jammer, 4 access coin.
inline std::uint64_t env_seed(std::uint64_t seed) { return derive_seed(seed, 1); }
inline std::uint64_t learner_seed(std::uint64_t seed) { return derive_seed(seed, 2); }
inline std::uint64_t jammer_seed(const RunConfig& c, std::uint64_t seed) {
  return c.jammer.seed ? *c.jammer.seed : derive_seed(seed, 3);
}
inline std::uint64_t access_seed(std::uint64_t seed) { return derive_seed(seed, 4); }

inline ObliviousJammerSpec make_oblivious(const RunConfig& c, std::uint64_t seed) {
  ObliviousJammerSpec j;
  j.attack_strength = per_channel(c.jammer.strength, c.K);
  j.seed = jammer_seed(c, seed);
  j.phase_length = c.jammer.phase_length;
  j.growth = c.jammer.growth;
  j.targets = c.jammer.targets >= 0 ? c.jammer.targets : c.K / 2;
  return j;
}

inline AdaptiveJammerSpec make_adaptive(const RunConfig& c) {
  AdaptiveJammerSpec j;
  j.theta = c.jammer.theta;
  j.j_channels = c.jammer.channels >= 0 ? c.jammer.channels : c.k;
  j.strength = c.jammer.strength.front();
  return j;
}

inline std::unique_ptr<Environment> build_environment(const RunConfig& c, std::uint64_t seed) {
  auto base = make_base_spec(c);
  const auto es = env_seed(seed);
  switch (c.regime) {
    case RegimeId::stochastic:
      return std::make_unique<StochasticEnv>(std::move(base), es);
    case RegimeId::adversarial:
      if (c.jammer.kind == "adaptive") return std::make_unique<AdaptiveEnv>(std::move(base), make_adaptive(c), es);
      return std::make_unique<ObliviousEnv>(std::move(base), make_oblivious(c, seed), es);
    case RegimeId::mixed: {
      MixedSpec m;
      m.base = std::move(base);
      m.jammed_set = c.jammed;
      m.kind = c.jammer.kind == "adaptive" ? JammerKind::adaptive : JammerKind::oblivious;
      m.oblivious = make_oblivious(c, seed);
      m.adaptive = make_adaptive(c);
      return std::make_unique<MixedEnv>(std::move(m), es);
    }
    case RegimeId::contaminated: {
      ContaminatedSpec s;
      s.base = std::move(base);
      s.zeta = c.zeta;
      s.tau0 = c.tau0;
      return std::make_unique<ContaminatedEnv>(std::move(s), es);
    }
  }
  throw ConfigError("regime", "unhandled regime");
}

inline PolicyConfig make_policy_config(const RunConfig& c) {
  PolicyConfig p;
  p.schedule.K = c.K;
  p.schedule.k = c.k;
  p.schedule.form = c.xi_form;
  p.schedule.c = c.c;
  p.P_o = c.P_o;
  p.eps_access = c.eps_access;
  switch (c.policy) {
    case PolicyId::aoeecc:
      p.schedule.mode = ExplorationMode::known_gap;
      p.known_gaps = channel_gaps(default_mu(c));
      break;
    case PolicyId::aoeecc_avg:
      p.schedule.mode = ExplorationMode::avg;
      break;
    case PolicyId::exp3:
    case PolicyId::combucb1:
      p = exp3_config(std::move(p));
      break;
  }
  return p;
}

inline std::unique_ptr<Learner> build_learner(const RunConfig& c) {
  if (c.policy == PolicyId::combucb1) return std::make_unique<CombUcb1Learner>(c.K, c.k);
  auto pc = make_policy_config(c);
  const auto name = to_string(c.policy);
  if (c.coop_M > 1) {
    return std::make_unique<CoopLearner>(std::move(pc), CoopConfig{c.coop_M, c.coop_m_lower_bound}, name);
  }
  std::unique_ptr<Learner> l = std::make_unique<AoeeccLearner>(std::move(pc), name);
  if (c.minibatch_tau != 0) {
    const int tau = c.minibatch_tau < 0 ? minibatch_size(c.K, c.k, c.n_rounds) : static_cast<int>(c.minibatch_tau);
    l = minibatch_wrap(std::move(l), tau);
  }
  return l;
}

namespace detail {

inline std::string dump(long long t, const Decision& d) {
  std::ostringstream os;
  os << "round " << t << ", played " << d.played.to_string() << ", rho [";
  for (std::size_t f = 0; f < d.rho.size(); ++f) os << (f ? " " : "") << d.rho[f];
  os << "]";
  return os.str();
}

inline void check_decision(long long t, const Decision& d, int K, int k) {
  if (!d.played.valid(K, k)) throw InvariantViolation("invalid strategy at " + dump(t, d));
  if (d.rho.size() != static_cast<std::size_t>(K)) throw InvariantViolation("marginal vector length at " + dump(t, d));
  double s = 0.0;
  for (double r : d.rho) {
    if (!(r >= -1e-12 && r <= 1.0 + 1e-9)) throw InvariantViolation("marginal outside [0, 1] at " + dump(t, d));
    s += r;
  }
  if (std::fabs(s - k) > 1e-6) throw InvariantViolation("marginals do not sum to k at " + dump(t, d));
  for (int f : d.played) {
    if (!(d.rho[static_cast<std::size_t>(f)] > 0.0)) {
      throw InvariantViolation("zero marginal on a played channel at " + dump(t, d));
    }
  }
}

}  // namespace detail

inline RunResult run_experiment(const RunConfig& c, std::uint64_t seed) {
  auto env = build_environment(c, seed);
  auto learner = build_learner(c);
  Rng rng(learner_seed(seed));
  SplitMix64 access_rng(access_seed(seed));

  const auto K = static_cast<std::size_t>(c.K);
  const auto Pbar = env->mean_power();
  const auto mu = env->mean_loss();
  const auto cps = checkpoints(c.n_rounds);
  std::size_t next_cp = 0;

  RunResult res;
  res.policy = learner->name();
  res.regime = to_string(c.regime);
  res.seed = seed;
  res.n = c.n_rounds;
  res.pulls.assign(K, 0);
  res.records.reserve(cps.size());

  std::vector<double> cum_loss(K, 0.0), cum_gain(K, 0.0);
  std::vector<double> fb_loss, fb_power;
  std::deque<Strategy> history_q;
  std::vector<Strategy> history;
  const auto memory = static_cast<std::size_t>(env->memory());
  double played_loss = 0.0, power_sum = 0.0;

  for (long long t = 1; t <= c.n_rounds; ++t) {
    const Decision& d = learner->decide(rng);
    detail::check_decision(t, d, c.K, c.k);
    const RoundOutcome out = env->step(t, history);

    const bool access = c.eps_access >= 1.0 || uniform01(access_rng) < c.eps_access;
    fb_loss.resize(d.observed.size());
    fb_power.resize(d.observed.size());
    for (std::size_t j = 0; j < d.observed.size(); ++j) {
      const auto f = static_cast<std::size_t>(d.observed[j]);
      fb_loss[j] = out.loss[f];
      fb_power[j] = out.power[f];
    }

    double round_loss = 0.0, round_gain = 0.0, p = 0.0;
    for (int f : d.played) {
      const auto i = static_cast<std::size_t>(f);
      round_loss += out.loss[i];
      ++res.pulls[i];
    }
    if (access) {
      round_gain = static_cast<double>(c.k) - round_loss;
      ++res.access_rounds;
    }
    for (std::size_t f = 0; f < K; ++f) {
      cum_loss[f] += out.loss[f];
      p += d.rho[f] * Pbar[f];
    }
    played_loss += round_loss;
    res.total_gain += round_gain;
    power_sum += p;
    res.raw_violation += p - c.P_o;

    const Strategy played = d.played;
    learner->learn(Feedback{d.observed, fb_loss, fb_power});
    res.max_lambda = std::max(res.max_lambda, learner->lambda());
    if (!std::isfinite(learner->lambda())) throw InvariantViolation("lambda is not finite at round " + std::to_string(t));

    if (memory > 0) {
      history_q.push_back(played);
      if (history_q.size() > memory) history_q.pop_front();
      history.assign(history_q.begin(), history_q.end());
    }

    if (next_cp < cps.size() && cps[next_cp] == t) {
      ++next_cp;
      RoundRecord r;
      r.t = t;
      r.strategy = played;
      r.loss = round_loss;
      r.expected_power = p;
      r.lambda = learner->lambda();
      r.realized_regret = realized_regret(played_loss, cum_loss, c.k);
      r.pseudo_regret = mu ? pseudo_regret(res.pulls, *mu) : std::nan("");
      r.regret = (mu && c.regime == RegimeId::stochastic) ? r.pseudo_regret : r.realized_regret;
      r.violation = std::max(0.0, res.raw_violation);
      r.ee = res.total_gain / (static_cast<double>(t) * c.k);
      res.records.push_back(std::move(r));
      log::debug("t=" + std::to_string(t) + " regret=" + std::to_string(res.records.back().regret));
    }
  }

  res.realized_regret = realized_regret(played_loss, cum_loss, c.k);
  if (mu) res.pseudo_regret = pseudo_regret(res.pulls, *mu);
  res.regret = (mu && c.regime == RegimeId::stochastic) ? *res.pseudo_regret : res.realized_regret;
  res.violation = std::max(0.0, res.raw_violation);
  res.mean_expected_power = power_sum / static_cast<double>(c.n_rounds);
  res.hindsight_gain = static_cast<double>(c.k) * static_cast<double>(c.n_rounds) -
                       hindsight_best(cum_loss, c.k).second;
  if (const auto* coop = dynamic_cast<const CoopLearner*>(learner.get())) res.mean_measured_m = coop->mean_measured_m();
  log::info(res.policy + "/" + res.regime + " seed " + std::to_string(seed) + ": regret " + std::to_string(res.regret) +
            ", violation " + std::to_string(res.violation));
  return res;
}

inline RunResult run_experiment(const RunConfig& c) { return run_experiment(c, c.seed); }

}  // namespace aoeecc
