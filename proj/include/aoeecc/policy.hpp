#pragma once

// AOEECC-EXP3++: exponential weights over k-subsets of channels mixed with
// per-channel forced exploration on a covering set, importance-weighted
// semi-bandit estimates of loss and power, and a projected dual step on the
// long-term power budget.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "aoeecc/learner.hpp"
#include "aoeecc/rng.hpp"
#include "aoeecc/schedule.hpp"
#include "aoeecc/subset_dp.hpp"

namespace aoeecc {

struct PolicyState {
  long long n = 0;                 // rounds completed
  std::vector<double> Ltilde;      // cumulative estimated loss
  std::vector<double> Gammatilde;  // cumulative estimated power
  std::vector<double> Psitilde;    // cumulative lambda-augmented loss
  double lambda = 0.0;
  std::vector<double> gap_hat;
  std::vector<double> last_marginals;
  double eps_access = 1.0;

  PolicyState() = default;
  PolicyState(int K, double eps)
      : Ltilde(static_cast<std::size_t>(K), 0.0),
        Gammatilde(static_cast<std::size_t>(K), 0.0),
        Psitilde(static_cast<std::size_t>(K), 0.0),
        gap_hat(static_cast<std::size_t>(K), 0.0),
        last_marginals(static_cast<std::size_t>(K), 0.0),
        eps_access(eps) {}
};

/// Per-channel feedback of one round, aligned by index with `channels`.
struct Observation {
  std::vector<int> channels;
  std::vector<double> loss;   // in [0, 1]
  std::vector<double> power;  // in [0, 1/k]
  bool transmitted = true;
};

struct PolicyConfig {
  ScheduleParams schedule;
  double P_o = 1.0;
  /// When false lambda stays at 0 and power never enters the weights.
  bool constrained = true;
  double eps_access = 1.0;
  /// True gaps, required in known_gap mode.
  std::vector<double> known_gaps;
};

struct Selection {
  Strategy strategy;
  std::vector<double> rho;
  Schedule schedule;
  bool from_covering = false;
};

/// Empirical gaps min{1, (L(f) - min L) / n}.
inline std::vector<double> estimate_gaps(std::span<const double> Ltilde, long long n) {
  if (n < 1) throw std::domain_error("gap estimate needs n >= 1");
  const double lo = *std::min_element(Ltilde.begin(), Ltilde.end());
  std::vector<double> g(Ltilde.size());
  for (std::size_t f = 0; f < g.size(); ++f) {
    g[f] = std::min(1.0, (Ltilde[f] - lo) / static_cast<double>(n));
  }
  return g;
}

inline std::vector<double> estimate_gaps(const PolicyState& s) { return estimate_gaps(s.Ltilde, s.n); }

/// Projected dual step: [(1 - d e sqrt(g)) lambda - e sqrt(g) (P_o - pP)]_+.
inline double update_lagrange(double lambda, const Schedule& s, double p_dot_P, double P_o) {
  const double step = s.eta * std::sqrt(s.gamma);
  return std::max(0.0, (1.0 - s.delta * step) * lambda - step * (P_o - p_dot_P));
}

inline bool access_decision(double eps_access, Rng& rng) {
  if (!(eps_access > 0.0 && eps_access <= 1.0)) {
    throw std::domain_error("access probability must lie in (0, 1]");
  }
  return uniform01(rng) < eps_access;
}

/// exp(-eta * Psi(f)) rescaled so the largest entry is 1.
inline std::vector<double> policy_weights(std::span<const double> Psitilde, double eta) {
  const double lo = *std::min_element(Psitilde.begin(), Psitilde.end());
  std::vector<double> w(Psitilde.size());
  for (std::size_t f = 0; f < w.size(); ++f) {
    w[f] = std::exp(std::max(-700.0, -eta * (Psitilde[f] - lo)));
  }
  return w;
}

/// Exploration mass of each covering strategy: the epsilons of the channels
/// it is home to. Sums to gamma.
inline std::vector<double> covering_mass(const CoveringSet& cover, std::span<const double> eps) {
  std::vector<double> mass(cover.size(), 0.0);
  for (std::size_t f = 0; f < eps.size(); ++f) mass[static_cast<std::size_t>(cover.home[f])] += eps[f];
  return mass;
}

/// Channel marginals of the mixture (1 - gamma) q + sum_{i in C} mass(i) 1{i}.
inline std::vector<double> mixture_marginals(std::span<const double> q_marginals, const CoveringSet& cover,
                                             std::span<const double> eps, double gamma) {
  std::vector<double> rho(q_marginals.size());
  for (std::size_t f = 0; f < rho.size(); ++f) rho[f] = (1.0 - gamma) * q_marginals[f];
  const auto mass = covering_mass(cover, eps);
  for (std::size_t b = 0; b < cover.size(); ++b) {
    for (int f : cover.strategies[b]) rho[static_cast<std::size_t>(f)] += mass[b];
  }
  return rho;
}

class AoeeccPolicy {
 public:
  explicit AoeeccPolicy(PolicyConfig cfg)
      : cfg_(std::move(cfg)),
        cover_(build_covering_set(cfg_.schedule.K, cfg_.schedule.k)),
        state_(cfg_.schedule.K, cfg_.eps_access) {
    const auto K = static_cast<std::size_t>(cfg_.schedule.K);
    if (cfg_.schedule.mode == ExplorationMode::known_gap && cfg_.known_gaps.size() != K) {
      throw std::invalid_argument("known-gap mode needs one true gap per channel");
    }
    if (!(cfg_.P_o >= 0.0 && cfg_.P_o <= 1.0)) throw std::domain_error("power budget must lie in [0, 1]");
    if (!(cfg_.eps_access > 0.0 && cfg_.eps_access <= 1.0)) {
      throw std::domain_error("access probability must lie in (0, 1]");
    }
  }

  const PolicyConfig& config() const { return cfg_; }
  const PolicyState& state() const { return state_; }
  const CoveringSet& covering() const { return cover_; }
  int K() const { return cfg_.schedule.K; }
  int k() const { return cfg_.schedule.k; }

  Schedule schedule() const {
    const long long n = state_.n + 1;
    switch (cfg_.schedule.mode) {
      case ExplorationMode::known_gap:
        return make_schedule(n, cfg_.schedule, cfg_.known_gaps);
      case ExplorationMode::avg:
        return make_schedule(n, cfg_.schedule, state_.gap_hat);
      case ExplorationMode::adversarial_only:
        break;
    }
    return make_schedule(n, cfg_.schedule, {});
  }

  /// Draws I_n from (1 - gamma) q + covering exploration and returns the
  /// exact channel marginals rho_n of that mixture.
  Selection select(Rng& rng) {
    Selection sel;
    sel.schedule = schedule();
    const auto& s = sel.schedule;
    if (s.gamma > 1.0) throw std::logic_error("exploration mass gamma exceeds 1");

    const auto w = policy_weights(state_.Psitilde, s.eta);
    dp_.reset_normalized(w, k());
    const auto q = dp_.marginals();
    sel.rho = mixture_marginals(q, cover_, s.eps, s.gamma);

    const double u = uniform01(rng);
    if (u < s.gamma) {
      const auto mass = covering_mass(cover_, s.eps);
      double acc = 0.0;
      std::size_t b = 0;
      for (; b + 1 < mass.size(); ++b) {
        acc += mass[b];
        if (u < acc) break;
      }
      sel.strategy = cover_.strategies[b];
      sel.from_covering = true;
    } else {
      sel.strategy = dp_.sample(rng);
    }
    state_.last_marginals = sel.rho;
    return sel;
  }

  /// Importance-weighted update. `obs_prob[f]` is the probability that
  /// channel f is observed this round (rho for a single learner).
  void update(const Selection& sel, const Observation& obs, std::span<const double> obs_prob) {
    const auto K = static_cast<std::size_t>(this->K());
    if (obs.loss.size() != obs.channels.size() || obs.power.size() != obs.channels.size()) {
      throw std::invalid_argument("observation vectors must align with channels");
    }
    const double lam = state_.lambda;
    double p_dot_P = 0.0;
    for (std::size_t j = 0; j < obs.channels.size(); ++j) {
      const auto f = static_cast<std::size_t>(obs.channels[j]);
      if (f >= K) throw std::out_of_range("observed channel out of range");
      const double pi = obs_prob[f];
      if (!(pi > 0.0)) {
        throw InvariantViolation("zero observation probability on observed channel " + std::to_string(f));
      }
      const double l_est = obs.loss[j] / pi;
      const double p_est = obs.power[j] / pi;
      state_.Ltilde[f] += l_est;
      state_.Gammatilde[f] += p_est;
      state_.Psitilde[f] += l_est + lam * p_est;
      p_dot_P += sel.rho[f] * p_est;
    }
    if (cfg_.constrained) {
      state_.lambda = update_lagrange(lam, sel.schedule, p_dot_P, cfg_.P_o);
    }
    ++state_.n;
    state_.gap_hat = estimate_gaps(state_);
  }

  void update(const Selection& sel, const Observation& obs) { update(sel, obs, sel.rho); }

 private:
  PolicyConfig cfg_;
  CoveringSet cover_;
  PolicyState state_;
  SubsetDp dp_;
};

/// Single-user driver around AoeeccPolicy.
class AoeeccLearner : public Learner {
 public:
  AoeeccLearner(PolicyConfig cfg, std::string name) : policy_(std::move(cfg)), name_(std::move(name)) {}

  const Decision& decide(Rng& rng) override {
    sel_ = policy_.select(rng);
    decision_.played = sel_.strategy;
    decision_.observed = sel_.strategy.channels();
    decision_.rho = sel_.rho;
    return decision_;
  }

  void learn(const Feedback& fb) override {
    obs_.channels.assign(fb.channels.begin(), fb.channels.end());
    obs_.loss.assign(fb.loss.begin(), fb.loss.end());
    obs_.power.assign(fb.power.begin(), fb.power.end());
    policy_.update(sel_, obs_);
  }

  double lambda() const override { return policy_.state().lambda; }
  std::string name() const override { return name_; }
  const AoeeccPolicy& policy() const { return policy_; }

 private:
  AoeeccPolicy policy_;
  std::string name_;
  Selection sel_;
  Decision decision_;
  Observation obs_;
};

/// Replays one decision of the inner learner for `tau` consecutive rounds
/// and feeds it the within-batch mean feedback once per batch.
class MinibatchLearner : public Learner {
 public:
  MinibatchLearner(std::unique_ptr<Learner> inner, int tau) : inner_(std::move(inner)), tau_(tau) {
    if (tau < 1) throw std::domain_error("mini-batch size must be >= 1");
  }

  const Decision& decide(Rng& rng) override {
    if (filled_ == 0) {
      decision_ = inner_->decide(rng);
      loss_sum_.assign(decision_.observed.size(), 0.0);
      power_sum_.assign(decision_.observed.size(), 0.0);
    }
    return decision_;
  }

  void learn(const Feedback& fb) override {
    for (std::size_t j = 0; j < loss_sum_.size(); ++j) {
      loss_sum_[j] += fb.loss[j];
      power_sum_[j] += fb.power[j];
    }
    if (++filled_ < tau_) return;
    for (std::size_t j = 0; j < loss_sum_.size(); ++j) {
      loss_sum_[j] /= tau_;
      power_sum_[j] /= tau_;
    }
    inner_->learn(Feedback{decision_.observed, loss_sum_, power_sum_});
    filled_ = 0;
  }

  double lambda() const override { return inner_->lambda(); }
  std::string name() const override { return inner_->name() + "+minibatch"; }
  int tau() const { return tau_; }

 private:
  std::unique_ptr<Learner> inner_;
  int tau_;
  int filled_ = 0;
  Decision decision_;
  std::vector<double> loss_sum_;
  std::vector<double> power_sum_;
};

inline std::unique_ptr<Learner> minibatch_wrap(std::unique_ptr<Learner> inner, int tau) {
  return std::make_unique<MinibatchLearner>(std::move(inner), tau);
}

/// Batch size (4k sqrt(K ln K))^{-1/3} n^{1/3}, rounded to the nearest
/// integer and at least 1.
inline int minibatch_size(int K, int k, long long n) {
  const double base = 4.0 * k * std::sqrt(K * std::log(static_cast<double>(K)));
  const double tau = std::pow(base, -1.0 / 3.0) * std::cbrt(static_cast<double>(n));
  return std::max(1, static_cast<int>(std::lround(tau)));
}

}  // namespace aoeecc
