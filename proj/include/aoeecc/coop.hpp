#pragma once

// Cooperative learning: besides the played strategy, M - 1 further
// strategies drawn uniformly without replacement from the other N - 1 are
// probed and shared, and every observed channel is importance-weighted by its
// true observation probability.

#include <algorithm>
#include <cmath>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "aoeecc/learner.hpp"
#include "aoeecc/policy.hpp"
#include "aoeecc/rng.hpp"
#include "aoeecc/subset_dp.hpp"

namespace aoeecc {

/// C(n, r) in floating point; exact for the ranges used here.
inline double binomial(int n, int r) {
  if (r < 0 || r > n) return 0.0;
  r = std::min(r, n - r);
  double c = 1.0;
  for (int i = 1; i <= r; ++i) c = c * (n - r + i) / i;
  return std::round(c);
}

/// Strategy-level observation probability p + (1 - p)(M - 1)/(N - 1).
inline double strategy_obs_prob(double p, double M, double N) {
  if (N <= 1.0) return 1.0;
  return p + (1.0 - p) * (M - 1.0) / (N - 1.0);
}

/// Channel-level observation probability rho + (1 - rho)(m - 1)/(K - 1).
inline double channel_obs_prob(double rho, double m, int K) {
  return rho + (1.0 - rho) * (m - 1.0) / (K - 1.0);
}

/// Probability that a channel outside the played strategy is covered by at
/// least one of the M - 1 extras: 1 - C(A, M-1)/C(N-1, M-1), A = C(K-1,k) - 1.
inline double extra_coverage(int K, int k, long long M) {
  if (M <= 1) return 0.0;
  const double N = binomial(K, k);
  const double A = binomial(K - 1, k) - 1.0;
  double miss = 1.0;
  for (long long j = 0; j < M - 1; ++j) {
    const double num = A - static_cast<double>(j);
    if (num <= 0.0) return 1.0;
    miss *= num / (N - 1.0 - static_cast<double>(j));
  }
  return 1.0 - miss;
}

/// Probing rate m for which the channel-level mixture equals the exact
/// observation probability: (m - 1)/(K - 1) = extra_coverage.
inline double effective_probing_rate(int K, int k, long long M) {
  return 1.0 + (K - 1) * extra_coverage(K, k, M);
}

struct CoopConfig {
  long long M = 1;
  double m_lower_bound = 1.0;
};

struct ObservationSet {
  Strategy chosen;
  std::vector<Strategy> extras;
  std::vector<int> observed_channels;
  /// Per-round probing rate: 1 + (K - 1) * (share of channels outside the
  /// chosen strategy seen through extras). Its mean is the effective rate.
  double measured_m = 1.0;
};

/// Uniform k-subset via a partial Fisher-Yates shuffle.
template <class G>
Strategy uniform_strategy(int K, int k, G& rng) {
  std::vector<int> idx(static_cast<std::size_t>(K));
  for (int f = 0; f < K; ++f) idx[static_cast<std::size_t>(f)] = f;
  for (int i = 0; i < k; ++i) {
    const auto j = static_cast<std::size_t>(i) + uniform_index(rng, static_cast<std::uint64_t>(K - i));
    std::swap(idx[static_cast<std::size_t>(i)], idx[j]);
  }
  idx.resize(static_cast<std::size_t>(k));
  std::sort(idx.begin(), idx.end());
  return Strategy(std::move(idx));
}

/// Adds M - 1 distinct strategies, distinct from `chosen`, drawn by
/// rejection from uniform k-subsets.
template <class G>
ObservationSet coop_select(Strategy chosen, int K, int k, long long M, G& rng) {
  const double N = binomial(K, k);
  if (M < 1 || static_cast<double>(M) > N) throw std::domain_error("need 1 <= M <= C(K, k)");
  ObservationSet set;
  set.chosen = std::move(chosen);
  std::set<Strategy> seen{set.chosen};
  while (static_cast<long long>(seen.size()) < M) {
    Strategy s = uniform_strategy(K, k, rng);
    if (seen.insert(s).second) set.extras.push_back(std::move(s));
  }
  std::vector<char> mark(static_cast<std::size_t>(K), 0);
  for (int f : set.chosen) mark[static_cast<std::size_t>(f)] = 1;
  int via_extras = 0;
  for (const auto& s : set.extras) {
    for (int f : s) {
      if (!mark[static_cast<std::size_t>(f)]) {
        mark[static_cast<std::size_t>(f)] = 1;
        ++via_extras;
      }
    }
  }
  for (int f = 0; f < K; ++f) {
    if (mark[static_cast<std::size_t>(f)]) set.observed_channels.push_back(f);
  }
  set.measured_m = K > k ? 1.0 + (K - 1) * static_cast<double>(via_extras) / (K - k) : static_cast<double>(K);
  return set;
}

/// Policy learner with shared probes from M - 1 extra strategies.
class CoopLearner : public Learner {
 public:
  CoopLearner(PolicyConfig cfg, CoopConfig coop, std::string name)
      : policy_(with_rate_bound(std::move(cfg), coop.m_lower_bound)), coop_(coop), name_(std::move(name)) {
    const int K = policy_.K(), k = policy_.k();
    if (coop_.M < 1 || static_cast<double>(coop_.M) > binomial(K, k)) {
      throw std::domain_error("coop.M must lie in [1, C(K, k)]");
    }
    m_eff_ = effective_probing_rate(K, k, coop_.M);
    if (coop_.m_lower_bound > m_eff_ + 1e-9) {
      throw std::domain_error("coop.m_lower_bound exceeds the probing rate reachable with this M");
    }
    obs_prob_.resize(static_cast<std::size_t>(K));
  }

  const Decision& decide(Rng& rng) override {
    sel_ = policy_.select(rng);
    set_ = coop_select(sel_.strategy, policy_.K(), policy_.k(), coop_.M, rng);
    decision_.played = sel_.strategy;
    decision_.observed = set_.observed_channels;
    decision_.rho = sel_.rho;
    measured_m_sum_ += set_.measured_m;
    if (set_.measured_m < coop_.m_lower_bound) ++rounds_below_bound_;
    ++rounds_;
    return decision_;
  }

  void learn(const Feedback& fb) override {
    for (std::size_t f = 0; f < obs_prob_.size(); ++f) {
      obs_prob_[f] = channel_obs_prob(sel_.rho[f], m_eff_, policy_.K());
    }
    obs_.channels.assign(fb.channels.begin(), fb.channels.end());
    obs_.loss.assign(fb.loss.begin(), fb.loss.end());
    obs_.power.assign(fb.power.begin(), fb.power.end());
    policy_.update(sel_, obs_, obs_prob_);
  }

  double lambda() const override { return policy_.state().lambda; }
  std::string name() const override { return name_; }

  const AoeeccPolicy& policy() const { return policy_; }
  const ObservationSet& last_set() const { return set_; }
  double effective_m() const { return m_eff_; }
  double mean_measured_m() const { return rounds_ ? measured_m_sum_ / static_cast<double>(rounds_) : 1.0; }
  long long rounds_below_bound() const { return rounds_below_bound_; }

 private:
  static PolicyConfig with_rate_bound(PolicyConfig cfg, double m) {
    cfg.schedule.m = m;
    return cfg;
  }

  AoeeccPolicy policy_;
  CoopConfig coop_;
  std::string name_;
  double m_eff_ = 1.0;
  Selection sel_;
  ObservationSet set_;
  Decision decision_;
  Observation obs_;
  std::vector<double> obs_prob_;
  double measured_m_sum_ = 0.0;
  long long rounds_below_bound_ = 0;
  long long rounds_ = 0;
};

}  // namespace aoeecc
