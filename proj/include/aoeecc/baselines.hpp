#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "aoeecc/learner.hpp"
#include "aoeecc/policy.hpp"
#include "aoeecc/subset_dp.hpp"

namespace aoeecc {

/// Combinatorial EXP3 with uniform-over-covering exploration: the AOEECC
/// policy with xi = +inf and the multiplier pinned at zero.
inline PolicyConfig exp3_config(PolicyConfig cfg) {
  cfg.schedule.mode = ExplorationMode::adversarial_only;
  cfg.constrained = false;
  cfg.known_gaps.clear();
  return cfg;
}

inline std::unique_ptr<Learner> exp3_policy(PolicyConfig cfg) {
  return std::make_unique<AoeeccLearner>(exp3_config(std::move(cfg)), "exp3");
}

/// k channels with the smallest cumulative loss (ties to the lower index)
/// and their summed loss. Exact because strategy loss is channel-additive.
inline std::pair<Strategy, double> hindsight_best(std::span<const double> cumulative_loss, int k) {
  if (k < 0 || static_cast<std::size_t>(k) > cumulative_loss.size()) {
    throw std::domain_error("hindsight strategy size out of range");
  }
  std::vector<int> order(cumulative_loss.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return cumulative_loss[static_cast<std::size_t>(a)] < cumulative_loss[static_cast<std::size_t>(b)];
  });
  order.resize(static_cast<std::size_t>(k));
  std::sort(order.begin(), order.end());
  double value = 0.0;
  for (int f : order) value += cumulative_loss[static_cast<std::size_t>(f)];
  return {Strategy(std::move(order)), value};
}

struct UcbState {
  std::vector<long long> counts;
  std::vector<double> mean_loss;
  long long t = 0;  // rounds completed

  explicit UcbState(int K = 0)
      : counts(static_cast<std::size_t>(K), 0), mean_loss(static_cast<std::size_t>(K), 0.0) {}
};

/// Lower confidence index mu_hat(f) - sqrt(1.5 ln t / N(f)).
inline double combucb1_index(const UcbState& s, std::size_t f, long long t) {
  return s.mean_loss[f] - std::sqrt(1.5 * std::log(static_cast<double>(t)) / static_cast<double>(s.counts[f]));
}

/// Selection for round s.t + 1. While some channel is unobserved the
/// covering strategies are played in order.
inline Strategy combucb1_select(const UcbState& s, const CoveringSet& cover, int k) {
  const long long t = s.t + 1;
  for (std::size_t f = 0; f < s.counts.size(); ++f) {
    if (s.counts[f] == 0) return cover.strategies[static_cast<std::size_t>(cover.home[f])];
  }
  std::vector<int> order(s.counts.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> idx(s.counts.size());
  for (std::size_t f = 0; f < idx.size(); ++f) idx[f] = combucb1_index(s, f, t);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return idx[static_cast<std::size_t>(a)] < idx[static_cast<std::size_t>(b)]; });
  order.resize(static_cast<std::size_t>(k));
  std::sort(order.begin(), order.end());
  return Strategy(std::move(order));
}

/// Running-mean update on the played channels only.
inline void combucb1_update(UcbState& s, std::span<const int> channels, std::span<const double> loss) {
  for (std::size_t j = 0; j < channels.size(); ++j) {
    const auto f = static_cast<std::size_t>(channels[j]);
    ++s.counts[f];
    s.mean_loss[f] += (loss[j] - s.mean_loss[f]) / static_cast<double>(s.counts[f]);
  }
  ++s.t;
}

class CombUcb1Learner : public Learner {
 public:
  CombUcb1Learner(int K, int k) : k_(k), cover_(build_covering_set(K, k)), state_(K) {}

  const Decision& decide(Rng&) override {
    decision_.played = combucb1_select(state_, cover_, k_);
    decision_.observed = decision_.played.channels();
    decision_.rho.assign(state_.counts.size(), 0.0);
    for (int f : decision_.played) decision_.rho[static_cast<std::size_t>(f)] = 1.0;
    return decision_;
  }

  void learn(const Feedback& fb) override { combucb1_update(state_, fb.channels, fb.loss); }
  std::string name() const override { return "combucb1"; }
  const UcbState& state() const { return state_; }

 private:
  int k_;
  CoveringSet cover_;
  UcbState state_;
  Decision decision_;
};

}  // namespace aoeecc
