#pragma once

// Exact representation of the product-form distribution over k-subsets of
// K channels, q(S) = prod_{f in S} w(f) / e_k(w), without enumerating the
// C(K, k) subsets. Everything here runs in O(K * k).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "aoeecc/rng.hpp"

namespace aoeecc {

/// A channel access action: k distinct channel indices in increasing order.
class Strategy {
 public:
  Strategy() = default;
  explicit Strategy(std::vector<int> channels) : channels_(std::move(channels)) {}

  const std::vector<int>& channels() const { return channels_; }
  std::size_t size() const { return channels_.size(); }
  int operator[](std::size_t i) const { return channels_[i]; }
  auto begin() const { return channels_.begin(); }
  auto end() const { return channels_.end(); }

  bool contains(int f) const {
    return std::binary_search(channels_.begin(), channels_.end(), f);
  }

  /// Checks the k-subset invariants against (K, k).
  bool valid(int K, int k) const {
    if (static_cast<int>(channels_.size()) != k) return false;
    for (std::size_t i = 0; i < channels_.size(); ++i) {
      if (channels_[i] < 0 || channels_[i] >= K) return false;
      if (i > 0 && channels_[i] <= channels_[i - 1]) return false;
    }
    return true;
  }

  std::string to_string() const {
    std::string s = "{";
    for (std::size_t i = 0; i < channels_.size(); ++i) {
      if (i) s += ' ';
      s += std::to_string(channels_[i]);
    }
    return s + "}";
  }

  friend bool operator==(const Strategy&, const Strategy&) = default;
  friend auto operator<=>(const Strategy&, const Strategy&) = default;

 private:
  std::vector<int> channels_;
};

class DegenerateWeights : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

namespace detail {

inline void check_weights(std::span<const double> w) {
  for (double x : w) {
    if (!std::isfinite(x) || !(x > 0.0)) {
      throw DegenerateWeights("weights must be finite and positive");
    }
  }
}

inline void check_k(std::size_t K, int k) {
  if (k < 0 || static_cast<std::size_t>(k) > K) {
    throw std::domain_error("subset size " + std::to_string(k) + " outside [0, " +
                            std::to_string(K) + "]");
  }
}

}  // namespace detail

/// e_j(w): sum over all j-subsets of the product of their weights.
inline long double elementary_symmetric_ld(std::span<const double> w, int j) {
  detail::check_k(w.size(), j);
  std::vector<long double> e(static_cast<std::size_t>(j) + 1, 0.0L);
  e[0] = 1.0L;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const std::size_t top = std::min<std::size_t>(i + 1, static_cast<std::size_t>(j));
    for (std::size_t r = top; r >= 1; --r) e[r] += w[i] * e[r - 1];
  }
  return e[static_cast<std::size_t>(j)];
}

inline double elementary_symmetric(std::span<const double> w, int j) {
  return static_cast<double>(elementary_symmetric_ld(w, j));
}

/// Caller-owned DP scratch for one weight vector and one subset size.
///
/// suffix(i, j) = e_j(w_i, ..., w_{K-1}) drives sequential sampling and the
/// normalizer; prefix(i, j) = e_j(w_0, ..., w_{i-1}) combines with the suffix
/// table to give every inclusion marginal in O(K * k) total.
class SubsetDp {
 public:
  SubsetDp() = default;
  SubsetDp(std::span<const double> w, int k) { reset(w, k); }

  void reset(std::span<const double> w, int k) {
    detail::check_weights(w);
    detail::check_k(w.size(), k);
    w_.assign(w.begin(), w.end());
    K_ = static_cast<int>(w.size());
    k_ = k;
    const std::size_t cols = static_cast<std::size_t>(k) + 1;
    suffix_.assign((static_cast<std::size_t>(K_) + 1) * cols, 0.0L);
    suffix_[idx(K_, 0)] = 1.0L;
    for (int i = K_ - 1; i >= 0; --i) {
      suffix_[idx(i, 0)] = 1.0L;
      for (int j = 1; j <= k; ++j) {
        suffix_[idx(i, j)] = suffix_[idx(i + 1, j)] + w_[i] * suffix_[idx(i + 1, j - 1)];
      }
    }
    prefix_ready_ = false;
    if (!(normalizer() > 0.0L) || !std::isfinite(static_cast<double>(normalizer()))) {
      throw DegenerateWeights("e_k(w) is zero or not finite");
    }
  }

  /// reset() for weights normalized to max 1, as the policy always supplies.
  void reset_normalized(std::span<const double> w, int k) {
    const double mx = w.empty() ? 1.0 : *std::max_element(w.begin(), w.end());
    if (mx > 1.0 + 1e-12) {
      throw std::logic_error("policy weights must be normalized to max 1");
    }
    reset(w, k);
  }

  int K() const { return K_; }
  int k() const { return k_; }
  long double normalizer() const { return suffix_[idx(0, k_)]; }

  double strategy_prob(const Strategy& s) const {
    if (!s.valid(K_, k_)) throw std::invalid_argument("invalid strategy " + s.to_string());
    long double p = 1.0L;
    for (int f : s) p *= w_[f];
    return static_cast<double>(p / normalizer());
  }

  /// Inclusion probability of every channel under q. Sums to k.
  std::vector<double> marginals() {
    std::vector<double> out(static_cast<std::size_t>(K_));
    marginals(out);
    return out;
  }

  void marginals(std::span<double> out) {
    build_prefix();
    const long double z = normalizer();
    for (int f = 0; f < K_; ++f) {
      long double acc = 0.0L;
      for (int a = 0; a <= k_ - 1; ++a) {
        acc += prefix_[idx(f, a)] * suffix_[idx(f + 1, k_ - 1 - a)];
      }
      out[static_cast<std::size_t>(f)] = static_cast<double>(w_[f] * acc / z);
    }
  }

  /// Draws a k-subset with probability exactly strategy_prob(). Channels are
  /// visited in ascending order; channel i enters with probability
  /// w_i * e_{j-1}(w_{i+1..}) / e_j(w_{i..}) where j slots remain open.
  Strategy sample(Rng& rng) const {
    std::vector<int> chosen;
    chosen.reserve(static_cast<std::size_t>(k_));
    int open = k_;
    for (int i = 0; i < K_ && open > 0; ++i) {
      if (K_ - i == open) {
        for (int r = i; r < K_; ++r) chosen.push_back(r);
        break;
      }
      const long double p_in =
          w_[i] * suffix_[idx(i + 1, open - 1)] / suffix_[idx(i, open)];
      if (uniform01(rng) < static_cast<double>(p_in)) {
        chosen.push_back(i);
        --open;
      }
    }
    return Strategy(std::move(chosen));
  }

 private:
  std::size_t idx(int i, int j) const {
    return static_cast<std::size_t>(i) * (static_cast<std::size_t>(k_) + 1) +
           static_cast<std::size_t>(j);
  }

  void build_prefix() {
    if (prefix_ready_) return;
    prefix_.assign(suffix_.size(), 0.0L);
    prefix_[idx(0, 0)] = 1.0L;
    for (int i = 1; i <= K_; ++i) {
      prefix_[idx(i, 0)] = 1.0L;
      for (int j = 1; j <= k_; ++j) {
        prefix_[idx(i, j)] = prefix_[idx(i - 1, j)] + w_[i - 1] * prefix_[idx(i - 1, j - 1)];
      }
    }
    prefix_ready_ = true;
  }

  std::vector<double> w_;
  int K_ = 0;
  int k_ = 0;
  std::vector<long double> suffix_;
  std::vector<long double> prefix_;
  bool prefix_ready_ = false;
};

inline double strategy_prob(std::span<const double> w, const Strategy& s, int k) {
  return SubsetDp(w, k).strategy_prob(s);
}

inline std::vector<double> marginals(std::span<const double> w, int k) {
  SubsetDp dp(w, k);
  return dp.marginals();
}

inline Strategy sample_strategy(std::span<const double> w, int k, Rng& rng) {
  return SubsetDp(w, k).sample(rng);
}

/// ceil(K/k) strategies jointly containing every channel. Blocks are
/// consecutive runs of k channels; a short last block is padded with the
/// lowest-index channels it lacks. home[f] is the block that owns f's slot.
struct CoveringSet {
  std::vector<Strategy> strategies;
  std::vector<int> home;

  std::size_t size() const { return strategies.size(); }
};

inline CoveringSet build_covering_set(int K, int k) {
  if (k < 1 || k > K) throw std::domain_error("covering set needs 1 <= k <= K");
  CoveringSet c;
  const int blocks = (K + k - 1) / k;
  c.home.resize(static_cast<std::size_t>(K));
  for (int b = 0; b < blocks; ++b) {
    std::vector<int> members;
    for (int f = b * k; f < std::min(K, (b + 1) * k); ++f) {
      members.push_back(f);
      c.home[static_cast<std::size_t>(f)] = b;
    }
    for (int f = 0; static_cast<int>(members.size()) < k; ++f) {
      if (std::find(members.begin(), members.end(), f) == members.end()) members.push_back(f);
    }
    std::sort(members.begin(), members.end());
    c.strategies.emplace_back(std::move(members));
  }
  return c;
}

}  // namespace aoeecc
