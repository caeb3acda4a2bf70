#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "aoeecc/rng.hpp"
#include "aoeecc/subset_dp.hpp"

namespace aoeecc {

/// Raised when a numeric invariant of a learner or environment breaks.
class InvariantViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// What a learner commits to for one round.
struct Decision {
  /// Strategy used for transmission; the only one that counts for regret.
  Strategy played;
  /// Channels whose feedback the learner will read, ascending. Contains
  /// every channel of `played`.
  std::vector<int> observed;
  /// Inclusion probability of each channel in `played` (length K).
  std::vector<double> rho;
};

/// Semi-bandit feedback: loss and power for exactly the observed channels,
/// aligned with Decision::observed.
struct Feedback {
  std::span<const int> channels;
  std::span<const double> loss;
  std::span<const double> power;
};

/// Common driver interface for every channel-selection policy.
class Learner {
 public:
  virtual ~Learner() = default;

  virtual const Decision& decide(Rng& rng) = 0;
  virtual void learn(const Feedback& fb) = 0;

  /// Current Lagrange multiplier; 0 for policies without budget handling.
  virtual double lambda() const { return 0.0; }
  virtual std::string name() const = 0;
};

}  // namespace aoeecc
