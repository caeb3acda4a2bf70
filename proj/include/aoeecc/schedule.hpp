#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace aoeecc {

/// How the per-channel exploration knob xi_n(f) is chosen.
enum class ExplorationMode {
  known_gap,         // true gaps supplied by the caller
  avg,               // empirical gaps from the previous round
  adversarial_only,  // xi = +inf, plain combinatorial EXP3 exploration
};

/// Functional form of xi_n(f) in the gap-driven modes.
enum class XiForm {
  /// ln(n d^2) / (32 n d^2): the parameterization used in the experiments.
  experiment,
  /// known_gap: c ln(n d^2) / (n d^2); avg: c (ln n)^2 / (n d^2). Needs c >= 18.
  theory,
};

struct ScheduleParams {
  int K = 2;
  int k = 1;
  ExplorationMode mode = ExplorationMode::avg;
  XiForm form = XiForm::experiment;
  double c = 18.0;
  /// Lower bound on the cooperative probing rate; divides xi and delta.
  double m = 1.0;
};

struct Schedule {
  long long n = 0;
  double beta = 0.0;
  double eta = 0.0;
  double delta = 0.0;
  std::vector<double> xi;
  std::vector<double> eps;
  double gamma = 0.0;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

namespace detail {

// x(n, d) = scale * ln(n d^2) / (n d^2); +inf at the singularities.
inline double xi_log_gap(double scale, double n, double gap) {
  const double arg = n * gap * gap;
  if (!(gap > 0.0) || !(arg > 1.0)) return kInf;
  return scale * std::log(arg) / arg;
}

inline double xi_log_squared(double c, double n, double gap) {
  if (!(gap > 0.0) || !(n > 1.0)) return kInf;
  const double l = std::log(n);
  return c * l * l / (n * gap * gap);
}

}  // namespace detail

/// Round-n exploration schedule. `gaps` holds true gaps in known_gap mode and
/// the previous round's empirical gaps in avg mode; it is ignored otherwise.
inline Schedule make_schedule(long long n, const ScheduleParams& p, std::span<const double> gaps) {
  if (n < 1) throw std::domain_error("schedule round index must be >= 1");
  if (p.K < 2 || p.k < 1 || p.k > p.K) throw std::domain_error("schedule needs 2 <= K, 1 <= k <= K");
  if (!(p.m >= 1.0)) throw std::domain_error("probing rate bound m must be >= 1");
  if (p.mode != ExplorationMode::adversarial_only) {
    if (gaps.size() != static_cast<std::size_t>(p.K)) {
      throw std::invalid_argument("gap vector length must equal K");
    }
    if (p.form == XiForm::theory && p.c < 18.0) {
      throw std::domain_error("theory exploration schedule needs c >= 18");
    }
  }

  const double K = p.K;
  const double nd = static_cast<double>(n);
  const double lnK = std::log(K);

  Schedule s;
  s.n = n;
  s.beta = 0.5 * std::sqrt(lnK / (nd * K));
  s.eta = s.beta;
  s.delta = 2.0 * (p.k / p.m) * std::sqrt(K * lnK / nd);
  s.xi.assign(static_cast<std::size_t>(p.K), kInf);
  s.eps.resize(static_cast<std::size_t>(p.K));

  const double cap = 1.0 / (2.0 * K);
  for (std::size_t f = 0; f < s.xi.size(); ++f) {
    if (p.mode != ExplorationMode::adversarial_only) {
      const double g = gaps[f];
      if (p.form == XiForm::experiment) {
        s.xi[f] = detail::xi_log_gap(1.0 / 32.0, nd, g) / p.m;
      } else if (p.mode == ExplorationMode::known_gap) {
        s.xi[f] = detail::xi_log_gap(p.c, nd, g) / p.m;
      } else {
        s.xi[f] = detail::xi_log_squared(p.c, nd, g) / p.m;
      }
    }
    s.eps[f] = std::min({cap, s.beta, s.xi[f]});
    s.gamma += s.eps[f];
  }
  return s;
}

}  // namespace aoeecc
