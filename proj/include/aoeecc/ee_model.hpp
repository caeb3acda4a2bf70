#pragma once

// Energy-efficiency reward model. Rates are in nats/s (natural log),
// powers in W, times in s, EE in nats/J.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "aoeecc/rng.hpp"

namespace aoeecc {

struct LinkParams {
  double W = 1.0;                      // bandwidth
  double theta_cap = 1.0;              // capacity-gap factor
  double noise_power = 1.0;            // must be > 0
  double pu_interference = 0.0;
  double jammer_interference = 0.0;
  double cross_su_interference = 0.0;
  double gain_self = 1.0;
  double P_c = 0.0;                    // circuit and processing power
};

struct TimingParams {
  double t_s = 0.01;
  double t_p = 0.01;
  double t_a = 2.0;

  double t_sp() const { return t_s + t_p; }
  double alpha() const { return t_a / t_sp(); }
};

struct SuccessModel {
  double pr_interrupt = 0.0;  // probability the transmission is destroyed
};

inline double instant_rate(const LinkParams& link, double P_tx) {
  if (P_tx < 0.0) throw std::domain_error("transmit power must be nonnegative");
  const double denom =
      link.cross_su_interference + link.pu_interference + link.jammer_interference + link.noise_power;
  if (!(denom > 0.0)) throw std::domain_error("interference-plus-noise power must be positive");
  return link.W * std::log1p(link.theta_cap * P_tx * link.gain_self / denom);
}

inline double channel_ee(double rate, double P_c, double P_tx) {
  const double total = P_c + P_tx;
  if (!(total > 0.0)) throw std::domain_error("total consumed power must be positive");
  return rate / total;
}

/// Mean of the per-channel EEs of one strategy.
inline double strategy_ee(std::span<const double> per_channel_ee) {
  if (per_channel_ee.empty()) throw std::invalid_argument("strategy EE needs at least one channel");
  double s = 0.0;
  for (double v : per_channel_ee) s += v;
  return s / static_cast<double>(per_channel_ee.size());
}

/// Link-level EE of a strategy from its totals: sum of rates over sum of powers.
inline double aggregate_ee(std::span<const double> rates, std::span<const double> P_c,
                           std::span<const double> P_tx) {
  double r = 0.0, p = 0.0;
  for (std::size_t i = 0; i < rates.size(); ++i) {
    r += rates[i];
    p += P_c[i] + P_tx[i];
  }
  if (!(p > 0.0)) throw std::domain_error("total consumed power must be positive");
  return r / p;
}

/// Normalized reward g in [0, 1] fed to the learner.
inline double channel_gain(double ee_norm, const SuccessModel& success, bool transmitted) {
  if (!transmitted) return 0.0;
  return ee_norm * (1.0 - success.pr_interrupt);
}

/// Expected wall time of n rounds: n t_sp + eps n t_a.
inline double time_budget(long long n, double eps_access, const TimingParams& t) {
  const double nd = static_cast<double>(n);
  return nd * t.t_sp() + eps_access * nd * t.t_a;
}

/// Floor on the achieved EE rate of the eps-SPA scheme against an oblivious
/// jammer after n rounds.
inline double ee_lower_bound(double G_max, long long n, int K, int k, double eps_access,
                             const TimingParams& t) {
  if (n < 1) throw std::domain_error("EE bound needs n >= 1");
  const double Kd = K;
  const double slack = 4.0 * k * std::sqrt(Kd * std::log(Kd) / static_cast<double>(n));
  return (G_max - slack) / (1.0 / (t.alpha() * eps_access) + 1.0);
}

/// Same floor with imperfect sensing: each round succeeds with probability
/// 1 - P_fa, which shrinks the effective horizon T.
inline double ee_lower_bound_sensing(double G_max, double T, int K, int k, double eps_access,
                                     const TimingParams& t, double p_false_alarm) {
  const double Kd = K;
  const double a = t.alpha();
  const double slack = 4.0 * k *
                       std::sqrt((1.0 + a * eps_access) * t.t_sp() * Kd * std::log(Kd) /
                                 ((1.0 - p_false_alarm) * T));
  return (G_max - slack) / (1.0 / (a * eps_access) + 1.0);
}

/// Standard normal upper tail.
inline double q_function(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

/// Energy-detector false-alarm probability Q((ratio - 1) sqrt(t_s f_s)).
inline double false_alarm(double t_s, double f_s, double threshold_ratio) {
  if (!(t_s > 0.0) || !(f_s > 0.0)) throw std::domain_error("sensing time and bandwidth must be positive");
  return q_function((threshold_ratio - 1.0) * std::sqrt(t_s * f_s));
}

namespace detail {

// Expected EE rate of sense-probe-access with probing time t_p.
inline double spa_rate(double t_s, double t_p, double t_a, int K, int k, double eps, double T, double G) {
  const double a = t_a / (t_s + t_p);
  const double Kd = K;
  const double pen = 4.0 * k * std::sqrt((1.0 + a * eps) * (t_s + t_p) * Kd * std::log(Kd) / T);
  return (G - pen) / (1.0 / (a * eps) + 1.0);
}

// Expected EE rate of sense-access without probing; only eps n rates are observed.
inline double sa_rate(double t_s, double t_a, int K, int k, double eps, double T, double G) {
  const double a = t_a / t_s;
  const double Kd = K;
  const double pen = 4.0 * k * std::sqrt((1.0 + a * eps) * t_s * Kd * std::log(Kd) / (eps * T));
  return (G - pen) / (1.0 / (a * eps) + 1.0);
}

}  // namespace detail

struct CrossoverInputs {
  double t_s = 0.01;
  double t_a = 2.0;
  int K = 2;
  int k = 1;
  double eps = 1.0;
  double T = 1.0;
  double G_max = 1.0;
};

/// SPA-minus-SA expected throughput at probing time t_p. Positive means
/// probing pays off.
inline double probing_advantage(const CrossoverInputs& in, double t_p) {
  return detail::spa_rate(in.t_s, t_p, in.t_a, in.K, in.k, in.eps, in.T, in.G_max) -
         detail::sa_rate(in.t_s, in.t_a, in.K, in.k, in.eps, in.T, in.G_max);
}

/// Largest probing time for which SPA still matches SA, found by bisection
/// on (0, T). nullopt when the advantage does not change sign on that range.
inline std::optional<double> probing_crossover(const CrossoverInputs& in) {
  if (!(in.t_s > 0.0 && in.t_a > 0.0 && in.eps > 0.0 && in.T > 0.0) || in.K < 2 || in.k < 1) {
    throw std::domain_error("probing crossover needs positive inputs");
  }
  double lo = 0.0, hi = in.T;
  const double f_lo = probing_advantage(in, lo);
  const double f_hi = probing_advantage(in, hi);
  if (!(f_lo > 0.0) || !(f_hi < 0.0)) return std::nullopt;
  for (int it = 0; it < 400 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (probing_advantage(in, mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Small-scale fading of the self link gain.
enum class FadingKind { none, rayleigh, rician };

struct FadingModel {
  FadingKind kind = FadingKind::none;
  double rician_k = 4.0;  // linear direct-to-scattered power ratio

  /// Power gain draw with E[gain] = mean.
  template <class G>
  double draw(double mean, G& rng) const {
    switch (kind) {
      case FadingKind::none:
        return mean;
      case FadingKind::rayleigh:
        return -mean * std::log(1.0 - uniform01(rng));
      case FadingKind::rician: {
        const double los = std::sqrt(mean * rician_k / (rician_k + 1.0));
        const double sigma = std::sqrt(mean / (2.0 * (rician_k + 1.0)));
        const double u1 = 1.0 - uniform01(rng);
        const double u2 = uniform01(rng);
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double x = los + sigma * r * std::cos(2.0 * std::numbers::pi * u2);
        const double y = sigma * r * std::sin(2.0 * std::numbers::pi * u2);
        return x * x + y * y;
      }
    }
    return mean;
  }
};

/// Per-channel physical reward generator: EE of the round's link realization,
/// divided by the normalizer M and clamped to [0, 1], then discounted by the
/// interruption probability.
struct PhysicalChannelModel {
  std::vector<LinkParams> links;
  std::vector<SuccessModel> success;
  FadingModel fading;
  /// Watts per unit of normalized power; normalized power 1/k is P_max.
  double power_scale = 1.0;
  /// EE normalizer M. Zero means "derive from the links".
  double normalizer = 0.0;

  /// EE at the largest per-channel power with no interference, maximized
  /// over channels.
  double default_normalizer(int k) const {
    double m = 0.0;
    const double p_max = power_scale / k;
    for (const auto& l : links) {
      LinkParams clean = l;
      clean.pu_interference = clean.jammer_interference = clean.cross_su_interference = 0.0;
      m = std::max(m, channel_ee(instant_rate(clean, p_max), l.P_c, p_max));
    }
    return m;
  }

  /// Normalized gains for every channel given normalized powers in [0, 1/k].
  template <class G>
  std::vector<double> gains(std::span<const double> power_norm, int k, G& rng) const {
    const double M = normalizer > 0.0 ? normalizer : default_normalizer(k);
    std::vector<double> g(links.size());
    for (std::size_t f = 0; f < links.size(); ++f) {
      LinkParams l = links[f];
      l.gain_self = fading.draw(l.gain_self, rng);
      const double p_tx = power_norm[f] * power_scale;
      const double ee = (l.P_c + p_tx > 0.0) ? channel_ee(instant_rate(l, p_tx), l.P_c, p_tx) : 0.0;
      g[f] = channel_gain(std::clamp(ee / M, 0.0, 1.0), success[f], true);
    }
    return g;
  }
};

}  // namespace aoeecc
