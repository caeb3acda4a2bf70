#pragma once

// Run configuration: a flat text file of `dotted.key = value` lines. Lists
// are comma separated; `#` starts a comment; unknown keys are rejected.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "aoeecc/ee_model.hpp"
#include "aoeecc/schedule.hpp"

namespace aoeecc {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& msg)
      : std::runtime_error(field.empty() ? msg : field + ": " + msg), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class PolicyId { aoeecc, aoeecc_avg, exp3, combucb1 };
enum class RegimeId { stochastic, adversarial, mixed, contaminated };

inline std::string to_string(PolicyId p) {
  switch (p) {
    case PolicyId::aoeecc: return "aoeecc";
    case PolicyId::aoeecc_avg: return "aoeecc-avg";
    case PolicyId::exp3: return "exp3";
    case PolicyId::combucb1: return "combucb1";
  }
  return "?";
}

inline std::string to_string(RegimeId r) {
  switch (r) {
    case RegimeId::stochastic: return "stochastic";
    case RegimeId::adversarial: return "adversarial";
    case RegimeId::mixed: return "mixed";
    case RegimeId::contaminated: return "contaminated";
  }
  return "?";
}

struct EnvConfig {
  std::string generator = "bernoulli";  // bernoulli | ee-physical
  std::vector<double> mu;               // empty: first k channels mu_best, rest mu_best + gap
  double mu_best = 0.3;
  double gap = 0.2;
  std::vector<double> power_mean;       // empty: best channels power_best, rest power_other
  double power_best = -1.0;             // negative: 0.4/k
  double power_other = -1.0;            // negative: 0.8/k
  double power_spread = -1.0;           // negative: 0.1/k
};

struct JammerConfig {
  std::string kind = "oblivious";  // oblivious | adaptive
  std::vector<double> strength{0.5};
  std::optional<std::uint64_t> seed;
  long long phase_length = 2000;
  double growth = 1.0;
  int targets = -1;  // negative: K/2
  int theta = 5;
  int channels = -1;  // negative: k
};

struct PhysicalConfig {
  double W = 1.0;
  double theta_cap = 1.0;
  double noise = 1.0;
  std::vector<double> pu_interference{0.0};
  std::vector<double> jammer_interference{0.0};
  std::vector<double> cross_su{0.0};
  std::vector<double> gain{10.0};
  std::vector<double> P_c{0.5};
  double power_scale = 1.0;
  std::vector<double> pr_interrupt{0.0};
  std::string fading = "none";  // none | rayleigh | rician
  double rician_k_db = 6.0;
  double normalizer = 0.0;
};

struct RunConfig {
  int K = 8;
  int k = 2;
  long long n_rounds = 1000;
  std::uint64_t seed = 1;
  PolicyId policy = PolicyId::aoeecc_avg;
  RegimeId regime = RegimeId::stochastic;
  double P_o = 0.5;
  double eps_access = 1.0;
  std::string output;

  XiForm xi_form = XiForm::experiment;
  double c = 18.0;

  long long coop_M = 1;
  double coop_m_lower_bound = 1.0;

  /// 0 = off, -1 = size from the horizon.
  long long minibatch_tau = 0;

  EnvConfig env;
  JammerConfig jammer;
  std::vector<int> jammed{0};
  double zeta = 0.25;
  long long tau0 = 0;
  PhysicalConfig physical;
  TimingParams timing;
};

/// Raw key-value view with line numbers for diagnostics.
class ConfigText {
 public:
  static ConfigText parse(std::istream& in, const std::string& origin = "<config>") {
    ConfigText t;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      const auto s = trim(line);
      if (s.empty()) continue;
      const auto eq = s.find('=');
      if (eq == std::string::npos) {
        throw ConfigError(origin + ":" + std::to_string(lineno), "expected 'key = value'");
      }
      const auto key = trim(s.substr(0, eq));
      const auto value = trim(s.substr(eq + 1));
      if (key.empty()) throw ConfigError(origin + ":" + std::to_string(lineno), "empty key");
      if (t.values_.count(key)) throw ConfigError(key, "duplicate key (line " + std::to_string(lineno) + ")");
      t.values_[key] = value;
    }
    return t;
  }

  static ConfigText parse_string(const std::string& text) {
    std::istringstream in(text);
    return parse(in);
  }

  static ConfigText load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file '" + path + "'");
    return parse(in, path);
  }

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  const std::map<std::string, std::string>& values() const { return values_; }

  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

 private:
  std::map<std::string, std::string> values_;
};

namespace detail {

inline double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size() || !std::isfinite(d)) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError(key, "expected a real number, got '" + v + "'");
  }
}

inline long long parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long i = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (const std::exception&) {
    // Accept integral reals such as 1e5.
    const double d = parse_double(key, v);
    if (d != std::floor(d) || std::fabs(d) > 9e18) throw ConfigError(key, "expected an integer, got '" + v + "'");
    return static_cast<long long>(d);
  }
}

inline std::vector<double> parse_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(key, ConfigText::trim(item)));
  if (out.empty()) throw ConfigError(key, "empty list");
  return out;
}

}  // namespace detail

/// Builds a RunConfig, consuming every key. Throws ConfigError naming the
/// offending field.
inline RunConfig build_config(const ConfigText& text) {
  RunConfig c;
  std::map<std::string, std::string> left = text.values();

  auto take = [&](const std::string& key) -> std::optional<std::string> {
    auto it = left.find(key);
    if (it == left.end()) return std::nullopt;
    std::string v = it->second;
    left.erase(it);
    return v;
  };
  auto real = [&](const std::string& key, double& dst) {
    if (auto v = take(key)) dst = detail::parse_double(key, *v);
  };
  auto integer = [&](const std::string& key, auto& dst) {
    if (auto v = take(key)) dst = static_cast<std::remove_reference_t<decltype(dst)>>(detail::parse_int(key, *v));
  };
  auto list = [&](const std::string& key, std::vector<double>& dst) {
    if (auto v = take(key)) dst = detail::parse_list(key, *v);
  };
  auto word = [&](const std::string& key, std::string& dst) {
    if (auto v = take(key)) dst = *v;
  };

  integer("K", c.K);
  integer("k", c.k);
  integer("n_rounds", c.n_rounds);
  if (auto v = take("seed")) c.seed = static_cast<std::uint64_t>(detail::parse_int("seed", *v));
  if (auto v = take("policy")) {
    if (*v == "aoeecc") c.policy = PolicyId::aoeecc;
    else if (*v == "aoeecc-avg") c.policy = PolicyId::aoeecc_avg;
    else if (*v == "exp3") c.policy = PolicyId::exp3;
    else if (*v == "combucb1") c.policy = PolicyId::combucb1;
    else throw ConfigError("policy", "unknown policy '" + *v + "' (aoeecc | aoeecc-avg | exp3 | combucb1)");
  }
  if (auto v = take("regime")) {
    if (*v == "stochastic") c.regime = RegimeId::stochastic;
    else if (*v == "adversarial") c.regime = RegimeId::adversarial;
    else if (*v == "mixed") c.regime = RegimeId::mixed;
    else if (*v == "contaminated") c.regime = RegimeId::contaminated;
    else throw ConfigError("regime", "unknown regime '" + *v + "' (stochastic | adversarial | mixed | contaminated)");
  }
  real("P_o", c.P_o);
  real("eps_access", c.eps_access);
  word("output", c.output);

  if (auto v = take("schedule.xi")) {
    if (*v == "experiment") c.xi_form = XiForm::experiment;
    else if (*v == "theory") c.xi_form = XiForm::theory;
    else throw ConfigError("schedule.xi", "expected 'experiment' or 'theory'");
  }
  real("schedule.c", c.c);

  integer("coop.M", c.coop_M);
  real("coop.m_lower_bound", c.coop_m_lower_bound);
  if (auto v = take("minibatch.tau")) {
    c.minibatch_tau = (*v == "auto") ? -1 : detail::parse_int("minibatch.tau", *v);
  }

  word("env.generator", c.env.generator);
  list("env.mu", c.env.mu);
  real("env.mu_best", c.env.mu_best);
  real("env.gap", c.env.gap);
  list("env.power_mean", c.env.power_mean);
  real("env.power_best", c.env.power_best);
  real("env.power_other", c.env.power_other);
  real("env.power_spread", c.env.power_spread);

  word("jammer.kind", c.jammer.kind);
  list("jammer.strength", c.jammer.strength);
  if (auto v = take("jammer.seed")) c.jammer.seed = static_cast<std::uint64_t>(detail::parse_int("jammer.seed", *v));
  integer("jammer.phase_length", c.jammer.phase_length);
  real("jammer.growth", c.jammer.growth);
  integer("jammer.targets", c.jammer.targets);
  integer("jammer.theta", c.jammer.theta);
  integer("jammer.channels", c.jammer.channels);

  if (auto v = take("mixed.jammed")) {
    c.jammed.clear();
    for (double d : detail::parse_list("mixed.jammed", *v)) {
      if (d != std::floor(d)) throw ConfigError("mixed.jammed", "channel ids must be integers");
      c.jammed.push_back(static_cast<int>(d));
    }
  }
  real("contam.zeta", c.zeta);
  integer("contam.tau0", c.tau0);

  real("ee.W", c.physical.W);
  real("ee.theta_cap", c.physical.theta_cap);
  real("ee.noise", c.physical.noise);
  list("ee.pu_interference", c.physical.pu_interference);
  list("ee.jammer_interference", c.physical.jammer_interference);
  list("ee.cross_su", c.physical.cross_su);
  list("ee.gain", c.physical.gain);
  list("ee.P_c", c.physical.P_c);
  real("ee.power_scale", c.physical.power_scale);
  list("ee.pr_interrupt", c.physical.pr_interrupt);
  word("ee.fading", c.physical.fading);
  real("ee.rician_k_db", c.physical.rician_k_db);
  real("ee.normalizer", c.physical.normalizer);

  real("timing.t_s", c.timing.t_s);
  real("timing.t_p", c.timing.t_p);
  real("timing.t_a", c.timing.t_a);

  if (!left.empty()) throw ConfigError(left.begin()->first, "unknown key");
  return c;
}

namespace detail {

inline void check_list(const std::string& key, const std::vector<double>& v, int K) {
  if (v.size() != 1 && v.size() != static_cast<std::size_t>(K)) {
    throw ConfigError(key, "expected 1 or K=" + std::to_string(K) + " values, got " + std::to_string(v.size()));
  }
}

}  // namespace detail

/// Broadcasts a scalar-or-K list to K entries.
inline std::vector<double> per_channel(const std::vector<double>& v, int K) {
  if (v.size() == 1) return std::vector<double>(static_cast<std::size_t>(K), v[0]);
  return v;
}

/// Semantic checks beyond parsing.
inline void validate(const RunConfig& c) {
  if (c.K < 2) throw ConfigError("K", "need at least 2 channels");
  if (c.k < 1 || c.k > c.K) throw ConfigError("k", "need 1 <= k <= K");
  if (c.n_rounds < 1) throw ConfigError("n_rounds", "need at least one round");
  if (!(c.P_o >= 0.0 && c.P_o <= 1.0)) throw ConfigError("P_o", "budget must lie in [0, 1]");
  if (!(c.eps_access > 0.0 && c.eps_access <= 1.0)) throw ConfigError("eps_access", "must lie in (0, 1]");
  if (c.xi_form == XiForm::theory && c.c < 18.0) throw ConfigError("schedule.c", "theory schedule needs c >= 18");
  if (c.coop_M < 1) throw ConfigError("coop.M", "must be >= 1");
  if (!(c.coop_m_lower_bound >= 1.0)) throw ConfigError("coop.m_lower_bound", "must be >= 1");
  if (c.minibatch_tau < -1) throw ConfigError("minibatch.tau", "must be 'auto', 0 or a positive integer");
  if (c.policy == PolicyId::combucb1 && (c.coop_M != 1 || c.minibatch_tau != 0)) {
    throw ConfigError("policy", "combucb1 runs without coop or mini-batching");
  }
  if (c.coop_M != 1 && c.minibatch_tau != 0) {
    throw ConfigError("minibatch.tau", "mini-batching is not combined with cooperative probing");
  }
  if (c.env.generator != "bernoulli" && c.env.generator != "ee-physical") {
    throw ConfigError("env.generator", "expected 'bernoulli' or 'ee-physical'");
  }
  if (!c.env.mu.empty()) detail::check_list("env.mu", c.env.mu, c.K);
  for (double m : c.env.mu) {
    if (!(m >= 0.0 && m <= 1.0)) throw ConfigError("env.mu", "expected losses must lie in [0, 1]");
  }
  if (!(c.env.mu_best >= 0.0 && c.env.mu_best + c.env.gap <= 1.0 && c.env.gap >= 0.0)) {
    throw ConfigError("env.gap", "mu_best and mu_best + gap must lie in [0, 1]");
  }
  if (!c.env.power_mean.empty()) detail::check_list("env.power_mean", c.env.power_mean, c.K);
  const double pmax = 1.0 / c.k + 1e-12;
  for (double p : c.env.power_mean) {
    if (!(p >= 0.0 && p <= pmax)) throw ConfigError("env.power_mean", "per-channel power must lie in [0, 1/k]");
  }
  if (c.env.power_best > pmax) throw ConfigError("env.power_best", "per-channel power must lie in [0, 1/k]");
  if (c.env.power_other > pmax) throw ConfigError("env.power_other", "per-channel power must lie in [0, 1/k]");
  if (c.jammer.kind != "oblivious" && c.jammer.kind != "adaptive") {
    throw ConfigError("jammer.kind", "expected 'oblivious' or 'adaptive'");
  }
  detail::check_list("jammer.strength", c.jammer.strength, c.K);
  for (double s : c.jammer.strength) {
    if (!(s >= 0.0 && s <= 1.0)) throw ConfigError("jammer.strength", "must lie in [0, 1]");
  }
  if (c.jammer.phase_length < 1) throw ConfigError("jammer.phase_length", "must be >= 1");
  if (!(c.jammer.growth >= 1.0)) throw ConfigError("jammer.growth", "must be >= 1");
  if (c.jammer.targets > c.K) throw ConfigError("jammer.targets", "cannot exceed K");
  if (c.jammer.theta < 1) throw ConfigError("jammer.theta", "must be >= 1");
  if (c.jammer.channels > c.K) throw ConfigError("jammer.channels", "cannot exceed K");
  if (c.regime == RegimeId::mixed) {
    if (static_cast<int>(c.jammed.size()) > c.k) throw ConfigError("mixed.jammed", "at most k channels can be jammed");
    for (int f : c.jammed) {
      if (f < 0 || f >= c.K) throw ConfigError("mixed.jammed", "channel id out of range");
    }
  }
  if (!(c.zeta >= 0.0 && c.zeta < 0.5)) throw ConfigError("contam.zeta", "must lie in [0, 1/2)");
  if (c.tau0 < 0) throw ConfigError("contam.tau0", "must be >= 0");
  if (c.env.generator == "ee-physical") {
    if (c.regime == RegimeId::contaminated) {
      throw ConfigError("env.generator", "contamination needs the bernoulli generator (known gaps)");
    }
    if (c.policy == PolicyId::aoeecc) throw ConfigError("policy", "known-gap policy needs the bernoulli generator");
    const auto& p = c.physical;
    if (!(p.noise > 0.0)) throw ConfigError("ee.noise", "must be positive");
    detail::check_list("ee.pu_interference", p.pu_interference, c.K);
    detail::check_list("ee.jammer_interference", p.jammer_interference, c.K);
    detail::check_list("ee.cross_su", p.cross_su, c.K);
    detail::check_list("ee.gain", p.gain, c.K);
    detail::check_list("ee.P_c", p.P_c, c.K);
    detail::check_list("ee.pr_interrupt", p.pr_interrupt, c.K);
    for (double x : p.pr_interrupt) {
      if (!(x >= 0.0 && x <= 1.0)) throw ConfigError("ee.pr_interrupt", "must lie in [0, 1]");
    }
    if (p.fading != "none" && p.fading != "rayleigh" && p.fading != "rician") {
      throw ConfigError("ee.fading", "expected none | rayleigh | rician");
    }
    if (!(p.power_scale > 0.0)) throw ConfigError("ee.power_scale", "must be positive");
  }
  if (!(c.timing.t_s > 0.0 && c.timing.t_p >= 0.0 && c.timing.t_a > 0.0)) {
    throw ConfigError("timing", "sensing and access times must be positive");
  }
}

inline RunConfig load_config(const std::string& path) {
  auto c = build_config(ConfigText::load(path));
  validate(c);
  return c;
}

}  // namespace aoeecc
