#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <initializer_list>
#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "giro/bandit.hpp"
#include "giro/contextual.hpp"
#include "giro/policies.hpp"
#include "giro/rng.hpp"

namespace giro {

/// Stream-tag layout: the high byte selects the usage, the rest identifies
/// the draw site. Shared reward tags depend only on (round, arm), which is
/// what gives every policy in a run the same reward realization.
namespace tags {

inline constexpr std::uint64_t compose(std::uint64_t kind,
                                       std::uint64_t payload) {
  return (kind << 56) | payload;
}

inline constexpr std::uint64_t env_means() { return compose(0, 0); }
inline constexpr std::uint64_t policy(std::uint64_t index) {
  return compose(2, index);
}
inline constexpr std::uint64_t shared_reward(std::int64_t t, int arm, int k) {
  return compose(3, std::uint64_t(t - 1) * std::uint64_t(k) +
                        std::uint64_t(arm));
}
inline constexpr std::uint64_t independent_reward(std::uint64_t policy_index,
                                                  std::int64_t t, int arm,
                                                  int k) {
  return compose(4, (policy_index << 40) |
                        (std::uint64_t(t - 1) * std::uint64_t(k) +
                         std::uint64_t(arm)));
}
inline constexpr std::uint64_t context(std::int64_t t) {
  return compose(5, std::uint64_t(t));
}

}  // namespace tags

struct PolicySpec {
  std::string kind;
  std::map<std::string, std::string> params;
  bool operator==(const PolicySpec&) const = default;
};

/// Declarative experiment description; round-trips losslessly through its
/// flat key=value file form.
struct ExperimentConfig {
  std::string mode = "mab";  // mab | contextual | lemma1 | verify-bounds
  std::string family = "bernoulli";
  int num_arms = 2;
  std::string means = "uniform(0.25,0.75)";
  std::string means_redraw = "per-run";  // per-run | fixed
  double beta_v = 4.0;
  std::int64_t horizon = 1000;
  std::int64_t runs = 1;
  std::uint64_t seed = 1;
  std::string out;
  double mu1 = 0.6;  // lemma1 mode
  double mu2 = 0.2;
  std::vector<PolicySpec> policies;

  bool operator==(const ExperimentConfig&) const = default;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double to_double(const std::string& v, const std::string& key) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0')
    throw std::runtime_error("config: bad number for " + key + ": '" + v + "'");
  return x;
}

inline std::int64_t to_int(const std::string& v, const std::string& key) {
  char* end = nullptr;
  const long long x = std::strtoll(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0')
    throw std::runtime_error("config: bad integer for " + key + ": '" + v +
                             "'");
  return x;
}

}  // namespace detail

inline ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  cfg.policies.clear();
  std::string line;
  std::int64_t lineno = 0;
  bool in_policy = false;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(lineno) +
                               ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key == "policy") {
      cfg.policies.push_back(PolicySpec{value, {}});
      in_policy = true;
    } else if (key.rfind("policy.", 0) == 0) {
      if (!in_policy)
        throw std::runtime_error("config line " + std::to_string(lineno) +
                                 ": policy.* before any policy");
      cfg.policies.back().params[key.substr(7)] = value;
    } else if (key == "mode") {
      cfg.mode = value;
    } else if (key == "family") {
      cfg.family = value;
    } else if (key == "K") {
      cfg.num_arms = int(detail::to_int(value, key));
    } else if (key == "means") {
      cfg.means = value;
    } else if (key == "means.redraw") {
      cfg.means_redraw = value;
    } else if (key == "v") {
      cfg.beta_v = detail::to_double(value, key);
    } else if (key == "n") {
      cfg.horizon = detail::to_int(value, key);
    } else if (key == "runs") {
      cfg.runs = detail::to_int(value, key);
    } else if (key == "seed") {
      cfg.seed = std::uint64_t(detail::to_int(value, key));
    } else if (key == "out") {
      cfg.out = value;
    } else if (key == "mu1") {
      cfg.mu1 = detail::to_double(value, key);
    } else if (key == "mu2") {
      cfg.mu2 = detail::to_double(value, key);
    } else {
      throw std::runtime_error("config line " + std::to_string(lineno) +
                               ": unknown key '" + key + "'");
    }
  }
  return cfg;
}

inline ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open config");
  return parse_config(in);
}

inline std::string config_to_text(const ExperimentConfig& cfg) {
  std::ostringstream out;
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  out << "mode = " << cfg.mode << "\n";
  out << "family = " << cfg.family << "\n";
  out << "K = " << cfg.num_arms << "\n";
  out << "means = " << cfg.means << "\n";
  out << "means.redraw = " << cfg.means_redraw << "\n";
  out << "v = " << num(cfg.beta_v) << "\n";
  out << "n = " << cfg.horizon << "\n";
  out << "runs = " << cfg.runs << "\n";
  out << "seed = " << cfg.seed << "\n";
  if (!cfg.out.empty()) out << "out = " << cfg.out << "\n";
  out << "mu1 = " << num(cfg.mu1) << "\n";
  out << "mu2 = " << num(cfg.mu2) << "\n";
  for (const PolicySpec& p : cfg.policies) {
    out << "\npolicy = " << p.kind << "\n";
    for (const auto& [k, v] : p.params) out << "policy." << k << " = " << v << "\n";
  }
  return out.str();
}

namespace detail {

struct MeansRule {
  bool uniform = false;
  double lo = 0.0, hi = 0.0;
  std::vector<double> list;
};

inline MeansRule parse_means(const std::string& spec) {
  MeansRule rule;
  if (spec.rfind("uniform(", 0) == 0 && spec.back() == ')') {
    const std::string inner = spec.substr(8, spec.size() - 9);
    const auto comma = inner.find(',');
    if (comma == std::string::npos)
      throw std::runtime_error("config: means uniform(lo,hi) malformed");
    rule.uniform = true;
    rule.lo = to_double(trim(inner.substr(0, comma)), "means.lo");
    rule.hi = to_double(trim(inner.substr(comma + 1)), "means.hi");
    if (!(rule.lo <= rule.hi))
      throw std::runtime_error("config: means uniform(lo,hi) needs lo <= hi");
    return rule;
  }
  std::stringstream ss(spec);
  std::string field;
  while (std::getline(ss, field, ','))
    rule.list.push_back(to_double(trim(field), "means"));
  if (rule.list.empty()) throw std::runtime_error("config: empty means list");
  return rule;
}

inline TieRule parse_tie(const std::map<std::string, std::string>& params,
                         TieRule fallback) {
  const auto it = params.find("tie");
  if (it == params.end()) return fallback;
  if (it->second == "uniform") return TieRule::uniform_random();
  if (it->second == "fixed") return TieRule::fixed_preference();
  throw std::invalid_argument("policy tie must be 'uniform' or 'fixed'");
}

inline void check_params(const PolicySpec& spec,
                         std::initializer_list<const char*> allowed) {
  for (const auto& [k, v] : spec.params) {
    bool ok = k == "label";
    for (const char* a : allowed) ok = ok || k == a;
    if (!ok)
      throw std::invalid_argument("policy '" + spec.kind +
                                  "': unknown parameter '" + k + "'");
  }
}

inline double require_double(const PolicySpec& spec, const char* key) {
  const auto it = spec.params.find(key);
  if (it == spec.params.end())
    throw std::invalid_argument("policy '" + spec.kind + "': missing '" +
                                std::string(key) + "'");
  return to_double(it->second, key);
}

inline double optional_double(const PolicySpec& spec, const char* key,
                              double fallback) {
  const auto it = spec.params.find(key);
  return it == spec.params.end() ? fallback : to_double(it->second, key);
}

inline ModelKind parse_model(const PolicySpec& spec) {
  const auto it = spec.params.find("model");
  if (it == spec.params.end())
    throw std::invalid_argument("policy '" + spec.kind +
                                "': missing 'model' (linear|logistic)");
  if (it->second == "linear") return ModelKind::kLinear;
  if (it->second == "logistic") return ModelKind::kLogistic;
  throw std::invalid_argument("policy model must be linear or logistic");
}

}  // namespace detail

inline std::unique_ptr<Policy> make_policy(const PolicySpec& spec) {
  using detail::parse_tie;
  if (spec.kind == "giro") {
    detail::check_params(spec, {"a", "tie"});
    return std::make_unique<GiroPolicy>(
        detail::require_double(spec, "a"),
        parse_tie(spec.params, TieRule::uniform_random()));
  }
  if (spec.kind == "naive-bootstrap") {
    detail::check_params(spec, {"tie"});
    return std::make_unique<NaiveBootstrapPolicy>(
        parse_tie(spec.params, TieRule::fixed_preference()));
  }
  if (spec.kind == "ucb1") {
    detail::check_params(spec, {"tie"});
    return std::make_unique<Ucb1Policy>(
        parse_tie(spec.params, TieRule::uniform_random()));
  }
  if (spec.kind == "klucb") {
    detail::check_params(spec, {"tie"});
    return std::make_unique<KlUcbPolicy>(
        parse_tie(spec.params, TieRule::uniform_random()));
  }
  if (spec.kind == "ts") {
    detail::check_params(spec, {"tie"});
    return std::make_unique<TsPolicy>(
        parse_tie(spec.params, TieRule::uniform_random()));
  }
  if (spec.kind == "eg") {
    detail::check_params(spec, {"b", "tie"});
    return std::make_unique<EpsilonGreedyPolicy>(
        detail::require_double(spec, "b"),
        parse_tie(spec.params, TieRule::uniform_random()));
  }
  throw std::invalid_argument("unknown policy kind '" + spec.kind + "'");
}

inline std::unique_ptr<ContextualPolicy> make_contextual_policy(
    const PolicySpec& spec) {
  using detail::parse_tie;
  if (spec.kind == "giro") {
    detail::check_params(spec, {"a", "model", "refit", "tie"});
    return std::make_unique<ContextualGiroPolicy>(
        std::int64_t(detail::optional_double(spec, "a", 1.0)),
        detail::parse_model(spec),
        std::int64_t(detail::optional_double(spec, "refit", 1.0)), true,
        parse_tie(spec.params, TieRule::uniform_random()));
  }
  if (spec.kind == "linucb") {
    detail::check_params(spec, {"alpha", "tie"});
    return std::make_unique<LinUcbPolicy>(
        detail::optional_double(spec, "alpha", 1.0),
        parse_tie(spec.params, TieRule::uniform_random()));
  }
  if (spec.kind == "lints") {
    detail::check_params(spec, {"sigma", "tie"});
    return std::make_unique<LinTsPolicy>(
        detail::optional_double(spec, "sigma", 1.0),
        parse_tie(spec.params, TieRule::uniform_random()));
  }
  if (spec.kind == "eg") {
    detail::check_params(spec, {"b", "model", "refit", "tie"});
    return std::make_unique<ContextualEpsGreedyPolicy>(
        detail::require_double(spec, "b"), detail::parse_model(spec),
        std::int64_t(detail::optional_double(spec, "refit", 1.0)),
        parse_tie(spec.params, TieRule::uniform_random()));
  }
  if (spec.kind == "random") {
    detail::check_params(spec, {});
    return std::make_unique<UniformRandomContextualPolicy>();
  }
  throw std::invalid_argument("unknown contextual policy kind '" + spec.kind +
                              "'");
}

inline std::string policy_label(const PolicySpec& spec,
                                const std::string& generated) {
  const auto it = spec.params.find("label");
  return it == spec.params.end() ? generated : it->second;
}

namespace detail {

/// Runs fn(run_index) for every run, spreading runs over worker threads.
/// Results must be written to per-run slots; the merge is by index, so the
/// outcome is schedule-independent.
template <typename Fn>
void parallel_runs(std::int64_t runs, int threads, Fn&& fn) {
  if (threads <= 0)
    threads = int(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;
  if (std::int64_t(threads) > runs) threads = int(runs);
  if (threads == 1) {
    for (std::int64_t r = 0; r < runs; ++r) fn(r);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(std::size_t(threads));
  for (int w = 0; w < threads; ++w)
    pool.emplace_back([&] {
      for (;;) {
        const std::int64_t r = next.fetch_add(1);
        if (r >= runs) return;
        try {
          fn(r);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

inline BanditInstance make_instance(const ExperimentConfig& cfg,
                                    const MeansRule& rule,
                                    std::uint64_t master, std::int64_t run) {
  std::vector<double> means;
  if (rule.uniform) {
    const std::int64_t source_run = cfg.means_redraw == "fixed" ? 0 : run;
    RngStream rng =
        split_seed(master, std::uint64_t(source_run), tags::env_means());
    means.resize(std::size_t(cfg.num_arms));
    for (double& m : means) m = rng.uniform(rule.lo, rule.hi);
  } else {
    means = rule.list;
  }
  if (cfg.family == "bernoulli") return BanditInstance::bernoulli(means);
  if (cfg.family == "beta") return BanditInstance::beta(means, cfg.beta_v);
  throw std::runtime_error("config: unknown family '" + cfg.family + "'");
}

}  // namespace detail

struct MabRunResult {
  std::vector<double> means_used;
  std::vector<std::vector<RoundLog>> logs;  // [policy][round]
};

struct MabExperimentResult {
  std::vector<std::string> policy_names;
  std::vector<MabRunResult> runs;
};

/// Seeded multi-run simulation. Every policy in the list sees the same
/// environment realization per run: the reward of (round, arm) comes from a
/// stream keyed only by (run, round, arm) unless independent_draws is set.
inline MabExperimentResult run_experiment(const ExperimentConfig& cfg,
                                          bool independent_draws = false,
                                          int threads = 0) {
  if (cfg.mode != "mab")
    throw std::invalid_argument("run_experiment: config mode must be mab");
  if (cfg.horizon < 1 || cfg.runs < 1 || cfg.num_arms < 1)
    throw std::invalid_argument("run_experiment: bad n/runs/K");
  if (cfg.policies.empty())
    throw std::invalid_argument("run_experiment: no policies");
  if (cfg.means_redraw != "per-run" && cfg.means_redraw != "fixed")
    throw std::invalid_argument(
        "run_experiment: means.redraw must be per-run or fixed");
  const detail::MeansRule rule = detail::parse_means(cfg.means);
  if (!rule.uniform && int(rule.list.size()) != cfg.num_arms)
    throw std::invalid_argument("run_experiment: means list length != K");

  MabExperimentResult result;
  for (const PolicySpec& spec : cfg.policies)
    result.policy_names.push_back(
        policy_label(spec, make_policy(spec)->name()));
  result.runs.resize(std::size_t(cfg.runs));

  const int k = cfg.num_arms;
  detail::parallel_runs(cfg.runs, threads, [&](std::int64_t run) {
    const BanditInstance env =
        detail::make_instance(cfg, rule, cfg.seed, run);
    MabRunResult& out = result.runs[std::size_t(run)];
    out.means_used = env.means();
    out.logs.resize(cfg.policies.size());
    for (std::size_t j = 0; j < cfg.policies.size(); ++j) {
      const std::unique_ptr<Policy> policy = make_policy(cfg.policies[j]);
      RngStream policy_rng =
          split_seed(cfg.seed, std::uint64_t(run), tags::policy(j));
      policy->reset(k, policy_rng);
      std::vector<RoundLog>& log = out.logs[j];
      log.reserve(std::size_t(cfg.horizon));
      double regret = 0.0;
      for (std::int64_t t = 1; t <= cfg.horizon; ++t) {
        const int arm = policy->select_arm(t, policy_rng);
        RngStream reward_rng = split_seed(
            cfg.seed, std::uint64_t(run),
            independent_draws ? tags::independent_reward(j, t, arm, k)
                              : tags::shared_reward(t, arm, k));
        const double reward = env.pull(arm, reward_rng);
        policy->update(arm, reward, policy_rng);
        regret += env.gap(arm);
        log.push_back(RoundLog{t, arm, reward, regret});
      }
    }
  });
  return result;
}

struct ContextualRunResult {
  std::vector<std::vector<double>> rewards;  // [policy][round]
};

struct ContextualExperimentResult {
  std::vector<std::string> policy_names;
  std::vector<ContextualRunResult> runs;
};

/// Contextual counterpart of run_experiment; the environment prototype is
/// cloned per run so runs can execute concurrently.
inline ContextualExperimentResult run_contextual_experiment(
    const ExperimentConfig& cfg, const ContextualEnv& prototype,
    const std::function<std::unique_ptr<ContextualEnv>(const ContextualEnv&)>&
        clone_env,
    int threads = 0) {
  if (cfg.horizon < 1 || cfg.runs < 1)
    throw std::invalid_argument("contextual experiment: bad n/runs");
  if (cfg.policies.empty())
    throw std::invalid_argument("contextual experiment: no policies");

  ContextualExperimentResult result;
  for (const PolicySpec& spec : cfg.policies)
    result.policy_names.push_back(
        policy_label(spec, make_contextual_policy(spec)->name()));
  result.runs.resize(std::size_t(cfg.runs));

  detail::parallel_runs(cfg.runs, threads, [&](std::int64_t run) {
    const std::unique_ptr<ContextualEnv> env = clone_env(prototype);
    env->begin_run(cfg.seed, run);
    const int k = env->num_arms();
    const int d = env->dim();
    ContextualRunResult& out = result.runs[std::size_t(run)];
    out.rewards.resize(cfg.policies.size());
    for (std::size_t j = 0; j < cfg.policies.size(); ++j) {
      const std::unique_ptr<ContextualPolicy> policy =
          make_contextual_policy(cfg.policies[j]);
      RngStream policy_rng =
          split_seed(cfg.seed, std::uint64_t(run), tags::policy(j));
      policy->reset(k, d, policy_rng);
      std::vector<double>& rewards = out.rewards[j];
      rewards.reserve(std::size_t(cfg.horizon));
      for (std::int64_t t = 1; t <= cfg.horizon; ++t) {
        const Vec& x = env->context(t);
        const int arm = policy->select_arm(t, x, policy_rng);
        RngStream reward_rng = split_seed(cfg.seed, std::uint64_t(run),
                                          tags::shared_reward(t, arm, k));
        const double reward = env->reward(t, arm, reward_rng);
        policy->update(t, x, arm, reward, policy_rng);
        rewards.push_back(reward);
      }
    }
  });
  return result;
}

struct Lemma1Result {
  double lock_frequency = 0.0;
  double mean_regret = 0.0;
  double regret_std_error = 0.0;
  std::int64_t lock_violations = 0;  // re-pulls of the locked-out arm; must be 0
};

/// Reproduces the naive-bootstrap failure mode in a two-armed Bernoulli
/// problem: with the fixed tie rule favoring arm 2 and a first reward of 0
/// on arm 1, arm 1 is never pulled again. Reports the empirical frequency of
/// that lock event and the mean regret across runs.
inline Lemma1Result lemma1_experiment(double mu1, double mu2, std::int64_t n,
                                      std::int64_t runs, std::uint64_t seed,
                                      int threads = 0) {
  if (!(mu1 > mu2))
    throw std::invalid_argument("lemma1_experiment: requires mu1 > mu2");
  if (n < 2 || runs < 1)
    throw std::invalid_argument("lemma1_experiment: need n >= 2, runs >= 1");
  const BanditInstance env = BanditInstance::bernoulli({mu1, mu2});
  std::vector<std::uint8_t> locked(std::size_t(runs), 0);
  std::vector<std::uint8_t> violated(std::size_t(runs), 0);
  std::vector<double> regrets(std::size_t(runs), 0.0);

  detail::parallel_runs(runs, threads, [&](std::int64_t run) {
    NaiveBootstrapPolicy policy(TieRule::fixed_preference());
    RngStream policy_rng = split_seed(seed, std::uint64_t(run), tags::policy(0));
    policy.reset(2, policy_rng);
    double regret = 0.0;
    double first_reward_arm0 = -1.0;
    std::int64_t arm0_pulls_after_round1 = 0;
    for (std::int64_t t = 1; t <= n; ++t) {
      const int arm = policy.select_arm(t, policy_rng);
      RngStream reward_rng =
          split_seed(seed, std::uint64_t(run), tags::shared_reward(t, arm, 2));
      const double reward = env.pull(arm, reward_rng);
      policy.update(arm, reward, policy_rng);
      regret += env.gap(arm);
      if (t == 1) {
        if (arm != 0)
          throw std::logic_error("lemma1: round 1 must pull arm 1");
        first_reward_arm0 = reward;
      } else if (arm == 0) {
        ++arm0_pulls_after_round1;
      }
    }
    const bool z_high = policy.tie_rule().prefers_high();
    const bool lock = z_high && first_reward_arm0 == 0.0;
    locked[std::size_t(run)] = lock ? 1 : 0;
    violated[std::size_t(run)] = (lock && arm0_pulls_after_round1 > 0) ? 1 : 0;
    regrets[std::size_t(run)] = regret;
  });

  Lemma1Result out;
  double lock_count = 0.0, sum = 0.0, sumsq = 0.0;
  for (std::int64_t r = 0; r < runs; ++r) {
    lock_count += locked[std::size_t(r)];
    out.lock_violations += violated[std::size_t(r)];
    sum += regrets[std::size_t(r)];
    sumsq += regrets[std::size_t(r)] * regrets[std::size_t(r)];
  }
  out.lock_frequency = lock_count / double(runs);
  out.mean_regret = sum / double(runs);
  if (runs > 1) {
    const double var =
        (sumsq - sum * sum / double(runs)) / double(runs - 1);
    out.regret_std_error = std::sqrt(std::max(0.0, var) / double(runs));
  }
  return out;
}

/// Per-round mean and standard error across runs, per policy.
struct AggregateCurve {
  std::vector<std::string> policy_names;
  std::int64_t horizon = 0;
  std::int64_t run_count = 0;
  std::vector<std::vector<double>> mean;       // [policy][round]
  std::vector<std::vector<double>> std_error;  // [policy][round]
};

namespace detail {

inline AggregateCurve aggregate_matrix(
    const std::vector<std::string>& names,
    const std::vector<std::vector<std::vector<double>>>& curves) {
  // curves[run][policy][round]
  const std::size_t runs = curves.size();
  if (runs == 0) throw std::invalid_argument("aggregate: no runs");
  const std::size_t policies = curves.front().size();
  const std::size_t horizon = curves.front().front().size();
  for (const auto& run : curves)
    for (const auto& c : run)
      if (c.size() != horizon)
        throw std::runtime_error("aggregate: run length mismatch");
  AggregateCurve out;
  out.policy_names = names;
  out.horizon = std::int64_t(horizon);
  out.run_count = std::int64_t(runs);
  out.mean.assign(policies, std::vector<double>(horizon, 0.0));
  out.std_error.assign(policies, std::vector<double>(horizon, 0.0));
  for (std::size_t j = 0; j < policies; ++j)
    for (std::size_t t = 0; t < horizon; ++t) {
      double sum = 0.0, sumsq = 0.0;
      for (std::size_t r = 0; r < runs; ++r) {
        const double v = curves[r][j][t];
        sum += v;
        sumsq += v * v;
      }
      const double m = sum / double(runs);
      out.mean[j][t] = m;
      if (runs > 1) {
        const double var = (sumsq - sum * m) / double(runs - 1);
        out.std_error[j][t] = std::sqrt(std::max(0.0, var) / double(runs));
      }
    }
  return out;
}

}  // namespace detail

/// Mean cumulative regret per round.
inline AggregateCurve aggregate_regret(const MabExperimentResult& result) {
  std::vector<std::vector<std::vector<double>>> curves(result.runs.size());
  for (std::size_t r = 0; r < result.runs.size(); ++r) {
    curves[r].resize(result.runs[r].logs.size());
    for (std::size_t j = 0; j < result.runs[r].logs.size(); ++j) {
      const auto& log = result.runs[r].logs[j];
      auto& c = curves[r][j];
      c.reserve(log.size());
      for (const RoundLog& entry : log) c.push_back(entry.cumulative_regret);
    }
  }
  return detail::aggregate_matrix(result.policy_names, curves);
}

/// Mean reward per round so far: entry t is (sum of rewards through t) / t.
inline AggregateCurve aggregate_reward_rate(
    const ContextualExperimentResult& result) {
  std::vector<std::vector<std::vector<double>>> curves(result.runs.size());
  for (std::size_t r = 0; r < result.runs.size(); ++r) {
    curves[r].resize(result.runs[r].rewards.size());
    for (std::size_t j = 0; j < result.runs[r].rewards.size(); ++j) {
      const auto& rewards = result.runs[r].rewards[j];
      auto& c = curves[r][j];
      c.reserve(rewards.size());
      double sum = 0.0;
      for (std::size_t t = 0; t < rewards.size(); ++t) {
        sum += rewards[t];
        c.push_back(sum / double(t + 1));
      }
    }
  }
  return detail::aggregate_matrix(result.policy_names, curves);
}

/// CSV schema: round,policy,mean,stderr; round-major rows in policy list
/// order; floats at 9 significant digits; LF line endings.
inline void emit_csv(const AggregateCurve& curve, std::ostream& out) {
  out << "round,policy,mean,stderr\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return std::string(buf);
  };
  for (std::int64_t t = 0; t < curve.horizon; ++t)
    for (std::size_t j = 0; j < curve.policy_names.size(); ++j)
      out << (t + 1) << ',' << curve.policy_names[j] << ','
          << num(curve.mean[j][std::size_t(t)]) << ','
          << num(curve.std_error[j][std::size_t(t)]) << '\n';
}

inline std::string csv_string(const AggregateCurve& curve) {
  std::ostringstream out;
  emit_csv(curve, out);
  return out.str();
}

}  // namespace giro
