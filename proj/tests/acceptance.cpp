// Acceptance suite: end-to-end checks of the simulation harness, the binary
// fast path, the verification grids, and the contextual property suite.
// Prints one pass/fail line per criterion and exits nonzero on any failure.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "giro/analysis.hpp"
#include "giro/contextual.hpp"
#include "giro/harness.hpp"
#include "giro/policies.hpp"
#include "support/test_util.hpp"

namespace {

using namespace giro;

int failures = 0;

void report(int index, const std::string& name, bool pass,
            const std::string& detail) {
  if (!pass) ++failures;
  std::printf("[%s] %2d. %-34s %s\n", pass ? "PASS" : "FAIL", index,
              name.c_str(), detail.c_str());
  std::fflush(stdout);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

struct FinalRegret {
  double mean = 0.0;
  double se = 0.0;
};

FinalRegret final_regret(const MabExperimentResult& result, std::size_t j) {
  double sum = 0.0, sumsq = 0.0;
  const double runs = double(result.runs.size());
  for (const MabRunResult& run : result.runs) {
    const double r = run.logs[j].back().cumulative_regret;
    sum += r;
    sumsq += r * r;
  }
  FinalRegret out;
  out.mean = sum / runs;
  const double var = (sumsq - sum * out.mean) / (runs - 1.0);
  out.se = std::sqrt(std::max(0.0, var) / runs);
  return out;
}

/// d-dimensional logistic environment with known per-arm parameters; the
/// synthetic stand-in for the dataset experiments.
class SyntheticLogisticEnv : public ContextualEnv {
 public:
  SyntheticLogisticEnv(std::vector<Vec> theta, int dim)
      : theta_(std::move(theta)), dim_(dim), context_(std::size_t(dim), 0.0) {}

  int dim() const override { return dim_; }
  int num_arms() const override { return int(theta_.size()); }

  void begin_run(std::uint64_t master, std::int64_t run) override {
    master_ = master;
    run_ = run;
  }

  const Vec& context(std::int64_t t) override {
    RngStream rng = split_seed(master_, std::uint64_t(run_), tags::context(t));
    for (double& v : context_) v = rng.normal();
    return context_;
  }

  double reward(std::int64_t, int arm, RngStream& rng) override {
    return rng.bernoulli(mean_reward(arm, context_)) ? 1.0 : 0.0;
  }

  double mean_reward(int arm, const Vec& x) const {
    return sigmoid(dot(theta_[std::size_t(arm)], x));
  }

  int oracle_arm(const Vec& x) const {
    int best = 0;
    double best_mean = -1.0;
    for (int i = 0; i < num_arms(); ++i) {
      const double m = mean_reward(i, x);
      if (m > best_mean) {
        best_mean = m;
        best = i;
      }
    }
    return best;
  }

 private:
  std::vector<Vec> theta_;
  int dim_;
  Vec context_;
  std::uint64_t master_ = 0;
  std::int64_t run_ = 0;
};

void criteria_1_2_8() {
  ExperimentConfig cfg;
  cfg.mode = "mab";
  cfg.family = "bernoulli";
  cfg.num_arms = 10;
  cfg.means = "uniform(0.25,0.75)";
  cfg.means_redraw = "per-run";
  cfg.horizon = 10000;
  cfg.runs = 50;
  cfg.seed = 20230417;
  cfg.policies = {{"giro", {{"a", "1"}}},
                  {"giro", {{"a", "0.333333333333333"}}},
                  {"giro", {{"a", "0.1"}}},
                  {"ucb1", {}},
                  {"ts", {}}};
  const MabExperimentResult result = run_experiment(cfg);

  const FinalRegret giro_1 = final_regret(result, 0);
  const FinalRegret giro_third = final_regret(result, 1);
  const FinalRegret giro_tenth = final_regret(result, 2);
  const FinalRegret ucb1 = final_regret(result, 3);
  const FinalRegret ts = final_regret(result, 4);

  report(1, "bernoulli ordering vs ucb1",
         giro_1.mean < ucb1.mean && ts.mean < ucb1.mean,
         "giro(a=1)=" + fmt(giro_1.mean) + " ts=" + fmt(ts.mean) +
             " ucb1=" + fmt(ucb1.mean));

  const double pooled_low =
      std::sqrt(giro_tenth.se * giro_tenth.se + giro_third.se * giro_third.se);
  const double pooled_high =
      std::sqrt(giro_third.se * giro_third.se + giro_1.se * giro_1.se);
  const bool monotone =
      giro_tenth.mean <= giro_third.mean + pooled_low &&
      giro_third.mean <= giro_1.mean + pooled_high;
  report(2, "regret grows with pseudo rate a", monotone,
         "a=0.1:" + fmt(giro_tenth.mean) + " a=1/3:" + fmt(giro_third.mean) +
             " a=1:" + fmt(giro_1.mean));

  // closed-form upper bound dominates the simulated regret, run by run
  bool dominated = true;
  double mean_bound = 0.0;
  for (const MabRunResult& run : result.runs) {
    const BanditInstance env = BanditInstance::bernoulli(run.means_used);
    std::vector<double> gaps;
    for (int i = 0; i < env.num_arms(); ++i)
      if (env.gap(i) > 0.0) gaps.push_back(env.gap(i));
    const double bound = giro_regret_upper_bound(gaps, cfg.horizon, 1.0);
    mean_bound += bound / double(result.runs.size());
    dominated = dominated && bound >= run.logs[0].back().cumulative_regret;
  }
  report(8, "upper bound dominates simulation",
         dominated && mean_bound >= giro_1.mean,
         "bound=" + fmt(mean_bound) + " regret=" + fmt(giro_1.mean));
}

void criterion_3() {
  const Lemma1Result r = lemma1_experiment(0.6, 0.2, 2000, 4000, 424242);
  const double floor = naive_bootstrap_regret_floor(0.6, 0.4, 2000);
  const bool freq_ok = std::fabs(r.lock_frequency - 0.2) <= 0.02;
  const bool regret_ok =
      r.mean_regret >= floor - 3.0 * r.regret_std_error;
  report(3, "naive bootstrap lock reproduction",
         freq_ok && regret_ok && r.lock_violations == 0,
         "freq=" + fmt(r.lock_frequency) + " regret=" + fmt(r.mean_regret) +
             " floor=" + fmt(floor) + " violations=" +
             std::to_string(r.lock_violations));
}

void criterion_4() {
  double worst_tv = 0.0;
  for (std::int64_t s = 1; s <= 5; ++s)
    for (std::int64_t ones = 0; ones <= s; ++ones)
      for (std::int64_t a : {1, 2}) {
        const std::int64_t k = a * s;
        const std::int64_t n = s + 2 * k;
        const std::vector<double> general =
            testutil::general_binary_bootstrap_pmf(s, ones, k);
        double tv = 0.0;
        for (std::int64_t u = 0; u <= n; ++u)
          tv += std::fabs(general[std::size_t(u)] -
                          testutil::oracle_binom_pmf(
                              u, n, double(ones + k) / double(n)));
        worst_tv = std::max(worst_tv, 0.5 * tv);
      }
  report(4, "binary fast path exactness", worst_tv < 1e-10,
         "max total variation = " + fmt(worst_tv));
}

void criterion_5() {
  const std::vector<double> ps{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  const std::vector<std::int64_t> as{1, 2, 3};
  const std::vector<BoundReport> grid =
      verify_inverse_optimism_grid(40, ps, as);
  std::int64_t violations = 0;
  double min_slack = kPosInf;
  for (const BoundReport& r : grid) {
    if (!r.pass) ++violations;
    min_slack = std::min(min_slack, r.slack);
  }
  report(5, "inverse-optimism bound grid", violations == 0,
         std::to_string(grid.size()) + " points, min slack=" + fmt(min_slack));
}

void criterion_6() {
  const std::vector<double> ps{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  const std::vector<std::int64_t> as{1, 2, 3};
  std::int64_t violations = 0;
  std::size_t points = 0;
  for (const BoundReport& r : verify_pmf_lower_bound_grid(60, ps)) {
    if (!r.pass) ++violations;
    ++points;
  }
  for (const BoundReport& r : verify_bootstrap_tail_grid(40, ps, as)) {
    if (!r.pass) ++violations;
    ++points;
  }
  report(6, "pmf and tail lower-bound grids", violations == 0,
         std::to_string(points) + " points, " + std::to_string(violations) +
             " violations");
}

void criterion_7() {
  const double e1 = 8.0 * giro_constants(1.0).b / (2.0 - giro_constants(1.0).b);
  const double e2 = 8.0 * giro_constants(2.0).b / (2.0 - giro_constants(2.0).b);
  const double e3 = 8.0 * giro_constants(3.0).b / (2.0 - giro_constants(3.0).b);
  const bool ok = e1 == 24.0 && std::fabs(e2 - 40.0 / 7.0) < 1e-12 &&
                  std::fabs(e3 - 56.0 / 17.0) < 1e-12 &&
                  std::fabs(e2 - 5.714) < 1e-3 && std::fabs(e3 - 3.294) < 1e-3;
  report(7, "bound constants", ok,
         "exponents: " + fmt(e1) + ", " + fmt(e2) + ", " + fmt(e3));
}

void criterion_9() {
  const int d = 5, k = 3;
  const std::vector<Vec> theta{{2.0, 1.0, 0.0, 0.0, -0.5},
                               {0.0, -1.5, 2.0, 0.5, 0.0},
                               {-1.0, 0.0, -0.5, 2.0, 1.0}};
  const SyntheticLogisticEnv env(theta, d);

  ExperimentConfig cfg;
  cfg.mode = "contextual";
  cfg.horizon = 5000;
  cfg.runs = 5;
  cfg.seed = 3141592;
  cfg.policies = {{"giro", {{"a", "1"}, {"model", "logistic"}}},
                  {"random", {}}};
  auto clone = [](const ContextualEnv& proto) {
    return std::make_unique<SyntheticLogisticEnv>(
        static_cast<const SyntheticLogisticEnv&>(proto));
  };
  const ContextualExperimentResult result =
      run_contextual_experiment(cfg, env, clone);
  const AggregateCurve curve = aggregate_reward_rate(result);
  const double giro_reward = curve.mean[0].back();
  const double random_reward = curve.mean[1].back();

  // oracle policy: pulls argmax of the true mean rewards, with the same
  // common-random-number reward streams the runner uses
  double oracle_reward = 0.0;
  for (std::int64_t run = 0; run < cfg.runs; ++run) {
    SyntheticLogisticEnv oracle_env = env;
    oracle_env.begin_run(cfg.seed, run);
    double sum = 0.0;
    for (std::int64_t t = 1; t <= cfg.horizon; ++t) {
      const Vec& x = oracle_env.context(t);
      const int arm = oracle_env.oracle_arm(x);
      RngStream reward_rng =
          split_seed(cfg.seed, std::uint64_t(run), tags::shared_reward(t, arm, k));
      sum += oracle_env.reward(t, arm, reward_rng);
    }
    oracle_reward += sum / double(cfg.horizon) / double(cfg.runs);
  }

  const double target = random_reward + 0.5 * (oracle_reward - random_reward);
  const bool reward_ok = giro_reward >= target;

  // invariant audit on a shorter instrumented run: pseudo-context pairing on
  // every drawn sample and the bias-shift property on sampled rounds
  bool pairing_ok = true;
  bool shift_ok = true;
  {
    SyntheticLogisticEnv audit_env = env;
    audit_env.begin_run(cfg.seed, 0);
    ContextualGiroPolicy policy(1, ModelKind::kLogistic);
    RngStream policy_rng = split_seed(cfg.seed, 0, tags::policy(0));
    policy.reset(k, d, policy_rng);
    std::int64_t audits = 0;
    std::vector<WeightedPoint> pts, shifted_pts;
    Vec shifted_y;
    policy.on_sample = [&](int, const BootstrapSample& sample,
                           const ContextHistory& hist) {
      ++audits;
      for (const auto& item : sample.items) {
        if (item.pull < 0 || item.pull >= hist.pulls()) pairing_ok = false;
        if (item.is_pseudo && item.y != 0.0 && item.y != 1.0)
          pairing_ok = false;
      }
      // the shift identity needs well-posed normal equations: skip rounds
      // where the sample cannot yet span the bias-lifted dimension
      if (hist.pulls() >= 3 * (d + 1)) {
        hist.to_points(sample, pts);
        const double c = 0.25;
        shifted_pts = pts;
        shifted_y.resize(pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i) {
          shifted_y[i] = pts[i].y + c;
          shifted_pts[i].y = shifted_y[i];
        }
        const RewardModel base = fit_reward_model(pts, ModelKind::kLinear, d);
        const RewardModel moved =
            fit_reward_model(shifted_pts, ModelKind::kLinear, d);
        for (std::int64_t i = 0; i < hist.pulls(); ++i) {
          const Vec& x = hist.entry(i).x;
          if (std::fabs(moved.raw(x) - base.raw(x) - c) > 1e-5)
            shift_ok = false;
        }
      }
    };
    for (std::int64_t t = 1; t <= 800; ++t) {
      const Vec& x = audit_env.context(t);
      const int arm = policy.select_arm(t, x, policy_rng);
      RngStream reward_rng =
          split_seed(cfg.seed, 0, tags::shared_reward(t, arm, k));
      const double y = audit_env.reward(t, arm, reward_rng);
      policy.update(t, x, arm, y, policy_rng);
    }
  }

  report(9, "contextual synthetic property suite",
         reward_ok && pairing_ok && shift_ok,
         "giro-log=" + fmt(giro_reward) + " random=" + fmt(random_reward) +
             " oracle=" + fmt(oracle_reward) + " pairing=" +
             (pairing_ok ? "ok" : "BAD") + " shift=" +
             (shift_ok ? "ok" : "BAD"));
}

void criterion_10() {
  RngStream rng = split_seed(1618, 0, 0);
  const std::int64_t trials = 1000000;
  bool ok = true;
  std::string worst;
  double worst_z = 0.0;
  auto note = [&](const std::string& what, double z) {
    if (z > worst_z) {
      worst_z = z;
      worst = what;
    }
    if (z > 4.0) ok = false;
  };
  for (std::int64_t s : {1, 5, 20})
    for (std::int64_t a : {1, 2})
      for (double mu : {0.1, 0.5, 0.9}) {
        const std::string tag = "s=" + std::to_string(s) + ",a=" +
                                std::to_string(a) + ",mu=" + fmt(mu);
        // marginal ones-count of the augmented history: V = a s + B(s, mu)
        {
          double sum = 0, sumsq = 0;
          for (std::int64_t i = 0; i < trials; ++i) {
            const double v = double(a * s + sample_binomial(s, mu, rng));
            sum += v;
            sumsq += v * v;
          }
          const double mean = sum / double(trials);
          const double var =
              (sumsq - sum * mean) / double(trials - 1);
          const double k2 = double(s) * mu * (1.0 - mu);
          const double se_mean = std::sqrt(k2 / double(trials));
          note(tag + " E[V]",
               std::fabs(mean - (mu + double(a)) * double(s)) / se_mean);
          const double se_var = std::sqrt(testutil::var_of_sample_variance(
              testutil::binom_mu4(s, mu), k2, trials));
          note(tag + " Var[V]", std::fabs(var - k2) / se_var);
        }
        // conditional bootstrap mean given a fixed history
        {
          const std::int64_t ones =
              std::min<std::int64_t>(s, std::int64_t(std::lround(mu * double(s))));
          ArmRecord rec;
          for (std::int64_t i = 0; i < ones; ++i) rec.add(1.0);
          for (std::int64_t i = ones; i < s; ++i) rec.add(0.0);
          const std::int64_t m = (2 * a + 1) * s;
          const double q = double(ones + a * s) / double(m);
          double sum = 0, sumsq = 0;
          for (std::int64_t i = 0; i < trials; ++i) {
            const double v = giro_value_binary(rec, double(a), rng).mu_hat;
            sum += v;
            sumsq += v * v;
          }
          const double mean = sum / double(trials);
          const double var = (sumsq - sum * mean) / double(trials - 1);
          const double sigma2 = q * (1.0 - q) / double(m);
          note(tag + " E[mu|V]",
               std::fabs(mean - q) / std::sqrt(sigma2 / double(trials)));
          const double mu4 =
              testutil::binom_mu4(m, q) / (double(m) * double(m) *
                                           double(m) * double(m));
          const double se_var = std::sqrt(
              testutil::var_of_sample_variance(mu4, sigma2, trials));
          note(tag + " Var[mu|V]", std::fabs(var - sigma2) / se_var);
        }
      }
  report(10, "bootstrap moment identities", ok,
         "worst |z| = " + fmt(worst_z) + " at " + worst);
}

}  // namespace

int main() {
  criteria_1_2_8();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_9();
  criterion_10();
  std::printf("%s: %d criterion(s) failed\n",
              failures == 0 ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED",
              failures);
  return failures == 0 ? 0 : 1;
}
