#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "giro/binomial.hpp"
#include "giro/rng.hpp"
#include "giro/sampling.hpp"

namespace giro {

/// Per-arm reward history. Binary histories are kept as (pulls, ones) only;
/// the stored-reward vector materializes on the first non-binary reward.
/// Pseudo rewards are never stored, they are implied by (pulls, a) at
/// sampling time.
struct ArmRecord {
  std::int64_t pulls = 0;
  std::int64_t ones = 0;
  double reward_sum = 0.0;
  bool binary = true;
  std::vector<double> rewards;  // populated only once binary turns false

  void add(double y) {
    if (!(y >= 0.0 && y <= 1.0))
      throw std::invalid_argument("ArmRecord: reward outside [0,1]");
    if (binary && (y == 0.0 || y == 1.0)) {
      if (y == 1.0) ++ones;
    } else {
      if (binary) {
        rewards.assign(std::size_t(pulls), 0.0);
        std::fill_n(rewards.begin(), std::size_t(ones), 1.0);
        binary = false;
      }
      rewards.push_back(y);
    }
    ++pulls;
    reward_sum += y;
  }

  double reward_at(std::int64_t i) const {
    return binary ? (i < ones ? 1.0 : 0.0) : rewards[std::size_t(i)];
  }

  double empirical_mean() const {
    return pulls > 0 ? reward_sum / double(pulls) : 0.0;
  }
};

/// How equal argmax values are resolved. FixedPreference draws a coin once
/// per run (before round 1) and then always favors the low or high index.
class TieRule {
 public:
  static TieRule uniform_random() { return TieRule(false); }
  static TieRule fixed_preference() { return TieRule(true); }

  void reset(RngStream& rng) {
    if (fixed_) prefer_high_ = rng.bernoulli(0.5);
  }

  bool is_fixed() const { return fixed_; }
  bool prefers_high() const { return prefer_high_; }

  int pick(std::span<const int> tied, RngStream& rng) const {
    if (tied.size() == 1) return tied.front();
    if (fixed_) return prefer_high_ ? tied.back() : tied.front();
    return tied[std::size_t(rng.below(tied.size()))];
  }

 private:
  explicit TieRule(bool fixed) : fixed_(fixed) {}
  bool fixed_;
  bool prefer_high_ = false;
};

/// Argmax over per-arm values with ties delegated to the rule. Values are
/// compared exactly; callers handle unpulled-arm sentinels beforehand.
inline int argmax_tied(std::span<const double> values, const TieRule& tie,
                       RngStream& rng) {
  double best = values[0];
  for (double v : values)
    if (v > best) best = v;
  std::vector<int> tied;
  for (int i = 0; i < int(values.size()); ++i)
    if (values[i] == best) tied.push_back(i);
  return tie.pick(tied, rng);
}

/// Effective pseudo-reward count for one draw: k = ceil(a*s) with
/// probability a*s - floor(a*s), else floor(a*s). Integer a*s is exact.
inline std::int64_t realize_pseudo_count(double a, std::int64_t s,
                                         RngStream& rng) {
  if (!(a >= 0.0)) throw std::invalid_argument("pseudo rate a must be >= 0");
  const double as = a * double(s);
  const double lo = std::floor(as);
  const double frac = as - lo;
  std::int64_t k = std::int64_t(lo);
  if (frac > 0.0 && rng.uniform() < frac) ++k;
  return k;
}

/// One bootstrap draw of an arm's value.
struct GiroDraw {
  std::int64_t sample_size = 0;  // realized resample length s + 2k
  std::int64_t ones = -1;        // ones in the resample; -1 on general path
  double mu_hat = 0.0;
};

/// Binary-history fast path: the mean of a with-replacement resample of the
/// augmented history is U / (s + 2k) with U ~ B(s + 2k, V / (s + 2k)) and
/// V = ones + k. Identical in distribution to literal resampling.
inline GiroDraw giro_value_binary(const ArmRecord& record, double a,
                                  RngStream& rng) {
  if (record.pulls == 0)
    throw std::logic_error("giro_value_binary: unpulled arm is sentinel-only");
  if (!record.binary)
    throw std::invalid_argument("giro_value_binary: history is not binary");
  const std::int64_t k = realize_pseudo_count(a, record.pulls, rng);
  const std::int64_t size = record.pulls + 2 * k;
  const std::int64_t v = record.ones + k;
  const std::int64_t u = sample_binomial(size, double(v) / double(size), rng);
  return GiroDraw{size, u, double(u) / double(size)};
}

/// General path: mean of (s + 2k) draws with replacement from the virtual
/// augmented history (s stored rewards, k zeros, k ones). Implemented as a
/// multinomial split across the three regions, resampling within the stored
/// region.
inline GiroDraw giro_value_general(const ArmRecord& record, double a,
                                   RngStream& rng) {
  if (record.pulls == 0)
    throw std::logic_error("giro_value_general: unpulled arm is sentinel-only");
  const std::int64_t s = record.pulls;
  const std::int64_t k = realize_pseudo_count(a, s, rng);
  const std::int64_t size = s + 2 * k;
  const std::int64_t from_stored =
      sample_binomial(size, double(s) / double(size), rng);
  std::int64_t pseudo_ones = 0;
  if (size > from_stored && k > 0)
    pseudo_ones = sample_binomial(size - from_stored, 0.5, rng);
  double total = double(pseudo_ones);
  for (std::int64_t i = 0; i < from_stored; ++i)
    total += record.reward_at(std::int64_t(rng.below(std::uint64_t(s))));
  return GiroDraw{size, -1, total / double(size)};
}

/// Bootstrap mean with no pseudo rewards (the a = 0 path).
inline double naive_bootstrap_value(const ArmRecord& record, RngStream& rng) {
  if (record.pulls == 0)
    throw std::logic_error("naive_bootstrap_value: unpulled arm");
  const std::int64_t s = record.pulls;
  if (record.binary) {
    const std::int64_t u =
        sample_binomial(s, double(record.ones) / double(s), rng);
    return double(u) / double(s);
  }
  double total = 0.0;
  for (std::int64_t i = 0; i < s; ++i)
    total += record.reward_at(std::int64_t(rng.below(std::uint64_t(s))));
  return total / double(s);
}

/// Empirical mean plus the sqrt(2 log t / s) confidence radius.
inline double ucb1_value(const ArmRecord& record, std::int64_t t) {
  if (record.pulls == 0) throw std::logic_error("ucb1_value: unpulled arm");
  return record.empirical_mean() +
         std::sqrt(2.0 * std::log(double(t)) / double(record.pulls));
}

/// Largest q in [mean, 1] with s * d(mean, q) <= log t, by bisection to
/// absolute tolerance 1e-9 (64-iteration cap). Requires a binary record.
inline double klucb_value(const ArmRecord& record, std::int64_t t) {
  if (record.pulls == 0) throw std::logic_error("klucb_value: unpulled arm");
  if (!record.binary)
    throw std::invalid_argument("klucb_value: rewards must be rounded binary");
  const double phat = double(record.ones) / double(record.pulls);
  if (phat >= 1.0) return 1.0;
  const double budget = std::log(double(t)) / double(record.pulls);
  double lo = phat, hi = 1.0;
  for (int iter = 0; iter < 64 && hi - lo > 1e-9; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (kl_bernoulli(phat, mid) <= budget)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

/// Beta(1 + successes, 1 + failures) posterior draw; prior Beta(1, 1).
inline double ts_value(const ArmRecord& record, RngStream& rng) {
  if (!record.binary)
    throw std::invalid_argument("ts_value: rewards must be rounded binary");
  return sample_beta(1.0 + double(record.ones),
                     1.0 + double(record.pulls - record.ones), rng);
}

/// Draws a bit that is 1 with probability equal to the reward.
inline int bernoulli_round(double reward, RngStream& rng) {
  if (!(reward >= 0.0 && reward <= 1.0))
    throw std::invalid_argument("bernoulli_round: reward outside [0,1]");
  return rng.bernoulli(reward) ? 1 : 0;
}

/// Solves b in b * (1 + log(n / b)) = target_fraction * n, the smooth form of
/// sum_t min(1, b/t) = target_fraction * n. Used to calibrate the b/t
/// exploration schedule to a total exploration budget.
inline double eg_exploration_budget_parameter(std::int64_t n,
                                              double target_fraction) {
  if (n < 1 || !(target_fraction > 0.0) || target_fraction > 1.0)
    throw std::invalid_argument("eg budget: bad arguments");
  const double target = target_fraction * double(n);
  auto mass = [&](double b) { return b * (1.0 + std::log(double(n) / b)); };
  double lo = 1e-12, hi = double(n);
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    (mass(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Uniform multi-armed policy interface: a per-round arm choice plus an
/// update with the observed reward. All randomness flows through the passed
/// stream; state is single-owner per run.
class Policy {
 public:
  virtual ~Policy() = default;

  virtual void reset(int num_arms, RngStream& rng) = 0;
  virtual int select_arm(std::int64_t t, RngStream& rng) = 0;
  virtual void update(int arm, double reward, RngStream& rng) = 0;
  virtual std::string name() const = 0;
};

/// Value-based policies share the untried-arm sentinel (unpulled arms are
/// taken in ascending index order, strictly before any value comparison) and
/// tie handling.
class ValuePolicy : public Policy {
 public:
  explicit ValuePolicy(TieRule tie) : tie_(tie) {}

  void reset(int num_arms, RngStream& rng) override {
    arms_.assign(std::size_t(num_arms), ArmRecord{});
    values_.assign(std::size_t(num_arms), 0.0);
    tie_.reset(rng);
  }

  int select_arm(std::int64_t t, RngStream& rng) override {
    for (int i = 0; i < int(arms_.size()); ++i)
      if (arms_[std::size_t(i)].pulls == 0) return i;
    for (int i = 0; i < int(arms_.size()); ++i)
      values_[std::size_t(i)] = arm_value(arms_[std::size_t(i)], t, rng);
    return argmax_tied(values_, tie_, rng);
  }

  void update(int arm, double reward, RngStream& rng) override {
    arms_.at(std::size_t(arm)).add(effective_reward(reward, rng));
  }

  const ArmRecord& record(int arm) const { return arms_.at(std::size_t(arm)); }
  const TieRule& tie_rule() const { return tie_; }

 protected:
  virtual double arm_value(const ArmRecord& rec, std::int64_t t,
                           RngStream& rng) = 0;
  virtual double effective_reward(double reward, RngStream&) { return reward; }

  std::vector<ArmRecord> arms_;
  TieRule tie_;

 private:
  std::vector<double> values_;
};

/// Bootstrap exploration with a pseudo 0/1 reward pair injected a times per
/// observed pull. Binary histories take the binomial fast path.
class GiroPolicy : public ValuePolicy {
 public:
  explicit GiroPolicy(double a, TieRule tie = TieRule::uniform_random())
      : ValuePolicy(tie), a_(a) {
    if (!(a > 0.0)) throw std::invalid_argument("GiroPolicy: a must be > 0");
  }

  double pseudo_rate() const { return a_; }
  std::string name() const override { return "giro(a=" + fmt(a_) + ")"; }

 protected:
  double arm_value(const ArmRecord& rec, std::int64_t, RngStream& rng) override {
    return rec.binary ? giro_value_binary(rec, a_, rng).mu_hat
                      : giro_value_general(rec, a_, rng).mu_hat;
  }

 private:
  static std::string fmt(double a) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", a);
    return buf;
  }
  double a_;
};

/// Plain history bootstrap, no pseudo rewards. Measurably unsound: a first
/// reward of zero on the best arm can lock it out for the whole run.
class NaiveBootstrapPolicy : public ValuePolicy {
 public:
  explicit NaiveBootstrapPolicy(TieRule tie = TieRule::fixed_preference())
      : ValuePolicy(tie) {}
  std::string name() const override { return "naive-bootstrap"; }

 protected:
  double arm_value(const ArmRecord& rec, std::int64_t, RngStream& rng) override {
    return naive_bootstrap_value(rec, rng);
  }
};

class Ucb1Policy : public ValuePolicy {
 public:
  explicit Ucb1Policy(TieRule tie = TieRule::uniform_random())
      : ValuePolicy(tie) {}
  std::string name() const override { return "ucb1"; }

 protected:
  double arm_value(const ArmRecord& rec, std::int64_t t, RngStream&) override {
    return ucb1_value(rec, t);
  }
};

class KlUcbPolicy : public ValuePolicy {
 public:
  explicit KlUcbPolicy(TieRule tie = TieRule::uniform_random())
      : ValuePolicy(tie) {}
  std::string name() const override { return "klucb"; }

 protected:
  double arm_value(const ArmRecord& rec, std::int64_t t, RngStream&) override {
    return klucb_value(rec, t);
  }
  double effective_reward(double reward, RngStream& rng) override {
    return (reward == 0.0 || reward == 1.0)
               ? reward
               : double(bernoulli_round(reward, rng));
  }
};

class TsPolicy : public ValuePolicy {
 public:
  explicit TsPolicy(TieRule tie = TieRule::uniform_random())
      : ValuePolicy(tie) {}
  std::string name() const override { return "ts"; }

 protected:
  double arm_value(const ArmRecord& rec, std::int64_t, RngStream& rng) override {
    return ts_value(rec, rng);
  }
  double effective_reward(double reward, RngStream& rng) override {
    return (reward == 0.0 || reward == 1.0)
               ? reward
               : double(bernoulli_round(reward, rng));
  }
};

/// epsilon_t = min(1, b/t): explore uniformly with that probability, else
/// pull the highest empirical mean.
class EpsilonGreedyPolicy : public ValuePolicy {
 public:
  explicit EpsilonGreedyPolicy(double b,
                               TieRule tie = TieRule::uniform_random())
      : ValuePolicy(tie), b_(b) {
    if (!(b >= 0.0)) throw std::invalid_argument("eg: b must be >= 0");
  }

  int select_arm(std::int64_t t, RngStream& rng) override {
    for (int i = 0; i < int(arms_.size()); ++i)
      if (arms_[std::size_t(i)].pulls == 0) return i;
    const double eps = std::min(1.0, b_ / double(t));
    if (eps > 0.0 && rng.bernoulli(eps))
      return int(rng.below(std::uint64_t(arms_.size())));
    return ValuePolicy::select_arm(t, rng);
  }

  std::string name() const override {
    char buf[48];
    std::snprintf(buf, sizeof buf, "eg(b=%g)", b_);
    return buf;
  }

 protected:
  double arm_value(const ArmRecord& rec, std::int64_t, RngStream&) override {
    return rec.empirical_mean();
  }

 private:
  double b_;
};

}  // namespace giro
