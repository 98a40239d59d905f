#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "giro/linalg.hpp"
#include "giro/policies.hpp"
#include "giro/rng.hpp"

namespace giro {

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

inline double softplus(double z) {
  if (z > 30.0) return z;
  if (z < -30.0) return std::exp(z);
  return std::log1p(std::exp(z));
}

enum class ModelKind { kLinear, kLogistic };

/// Per-arm parametric map from context to estimated reward. theta has the
/// bias appended (length d + 1); predictions are clamped to [0,1] before any
/// use as an arm value.
struct RewardModel {
  ModelKind kind = ModelKind::kLinear;
  Vec theta;

  struct FitMeta {
    int iterations = 0;
    double final_delta = 0.0;
    bool regularizer_bumped = false;
    bool fallback_constant = false;
  } fit_meta;

  double raw(const Vec& x) const {
    double z = theta.back();
    for (std::size_t i = 0; i + 1 < theta.size(); ++i) z += theta[i] * x[i];
    return kind == ModelKind::kLogistic ? sigmoid(z) : z;
  }

  double predict(const Vec& x) const {
    return std::clamp(raw(x), 0.0, 1.0);
  }
};

/// One weighted point of a (bootstrap) training sample. x points at a
/// context owned by the history; valid only while the history lives.
struct WeightedPoint {
  const Vec* x;
  double y;
  double w;
};

namespace detail {

inline constexpr double kRidgeLambda = 1e-6;
inline constexpr double kLogisticTolerance = 1e-3;
inline constexpr int kLogisticIterationCap = 100;

inline void lift(const Vec& x, Vec& out, int d) {
  out.resize(std::size_t(d) + 1);
  std::copy(x.begin(), x.begin() + d, out.begin());
  out[std::size_t(d)] = 1.0;
}

inline bool all_finite(const Vec& v) {
  for (double t : v)
    if (!std::isfinite(t)) return false;
  return true;
}

inline RewardModel fit_linear(std::span<const WeightedPoint> pts, int d) {
  const int dim = d + 1;
  RewardModel model;
  model.kind = ModelKind::kLinear;
  Vec lifted;
  double lambda = kRidgeLambda;
  for (int attempt = 0; attempt < 4; ++attempt) {
    SymMat a(dim, lambda);
    Vec rhs(std::size_t(dim), 0.0);
    for (const WeightedPoint& pt : pts) {
      lift(*pt.x, lifted, d);
      a.add_outer(lifted, pt.w);
      for (int i = 0; i < dim; ++i)
        rhs[std::size_t(i)] += pt.w * pt.y * lifted[std::size_t(i)];
    }
    const Cholesky chol(a);
    if (chol.ok()) {
      model.theta = chol.solve(rhs);
      if (all_finite(model.theta)) {
        model.fit_meta.iterations = 1;
        return model;
      }
    }
    lambda *= 1e4;
    model.fit_meta.regularizer_bumped = true;
  }
  throw std::runtime_error("fit_reward_model: normal equations unsolvable");
}

inline RewardModel fit_logistic(std::span<const WeightedPoint> pts, int d,
                                const RewardModel* warm) {
  const int dim = d + 1;
  RewardModel model;
  model.kind = ModelKind::kLogistic;
  model.theta.assign(std::size_t(dim), 0.0);
  if (warm && warm->kind == ModelKind::kLogistic &&
      int(warm->theta.size()) == dim && all_finite(warm->theta))
    model.theta = warm->theta;

  double total_w = 0.0;
  for (const WeightedPoint& pt : pts) total_w += pt.w;
  if (total_w <= 0.0)
    throw std::invalid_argument("fit_reward_model: empty sample");

  Vec lifted;
  auto objective = [&](const Vec& theta) {
    double nll = 0.0;
    for (const WeightedPoint& pt : pts) {
      lift(*pt.x, lifted, d);
      const double z = dot(theta, lifted);
      nll += pt.w * (softplus(z) - pt.y * z);
    }
    double reg = 0.0;
    for (double t : theta) reg += t * t;
    return nll / total_w + 0.5 * kRidgeLambda * reg;
  };

  double f = objective(model.theta);
  Vec grad(std::size_t(dim), 0.0);
  Vec trial;
  for (int iter = 1; iter <= kLogisticIterationCap; ++iter) {
    SymMat hess(dim, kRidgeLambda);
    std::fill(grad.begin(), grad.end(), 0.0);
    for (const WeightedPoint& pt : pts) {
      lift(*pt.x, lifted, d);
      const double mu = sigmoid(dot(model.theta, lifted));
      const double gw = pt.w * (mu - pt.y) / total_w;
      for (int i = 0; i < dim; ++i)
        grad[std::size_t(i)] += gw * lifted[std::size_t(i)];
      hess.add_outer(lifted, pt.w * mu * (1.0 - mu) / total_w);
    }
    for (int i = 0; i < dim; ++i)
      grad[std::size_t(i)] += kRidgeLambda * model.theta[std::size_t(i)];

    Vec step;
    double jitter = 0.0;
    for (int attempt = 0; attempt < 6; ++attempt) {
      SymMat h2 = hess;
      if (jitter > 0.0) h2.add_diagonal(jitter);
      const Cholesky chol(h2);
      if (chol.ok()) {
        step = chol.solve(grad);
        break;
      }
      jitter = jitter == 0.0 ? 1e-8 : jitter * 100.0;
    }
    if (step.empty()) break;

    double scale = 1.0;
    double f_new = f;
    bool improved = false;
    for (int halving = 0; halving < 30; ++halving) {
      trial = model.theta;
      for (int i = 0; i < dim; ++i)
        trial[std::size_t(i)] -= scale * step[std::size_t(i)];
      const double ft = objective(trial);
      if (std::isfinite(ft) && ft <= f) {
        f_new = ft;
        improved = true;
        break;
      }
      scale *= 0.5;
    }
    model.fit_meta.iterations = iter;
    if (!improved) {
      model.fit_meta.final_delta = 0.0;
      break;
    }
    model.theta = trial;
    model.fit_meta.final_delta = f - f_new;
    f = f_new;
    if (model.fit_meta.final_delta < kLogisticTolerance) break;
  }
  if (!all_finite(model.theta))
    throw std::runtime_error("fit_reward_model: non-finite logistic fit");
  return model;
}

}  // namespace detail

/// Fits a reward model to a weighted sample. Linear solves the ridge normal
/// equations exactly (lambda = 1e-6, escalated and flagged if singular);
/// logistic runs damped Newton from the warm start until the mean objective
/// improves by less than 1e-3 or 100 iterations pass.
inline RewardModel fit_reward_model(std::span<const WeightedPoint> pts,
                                    ModelKind kind, int d,
                                    const RewardModel* warm = nullptr) {
  if (pts.empty()) throw std::invalid_argument("fit_reward_model: no sample");
  return kind == ModelKind::kLinear ? detail::fit_linear(pts, d)
                                    : detail::fit_logistic(pts, d, warm);
}

/// Constant model predicting the sample's clamped mean reward; the flagged
/// fallback when fitting fails outright.
inline RewardModel constant_reward_model(std::span<const WeightedPoint> pts,
                                         int d) {
  double mass = 0.0, sum = 0.0;
  for (const WeightedPoint& pt : pts) {
    mass += pt.w;
    sum += pt.w * pt.y;
  }
  RewardModel model;
  model.kind = ModelKind::kLinear;
  model.theta.assign(std::size_t(d) + 1, 0.0);
  model.theta.back() = mass > 0.0 ? std::clamp(sum / mass, 0.0, 1.0) : 0.0;
  model.fit_meta.fallback_constant = true;
  return model;
}

/// One resampled draw of an augmented contextual history, as multiplicities
/// over its distinct entries. Pseudo entries (y in {0,1}) always carry the
/// context of the observed pull they were attached to.
struct BootstrapSample {
  struct Item {
    std::int64_t pull;  // index of the observed pull providing the context
    bool is_pseudo;
    double y;
    std::int64_t weight;
  };
  std::int64_t total = 0;
  std::vector<Item> items;

  // scratch reused across draws
  std::vector<std::int32_t> counts;
};

/// Observed (context, reward) pairs of one arm, with pseudo 0/1 reward pairs
/// realized virtually at sampling time: after s pulls the augmented history
/// has (2a + 1) s entries.
class ContextHistory {
 public:
  struct Entry {
    Vec x;
    double y;
  };

  void add(Vec x, double y) { entries_.push_back({std::move(x), y}); }
  std::int64_t pulls() const { return std::int64_t(entries_.size()); }
  const Entry& entry(std::int64_t i) const { return entries_[std::size_t(i)]; }

  /// Uniform with-replacement resample of the augmented history.
  void sample_augmented(std::int64_t a, RngStream& rng,
                        BootstrapSample& out) const {
    const std::int64_t s = pulls();
    if (s == 0) throw std::logic_error("sample_augmented: empty history");
    const std::int64_t total = (2 * a + 1) * s;
    out.total = total;
    out.counts.assign(std::size_t(total), 0);
    for (std::int64_t i = 0; i < total; ++i)
      ++out.counts[std::size_t(rng.below(std::uint64_t(total)))];
    collect(a, out);
  }

  /// The augmented history itself, each entry once: the bootstrap-disabled
  /// regression anchor.
  void full_augmented(std::int64_t a, BootstrapSample& out) const {
    const std::int64_t s = pulls();
    if (s == 0) throw std::logic_error("full_augmented: empty history");
    const std::int64_t total = (2 * a + 1) * s;
    out.total = total;
    out.counts.assign(std::size_t(total), 1);
    collect(a, out);
  }

  void to_points(const BootstrapSample& sample,
                 std::vector<WeightedPoint>& pts) const {
    pts.clear();
    pts.reserve(sample.items.size());
    for (const BootstrapSample::Item& item : sample.items)
      pts.push_back({&entries_[std::size_t(item.pull)].x, item.y,
                     double(item.weight)});
  }

 private:
  void collect(std::int64_t a, BootstrapSample& out) const {
    const std::int64_t s = pulls();
    out.items.clear();
    for (std::int64_t idx = 0; idx < std::int64_t(out.counts.size()); ++idx) {
      const std::int32_t c = out.counts[std::size_t(idx)];
      if (c == 0) continue;
      if (idx < s) {
        out.items.push_back({idx, false, entries_[std::size_t(idx)].y, c});
      } else {
        const std::int64_t off = idx - s;
        const std::int64_t pull = off / (2 * a);
        const double y = (off % 2 == 0) ? 0.0 : 1.0;
        out.items.push_back({pull, true, y, c});
      }
    }
  }

  std::vector<Entry> entries_;
};

/// Contextual policy interface: observe the round's context, pick an arm,
/// learn from the pulled arm's reward only.
class ContextualPolicy {
 public:
  virtual ~ContextualPolicy() = default;
  virtual void reset(int num_arms, int dim, RngStream& rng) = 0;
  virtual int select_arm(std::int64_t t, const Vec& x, RngStream& rng) = 0;
  virtual void update(std::int64_t t, const Vec& x, int arm, double reward,
                      RngStream& rng) = 0;
  virtual std::string name() const = 0;
};

/// Bootstrap exploration with reward generalization: each round, every
/// pulled arm's augmented history is resampled, a model is refit to the
/// sample (warm-started), and its clamped prediction at the round's context
/// is the arm's value. Unpulled arms are taken first, in ascending index
/// order.
class ContextualGiroPolicy : public ContextualPolicy {
 public:
  ContextualGiroPolicy(std::int64_t a, ModelKind kind,
                       std::int64_t refit_every = 1, bool resample = true,
                       TieRule tie = TieRule::uniform_random())
      : a_(a), kind_(kind), refit_every_(refit_every), resample_(resample),
        tie_(tie) {
    if (a < 0) throw std::invalid_argument("contextual giro: a must be >= 0");
    if (refit_every < 1)
      throw std::invalid_argument("contextual giro: refit cadence >= 1");
  }

  void reset(int num_arms, int dim, RngStream& rng) override {
    dim_ = dim;
    histories_.assign(std::size_t(num_arms), ContextHistory{});
    models_.assign(std::size_t(num_arms), RewardModel{});
    fitted_.assign(std::size_t(num_arms), false);
    values_.assign(std::size_t(num_arms), 0.0);
    tie_.reset(rng);
  }

  int select_arm(std::int64_t t, const Vec& x, RngStream& rng) override {
    if (int(x.size()) != dim_)
      throw std::invalid_argument("contextual giro: context dimension mismatch");
    const int k = int(histories_.size());
    for (int i = 0; i < k; ++i)
      if (histories_[std::size_t(i)].pulls() == 0) return i;
    for (int i = 0; i < k; ++i) {
      ContextHistory& hist = histories_[std::size_t(i)];
      if (!fitted_[std::size_t(i)] || (t - 1) % refit_every_ == 0) {
        if (resample_)
          hist.sample_augmented(a_, rng, sample_);
        else
          hist.full_augmented(a_, sample_);
        if (on_sample) on_sample(i, sample_, hist);
        hist.to_points(sample_, points_);
        try {
          models_[std::size_t(i)] = fit_reward_model(
              points_, kind_, dim_, &models_[std::size_t(i)]);
        } catch (const std::runtime_error&) {
          models_[std::size_t(i)] = constant_reward_model(points_, dim_);
          ++fit_fallbacks_;
        }
        fitted_[std::size_t(i)] = true;
      }
      values_[std::size_t(i)] = models_[std::size_t(i)].predict(x);
    }
    return argmax_tied(values_, tie_, rng);
  }

  void update(std::int64_t, const Vec& x, int arm, double reward,
              RngStream&) override {
    histories_.at(std::size_t(arm)).add(x, reward);
  }

  std::int64_t fit_fallbacks() const { return fit_fallbacks_; }

  std::string name() const override {
    std::string n = "giro-";
    n += kind_ == ModelKind::kLinear ? "lin" : "log";
    n += "(a=" + std::to_string(a_) + ")";
    return n;
  }

  const ContextHistory& history(int arm) const {
    return histories_.at(std::size_t(arm));
  }
  const RewardModel& model(int arm) const {
    return models_.at(std::size_t(arm));
  }

  /// Test hook: observes every bootstrap sample right after it is drawn.
  std::function<void(int, const BootstrapSample&, const ContextHistory&)>
      on_sample;

 private:
  std::int64_t a_;
  ModelKind kind_;
  std::int64_t refit_every_;
  bool resample_;
  TieRule tie_;
  int dim_ = 0;
  std::vector<ContextHistory> histories_;
  std::vector<RewardModel> models_;
  std::vector<bool> fitted_;
  std::vector<double> values_;
  BootstrapSample sample_;
  std::vector<WeightedPoint> points_;
  std::int64_t fit_fallbacks_ = 0;
};

/// Ridge regression with an ellipsoidal bonus: value is the point estimate
/// plus width_scale * sqrt(x^T A^{-1} x) on bias-lifted features; the design
/// state starts at identity and is updated only on pull.
class LinUcbPolicy : public ContextualPolicy {
 public:
  explicit LinUcbPolicy(double width_scale = 1.0,
                        TieRule tie = TieRule::uniform_random())
      : width_(width_scale), tie_(tie) {}

  void reset(int num_arms, int dim, RngStream& rng) override {
    dim_ = dim + 1;
    arms_.assign(std::size_t(num_arms), ArmState(dim_));
    values_.assign(std::size_t(num_arms), 0.0);
    tie_.reset(rng);
  }

  int select_arm(std::int64_t, const Vec& x, RngStream& rng) override {
    detail::lift(x, lifted_, dim_ - 1);
    for (std::size_t i = 0; i < arms_.size(); ++i) {
      ArmState& s = arms_[i];
      s.refresh();
      values_[i] = dot(s.theta, lifted_) +
                   width_ * std::sqrt(s.chol->quad_inverse(lifted_));
    }
    return argmax_tied(values_, tie_, rng);
  }

  void update(std::int64_t, const Vec& x, int arm, double reward,
              RngStream&) override {
    detail::lift(x, lifted_, dim_ - 1);
    arms_.at(std::size_t(arm)).observe(lifted_, reward);
  }

  std::string name() const override { return "linucb"; }

  /// Width term at a context for an arm (diagnostics and tests).
  double width_at(int arm, const Vec& x) {
    detail::lift(x, lifted_, dim_ - 1);
    ArmState& s = arms_.at(std::size_t(arm));
    s.refresh();
    return width_ * std::sqrt(s.chol->quad_inverse(lifted_));
  }

 protected:
  struct ArmState {
    explicit ArmState(int dim)
        : a(dim, 1.0), b(std::size_t(dim), 0.0), theta(std::size_t(dim), 0.0) {}

    void observe(const Vec& lifted, double reward) {
      a.add_outer(lifted, 1.0);
      for (std::size_t i = 0; i < b.size(); ++i)
        b[i] += reward * lifted[i];
      dirty = true;
    }

    void refresh() {
      if (!dirty && chol) return;
      chol.emplace(a);
      if (!chol->ok())
        throw std::runtime_error("linucb: design matrix not positive definite");
      theta = chol->solve(b);
      dirty = false;
    }

    SymMat a;
    Vec b;
    Vec theta;
    std::optional<Cholesky> chol;
    bool dirty = true;
  };

  double width_;
  TieRule tie_;
  int dim_ = 0;
  std::vector<ArmState> arms_;
  std::vector<double> values_;
  Vec lifted_;
};

/// Gaussian parameter perturbation over the same ridge state: value is
/// (theta + noise_scale * A^{-1/2} z)^T x with z standard normal.
class LinTsPolicy : public LinUcbPolicy {
 public:
  explicit LinTsPolicy(double noise_scale = 1.0,
                       TieRule tie = TieRule::uniform_random())
      : LinUcbPolicy(0.0, tie), noise_(noise_scale) {}

  int select_arm(std::int64_t, const Vec& x, RngStream& rng) override {
    detail::lift(x, lifted_, dim_ - 1);
    Vec z(std::size_t(dim_), 0.0);
    for (std::size_t i = 0; i < arms_.size(); ++i) {
      ArmState& s = arms_[i];
      s.refresh();
      for (double& v : z) v = rng.normal();
      const Vec w = s.chol->solve_upper_transpose(z);
      values_[i] = dot(s.theta, lifted_) + noise_ * dot(w, lifted_);
    }
    return argmax_tied(values_, tie_, rng);
  }

  std::string name() const override { return "lints"; }

  /// One perturbed value draw for an arm at a context (tests).
  double sample_value(int arm, const Vec& x, RngStream& rng) {
    detail::lift(x, lifted_, dim_ - 1);
    ArmState& s = arms_.at(std::size_t(arm));
    s.refresh();
    Vec z(std::size_t(dim_), 0.0);
    for (double& v : z) v = rng.normal();
    const Vec w = s.chol->solve_upper_transpose(z);
    return dot(s.theta, lifted_) + noise_ * dot(w, lifted_);
  }

  double ridge_mean(int arm, const Vec& x) {
    detail::lift(x, lifted_, dim_ - 1);
    ArmState& s = arms_.at(std::size_t(arm));
    s.refresh();
    return dot(s.theta, lifted_);
  }

 private:
  double noise_;
};

/// min(1, b/t)-greedy over per-arm reward models fit to the observed
/// (unaugmented) history.
class ContextualEpsGreedyPolicy : public ContextualPolicy {
 public:
  ContextualEpsGreedyPolicy(double b, ModelKind kind,
                            std::int64_t refit_every = 1,
                            TieRule tie = TieRule::uniform_random())
      : b_(b), kind_(kind), refit_every_(refit_every), tie_(tie) {
    if (!(b >= 0.0)) throw std::invalid_argument("contextual eg: b >= 0");
  }

  void reset(int num_arms, int dim, RngStream& rng) override {
    dim_ = dim;
    histories_.assign(std::size_t(num_arms), ContextHistory{});
    models_.assign(std::size_t(num_arms), RewardModel{});
    fitted_.assign(std::size_t(num_arms), false);
    values_.assign(std::size_t(num_arms), 0.0);
    tie_.reset(rng);
  }

  int select_arm(std::int64_t t, const Vec& x, RngStream& rng) override {
    const int k = int(histories_.size());
    for (int i = 0; i < k; ++i)
      if (histories_[std::size_t(i)].pulls() == 0) return i;
    const double eps = std::min(1.0, b_ / double(t));
    if (eps > 0.0 && rng.bernoulli(eps)) return int(rng.below(std::uint64_t(k)));
    for (int i = 0; i < k; ++i) {
      ContextHistory& hist = histories_[std::size_t(i)];
      if (!fitted_[std::size_t(i)] || (t - 1) % refit_every_ == 0) {
        hist.full_augmented(0, sample_);
        hist.to_points(sample_, points_);
        try {
          models_[std::size_t(i)] = fit_reward_model(
              points_, kind_, dim_, &models_[std::size_t(i)]);
        } catch (const std::runtime_error&) {
          models_[std::size_t(i)] = constant_reward_model(points_, dim_);
        }
        fitted_[std::size_t(i)] = true;
      }
      values_[std::size_t(i)] = models_[std::size_t(i)].predict(x);
    }
    return argmax_tied(values_, tie_, rng);
  }

  void update(std::int64_t, const Vec& x, int arm, double reward,
              RngStream&) override {
    histories_.at(std::size_t(arm)).add(x, reward);
  }

  std::string name() const override {
    char buf[64];
    std::snprintf(buf, sizeof buf, "eg-%s(b=%g)",
                  kind_ == ModelKind::kLinear ? "lin" : "log", b_);
    return buf;
  }

 private:
  double b_;
  ModelKind kind_;
  std::int64_t refit_every_;
  TieRule tie_;
  int dim_ = 0;
  std::vector<ContextHistory> histories_;
  std::vector<RewardModel> models_;
  std::vector<bool> fitted_;
  std::vector<double> values_;
  BootstrapSample sample_;
  std::vector<WeightedPoint> points_;
};

/// Pulls a uniformly random arm every round; the no-learning baseline.
class UniformRandomContextualPolicy : public ContextualPolicy {
 public:
  void reset(int num_arms, int, RngStream&) override { k_ = num_arms; }
  int select_arm(std::int64_t, const Vec&, RngStream& rng) override {
    return int(rng.below(std::uint64_t(k_)));
  }
  void update(std::int64_t, const Vec&, int, double, RngStream&) override {}
  std::string name() const override { return "random"; }

 private:
  int k_ = 0;
};

/// A contextual environment: a per-round context and a per-(round, arm)
/// reward draw. begin_run fixes the run's presentation.
class ContextualEnv {
 public:
  virtual ~ContextualEnv() = default;
  virtual int dim() const = 0;
  virtual int num_arms() const = 0;
  virtual void begin_run(std::uint64_t master, std::int64_t run) = 0;
  virtual const Vec& context(std::int64_t t) = 0;
  virtual double reward(std::int64_t t, int arm, RngStream& rng) = 0;
};

/// Multi-class rows presented as a bandit: reward 1 exactly when the pulled
/// arm is the row's class. Features are standardized per column at load
/// (constant columns zeroed); presentation order reshuffles per run and
/// cycles when the horizon exceeds the row count.
class ClassificationBanditEnv : public ContextualEnv {
 public:
  ClassificationBanditEnv(std::vector<Vec> rows, std::vector<int> labels,
                          int num_classes, std::uint64_t shuffle_seed)
      : rows_(std::move(rows)), labels_(std::move(labels)),
        num_classes_(num_classes) {
    if (rows_.empty() || labels_.size() != rows_.size() || num_classes_ < 1)
      throw std::invalid_argument("classification env: bad rows/labels");
    order_.resize(rows_.size());
    for (std::size_t i = 0; i < order_.size(); ++i)
      order_[i] = std::int64_t(i);
    shuffle(RngStream(shuffle_seed, 0, 0));
  }

  int dim() const override { return int(rows_.front().size()); }
  int num_arms() const override { return num_classes_; }
  std::int64_t num_rows() const { return std::int64_t(rows_.size()); }

  void begin_run(std::uint64_t master, std::int64_t run) override {
    shuffle(split_seed(master, std::uint64_t(run), kShuffleTag));
  }

  const Vec& context(std::int64_t t) override {
    return rows_[row_index(t)];
  }

  double reward(std::int64_t t, int arm, RngStream&) override {
    return labels_[row_index(t)] == arm ? 1.0 : 0.0;
  }

  int label_at_round(std::int64_t t) const { return labels_[row_index(t)]; }
  const std::vector<int>& labels() const { return labels_; }
  const std::vector<Vec>& rows() const { return rows_; }
  const std::vector<std::int64_t>& order() const { return order_; }

  static constexpr std::uint64_t kShuffleTag = 0x5348;  // "SH"

 private:
  std::size_t row_index(std::int64_t t) const {
    return std::size_t(order_[std::size_t((t - 1) % std::int64_t(order_.size()))]);
  }

  void shuffle(RngStream rng) {
    for (std::size_t i = order_.size(); i > 1; --i)
      std::swap(order_[i - 1], order_[std::size_t(rng.below(i))]);
  }

  std::vector<Vec> rows_;
  std::vector<int> labels_;
  int num_classes_;
  std::vector<std::int64_t> order_;
};

namespace detail {

[[noreturn]] inline void load_error(const std::string& path, std::int64_t line,
                                    const std::string& what) {
  throw std::runtime_error(path + ":" + std::to_string(line) + ": " + what);
}

inline std::string trim_field(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

/// Loads the dataset CSV (header f1,...,fd,label; decimal features;
/// non-negative integer labels). Labels may be 0- or 1-based but must be
/// dense: a gap in the class range is a load error. Features are
/// standardized per column, rows shuffled by the seed.
inline ClassificationBanditEnv load_classification_env(
    const std::string& path, std::uint64_t shuffle_seed) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open dataset");
  std::string line;
  if (!std::getline(in, line))
    detail::load_error(path, 1, "missing header row");
  std::size_t dims = std::count(line.begin(), line.end(), ',');
  if (dims == 0 ||
      detail::trim_field(line.substr(line.rfind(',') + 1)) != "label")
    detail::load_error(path, 1, "header must be f1,...,fd,label");

  std::vector<Vec> rows;
  std::vector<long> raw_labels;
  std::vector<std::int64_t> label_first_line;
  std::int64_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    Vec row;
    row.reserve(dims);
    while (std::getline(ss, field, ',')) {
      if (row.size() < dims) {
        char* end = nullptr;
        const double v = std::strtod(field.c_str(), &end);
        if (end == field.c_str() || *end != '\0' || !std::isfinite(v))
          detail::load_error(path, lineno, "non-numeric feature '" + field + "'");
        row.push_back(v);
      } else {
        char* end = nullptr;
        const long lab = std::strtol(field.c_str(), &end, 10);
        if (end == field.c_str() || *end != '\0' || lab < 0)
          detail::load_error(path, lineno,
                             "label must be a non-negative integer, got '" +
                                 field + "'");
        raw_labels.push_back(lab);
      }
    }
    if (row.size() != dims || raw_labels.size() != rows.size() + 1)
      detail::load_error(path, lineno, "ragged row: expected " +
                                           std::to_string(dims + 1) +
                                           " fields");
    rows.push_back(std::move(row));
    if (std::size_t(raw_labels.back()) >= label_first_line.size())
      label_first_line.resize(std::size_t(raw_labels.back()) + 1, 0);
    if (label_first_line[std::size_t(raw_labels.back())] == 0)
      label_first_line[std::size_t(raw_labels.back())] = lineno;
  }
  if (rows.empty()) detail::load_error(path, lineno, "no data rows");

  const long max_label = *std::max_element(raw_labels.begin(), raw_labels.end());
  const long min_label = *std::min_element(raw_labels.begin(), raw_labels.end());
  if (min_label > 1)
    detail::load_error(path, label_first_line[std::size_t(max_label)],
                       "labels must start at 0 or 1");
  const long base = min_label;  // dense 0- or 1-based accepted
  for (long lab = base; lab <= max_label; ++lab)
    if (std::size_t(lab) >= label_first_line.size() ||
        label_first_line[std::size_t(lab)] == 0) {
      // cite the first row whose label sits beyond the gap
      std::int64_t where = lineno;
      for (long above = lab + 1; above <= max_label; ++above)
        if (std::size_t(above) < label_first_line.size() &&
            label_first_line[std::size_t(above)] != 0) {
          where = label_first_line[std::size_t(above)];
          break;
        }
      detail::load_error(path, where, "label gap: class " +
                                          std::to_string(lab) +
                                          " never appears");
    }

  std::vector<int> labels(raw_labels.size());
  for (std::size_t i = 0; i < raw_labels.size(); ++i)
    labels[i] = int(raw_labels[i] - base);
  const int num_classes = int(max_label - base + 1);

  // standardize features: mean 0, variance 1; constant columns zeroed
  const double count = double(rows.size());
  for (std::size_t j = 0; j < dims; ++j) {
    double mean = 0.0;
    for (const Vec& r : rows) mean += r[j];
    mean /= count;
    double var = 0.0;
    for (const Vec& r : rows) var += (r[j] - mean) * (r[j] - mean);
    var /= count;
    if (var < 1e-12) {
      for (Vec& r : rows) r[j] = 0.0;
    } else {
      const double inv_sd = 1.0 / std::sqrt(var);
      for (Vec& r : rows) r[j] = (r[j] - mean) * inv_sd;
    }
  }
  return ClassificationBanditEnv(std::move(rows), std::move(labels),
                                 num_classes, shuffle_seed);
}

}  // namespace giro
