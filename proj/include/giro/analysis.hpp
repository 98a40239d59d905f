#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "giro/binomial.hpp"
#include "giro/rng.hpp"
#include "giro/sampling.hpp"

namespace giro {

/// Inputs for one optimism-tail evaluation: an arm pulled s times whose
/// augmented binary history holds V ones under pseudo rate a, queried at
/// threshold tau.
struct OptimismQuery {
  std::int64_t pulls = 0;          // s
  std::int64_t ones_in_history = 0;  // V, in [a*s, (a+1)*s]
  std::int64_t pseudo_rate = 1;    // integer a
  double threshold = 0.0;          // tau
};

inline void validate(const OptimismQuery& q) {
  if (q.pulls < 0 || q.pseudo_rate < 0)
    throw std::invalid_argument("optimism query: negative s or a");
  if (q.pulls > 0) {
    const std::int64_t lo = q.pseudo_rate * q.pulls;
    const std::int64_t hi = (q.pseudo_rate + 1) * q.pulls;
    if (q.ones_in_history < lo || q.ones_in_history > hi)
      throw std::invalid_argument("optimism query: V outside [a*s,(a+1)*s]");
  }
}

/// log Pr[bootstrap mean >= tau | history]: the exact upper tail of
/// B(alpha*s, V/(alpha*s)) at ceil(tau*alpha*s). Unpulled arms (s = 0) are
/// optimistic by convention (probability one).
inline double log_optimism_tail(const OptimismQuery& q) {
  validate(q);
  if (q.pulls == 0) return 0.0;
  if (q.threshold <= 0.0) return 0.0;
  if (q.threshold > 1.0) return kNegInf;
  const std::int64_t size = (2 * q.pseudo_rate + 1) * q.pulls;
  const std::int64_t k_from = ceil_index(q.threshold * double(size));
  return log_binom_upper_tail(k_from, size,
                              double(q.ones_in_history) / double(size));
}

inline double optimism_tail(const OptimismQuery& q) {
  return std::exp(log_optimism_tail(q));
}

/// The threshold midway (in the scaled-and-shifted reward space) between a
/// suboptimal arm's concentration point and the best arm's.
inline double giro_optimism_threshold(double mu_arm, double gap, double a) {
  const double alpha = 2.0 * a + 1.0;
  return (mu_arm + a) / alpha + gap / (2.0 * alpha);
}

struct GiroConstants {
  double alpha;  // 2a + 1
  double b;      // (2a + 1) / (a (a + 1))
  double c;      // upper bound on E[1 / P(optimistic)]
};

/// Constants of the Giro regret bound; defined for a > 1/sqrt(2) (b < 2).
inline GiroConstants giro_constants(double a) {
  if (!(a > 1.0 / std::numbers::sqrt2))
    throw std::invalid_argument("giro_constants: requires a > 1/sqrt(2)");
  const double alpha = 2.0 * a + 1.0;
  const double b = alpha / (a * (a + 1.0));
  const double e2 = std::exp(2.0);
  const double c = 2.0 * e2 * std::sqrt(alpha) / std::sqrt(2.0 * std::numbers::pi) *
                   std::exp(8.0 * b / (2.0 - b)) *
                   (1.0 + std::sqrt(2.0 * std::numbers::pi / (4.0 - 2.0 * b)));
  return GiroConstants{alpha, b, c};
}

/// Closed-form upper bound on the expected inverse probability that the
/// bootstrap mean is optimistic; independent of n and p.
inline double expected_inverse_optimism_bound(double a) {
  return giro_constants(a).c;
}

/// Exact E[1 / P(optimistic)] for a Bernoulli(p) arm pulled n times with
/// integer pseudo rate a: sums, over x ~ B(n, p) observed ones, the inverse
/// upper tail of B(m, (a n + x)/m) at ceil((a + p) n), m = (2a + 1) n.
/// Log-domain throughout; exact mode is capped at n <= 60.
inline double expected_inverse_optimism_exact(std::int64_t n, double p,
                                              std::int64_t a) {
  if (n < 1 || a < 1) throw std::invalid_argument("W: need n >= 1, a >= 1");
  if (n > 60)
    throw std::length_error("W exact mode capped at n = 60");
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("W: p outside [0,1]");
  const std::int64_t m = (2 * a + 1) * n;
  const std::int64_t k_from = ceil_index((double(a) + p) * double(n));
  std::vector<double> terms;
  terms.reserve(std::size_t(n) + 1);
  for (std::int64_t x = 0; x <= n; ++x) {
    const double log_outer = log_binom_pmf(x, n, p);
    if (log_outer == kNegInf) continue;
    const double log_tail = log_binom_upper_tail(
        k_from, m, double(a * n + x) / double(m));
    if (log_tail == kNegInf)
      throw std::runtime_error("W: inner tail vanished, parameters invalid");
    terms.push_back(std::exp(log_outer - log_tail));
  }
  std::sort(terms.begin(), terms.end());
  double w = 0.0;
  for (double t : terms) w += t;
  return w;
}

/// The two per-arm terms of the randomized-exploration regret decomposition:
/// the best arm's inverse-optimism sum and the suboptimal arm's
/// still-uncertain round count. Exact enumeration over the history
/// distribution; capped at n <= 64.
struct RegretTerms {
  double optimism_term = 0.0;       // a_i
  double concentration_term = 0.0;  // b_i
};

namespace detail {

inline double capped_inverse_tail(double log_q, double cap) {
  if (log_q >= 0.0) return 0.0;  // probability one: 1/Q - 1 = 0
  if (-log_q > 700.0) return cap;
  return std::min(std::exp(-log_q) - 1.0, cap);
}

}  // namespace detail

inline RegretTerms regret_decomposition_exact(std::int64_t n, double mu_best,
                                              double mu_arm, std::int64_t a) {
  if (!(mu_arm >= 0.0 && mu_arm < mu_best && mu_best <= 1.0))
    throw std::invalid_argument("regret terms: need 0 <= mu_arm < mu_best <= 1");
  if (a < 1 || n < 1) throw std::invalid_argument("regret terms: n, a >= 1");
  if (n > 64) throw std::length_error("regret terms exact mode capped at 64");
  const double tau = giro_optimism_threshold(mu_arm, mu_best - mu_arm,
                                             double(a));
  const double log_inv_n = -std::log(double(n));
  RegretTerms out;
  // s = 0: Q = 1 on both arms, so the optimism term adds 0 and the
  // concentration term adds 1{1 > 1/n}.
  out.concentration_term = (n > 1 ? 1.0 : 0.0) + 1.0;
  for (std::int64_t s = 1; s < n; ++s) {
    double a_term = 0.0;
    double b_term = 0.0;
    for (std::int64_t x = 0; x <= s; ++x) {
      const double log_q = log_optimism_tail({s, a * s + x, a, tau});
      const double w_best = binom_pmf(x, s, mu_best);
      if (w_best > 0.0)
        a_term += w_best * detail::capped_inverse_tail(log_q, double(n));
      const double w_sub = binom_pmf(x, s, mu_arm);
      if (w_sub > 0.0 && log_q > log_inv_n) b_term += w_sub;
    }
    out.optimism_term += a_term;
    out.concentration_term += b_term;
  }
  return out;
}

/// Monte Carlo estimate of the same two terms, sampling the per-pull history
/// ones-count instead of enumerating it. Returns (terms, standard errors).
struct RegretTermsMc {
  RegretTerms terms;
  double optimism_se = 0.0;
  double concentration_se = 0.0;
};

inline RegretTermsMc regret_decomposition_mc(std::int64_t n, double mu_best,
                                             double mu_arm, std::int64_t a,
                                             std::int64_t reps,
                                             RngStream& rng) {
  if (reps < 2) throw std::invalid_argument("mc regret terms: reps >= 2");
  const double tau = giro_optimism_threshold(mu_arm, mu_best - mu_arm,
                                             double(a));
  const double log_inv_n = -std::log(double(n));
  double sum_a = 0.0, sumsq_a = 0.0, sum_b = 0.0, sumsq_b = 0.0;
  for (std::int64_t r = 0; r < reps; ++r) {
    double rep_a = 0.0;
    double rep_b = (n > 1 ? 1.0 : 0.0) + 1.0;
    for (std::int64_t s = 1; s < n; ++s) {
      const std::int64_t x_best = sample_binomial(s, mu_best, rng);
      rep_a += detail::capped_inverse_tail(
          log_optimism_tail({s, a * s + x_best, a, tau}), double(n));
      const std::int64_t x_sub = sample_binomial(s, mu_arm, rng);
      if (log_optimism_tail({s, a * s + x_sub, a, tau}) > log_inv_n)
        rep_b += 1.0;
    }
    sum_a += rep_a;
    sumsq_a += rep_a * rep_a;
    sum_b += rep_b;
    sumsq_b += rep_b * rep_b;
  }
  RegretTermsMc out;
  const double k = double(reps);
  out.terms.optimism_term = sum_a / k;
  out.terms.concentration_term = sum_b / k;
  out.optimism_se =
      std::sqrt(std::max(0.0, (sumsq_a / k - out.terms.optimism_term *
                                                 out.terms.optimism_term) /
                                  (k - 1.0)));
  out.concentration_se =
      std::sqrt(std::max(0.0, (sumsq_b / k - out.terms.concentration_term *
                                                 out.terms.concentration_term) /
                                  (k - 1.0)));
  return out;
}

/// Plug-in regret upper bound for Giro with pseudo rate a over n rounds
/// (natural logarithm). Gaps are those of the suboptimal arms, all positive.
inline double giro_regret_upper_bound(std::span<const double> gaps,
                                      std::int64_t n, double a) {
  const GiroConstants gc = giro_constants(a);
  const double logn = std::log(double(n));
  double bound = 0.0;
  for (double gap : gaps) {
    if (!(gap > 0.0))
      throw std::invalid_argument("regret bound: gaps must be positive");
    const double g2 = gap * gap;
    bound += gap * ((16.0 * gc.alpha * gc.c / g2 * logn + 2.0) +
                    (8.0 * gc.alpha / g2 * logn + 2.0));
  }
  return bound;
}

/// Stirling-based lower bound on a binomial pmf; requires interior x
/// (the sqrt(n/(x(n-x))) factor is undefined at the endpoints).
inline double binom_pmf_stirling_lower_bound(std::int64_t x, std::int64_t n,
                                             double p) {
  if (!(x > 0 && x < n))
    throw std::invalid_argument("stirling pmf bound: x must be interior");
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("stirling pmf bound: p must be interior");
  const double e2 = std::exp(2.0);
  const double dx = double(x) - p * double(n);
  return std::sqrt(2.0 * std::numbers::pi) / e2 *
         std::sqrt(double(n) / (double(x) * double(n - x))) *
         std::exp(-dx * dx / (p * (1.0 - p) * double(n)));
}

/// Closed-form lower bound on the augmented-history bootstrap upper tail
/// sum_{y >= ceil((a+p)n)} B(y; m, (a n + x)/m) for x in [0, p n].
inline double bootstrap_tail_lower_bound(double x, std::int64_t n, double p,
                                         std::int64_t a) {
  if (n < 1 || a < 1)
    throw std::invalid_argument("bootstrap tail bound: n, a >= 1");
  if (!(x >= 0.0 && x <= p * double(n) + 1e-12))
    throw std::invalid_argument("bootstrap tail bound: x outside [0, p n]");
  const double b = giro_constants(double(a)).b;
  const double e2 = std::exp(2.0);
  const double dev = p * double(n) + std::sqrt(double(n)) - x;
  return std::sqrt(2.0 * std::numbers::pi) /
         (e2 * std::sqrt(2.0 * double(a) + 1.0)) *
         std::exp(-b * dev * dev / double(n));
}

/// Exact bootstrap upper tail matching the bound above.
inline double bootstrap_tail_exact(double x, std::int64_t n, double p,
                                   std::int64_t a) {
  const std::int64_t m = (2 * a + 1) * n;
  const std::int64_t k_from = ceil_index((double(a) + p) * double(n));
  return std::exp(
      log_binom_upper_tail(k_from, m, (double(a) * n + x) / double(m)));
}

/// One machine-checked inequality: lhs the exact quantity, rhs the closed
/// form. Negative slack is a falsification and must fail loudly.
struct BoundReport {
  std::string check;
  std::int64_t n = 0;
  double p = 0.0;
  double a = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  bool pass = false;
};

inline BoundReport make_report(std::string check, std::int64_t n, double p,
                               double a, double lhs, double rhs) {
  BoundReport r{std::move(check), n, p, a, lhs, rhs, rhs - lhs, rhs >= lhs};
  return r;
}

/// Checks sum_x B(x;n,p) f(x) against the partition bound
/// sum_{i<i0} exp(-2 i^2) f(pn - (i+1) sqrt(n)) + exp(-2 i0^2) f(0), where
/// i0 is the smallest integer with (i0+1) sqrt(n) >= p n. f must be
/// non-negative and non-increasing on [0, n].
inline BoundReport decreasing_sum_bound_check(
    std::int64_t n, double p, const std::function<double(double)>& f) {
  if (n < 1 || !(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("decreasing sum bound: bad n or p");
  double prev = kPosInf;
  for (std::int64_t x = 0; x <= n; ++x) {
    const double fx = f(double(x));
    if (fx < 0.0 || fx > prev + 1e-12)
      throw std::invalid_argument(
          "decreasing sum bound: f must be non-negative and non-increasing");
    prev = fx;
  }
  double lhs = 0.0;
  for (std::int64_t x = 0; x <= n; ++x)
    lhs += binom_pmf(x, n, p) * f(double(x));
  const double root_n = std::sqrt(double(n));
  const double pn = p * double(n);
  std::int64_t i0 = 0;
  while (double(i0 + 1) * root_n < pn) ++i0;
  double rhs = 0.0;
  for (std::int64_t i = 0; i < i0; ++i)
    rhs += std::exp(-2.0 * double(i) * double(i)) *
           f(pn - double(i + 1) * root_n);
  rhs += std::exp(-2.0 * double(i0) * double(i0)) * f(0.0);
  return make_report("decreasing_sum_bound", n, p, 0.0, lhs, rhs);
}

/// Regret floor of the pseudo-reward-free bootstrap in a two-armed Bernoulli
/// problem: 0.5 (1 - mu1) Delta2 (n - 1).
inline double naive_bootstrap_regret_floor(double mu1, double delta2,
                                           std::int64_t n) {
  if (!(mu1 >= 0.0 && mu1 <= 1.0) || !(delta2 >= 0.0) || n < 1)
    throw std::invalid_argument("regret floor: bad arguments");
  return 0.5 * (1.0 - mu1) * delta2 * double(n - 1);
}

/// Grid verifications. Each returns one report per grid point; any negative
/// slack marks the report failed.

inline std::vector<BoundReport> verify_inverse_optimism_grid(
    std::int64_t n_max, std::span<const double> ps,
    std::span<const std::int64_t> as) {
  std::vector<BoundReport> out;
  for (std::int64_t a : as) {
    const double rhs = expected_inverse_optimism_bound(double(a));
    for (std::int64_t n = 1; n <= n_max; ++n)
      for (double p : ps)
        out.push_back(make_report(
            "inverse_optimism", n, p, double(a),
            expected_inverse_optimism_exact(n, p, a), rhs));
  }
  return out;
}

inline std::vector<BoundReport> verify_pmf_lower_bound_grid(
    std::int64_t n_max, std::span<const double> ps) {
  std::vector<BoundReport> out;
  for (std::int64_t n = 2; n <= n_max; ++n)
    for (double p : ps) {
      // report the interior x with the least slack
      BoundReport worst;
      bool first = true;
      for (std::int64_t x = 1; x < n; ++x) {
        BoundReport r =
            make_report("pmf_stirling_lb", n, p, 0.0,
                        binom_pmf_stirling_lower_bound(x, n, p),
                        binom_pmf(x, n, p));
        if (first || r.slack < worst.slack) {
          worst = r;
          first = false;
        }
      }
      out.push_back(worst);
    }
  return out;
}

inline std::vector<BoundReport> verify_bootstrap_tail_grid(
    std::int64_t n_max, std::span<const double> ps,
    std::span<const std::int64_t> as) {
  std::vector<BoundReport> out;
  for (std::int64_t a : as)
    for (std::int64_t n = 1; n <= n_max; ++n)
      for (double p : ps) {
        BoundReport worst;
        bool first = true;
        const std::int64_t x_hi = std::int64_t(std::floor(p * double(n)));
        for (std::int64_t x = 0; x <= x_hi; ++x) {
          BoundReport r = make_report(
              "bootstrap_tail_lb", n, p, double(a),
              bootstrap_tail_lower_bound(double(x), n, p, a),
              bootstrap_tail_exact(double(x), n, p, a));
          if (first || r.slack < worst.slack) {
            worst = r;
            first = false;
          }
        }
        out.push_back(worst);
      }
  return out;
}

}  // namespace giro
