#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "giro/binomial.hpp"
#include "giro/rng.hpp"

namespace giro {

/// Gamma(shape, 1) via Marsaglia-Tsang squeeze for shape >= 1 and the
/// boost trick Gamma(a) = Gamma(a+1) * U^(1/a) for shape < 1.
inline double sample_gamma(double shape, RngStream& rng) {
  if (!(shape > 0.0)) throw std::invalid_argument("sample_gamma: shape <= 0");
  if (shape < 1.0) {
    const double u = 1.0 - rng.uniform();  // (0, 1]
    return sample_gamma(shape + 1.0, rng) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

inline double sample_beta(double alpha, double beta, RngStream& rng) {
  if (!(alpha > 0.0) || !(beta > 0.0))
    throw std::invalid_argument("sample_beta: shapes must be positive");
  for (;;) {
    const double x = sample_gamma(alpha, rng);
    const double y = sample_gamma(beta, rng);
    if (x + y > 0.0) return x / (x + y);
  }
}

namespace detail {

/// n * min(p, 1-p) below this uses the cdf walk; at or above it the
/// transformed-rejection sampler applies (its constants require np >= 10).
inline constexpr double kBinomialInversionThreshold = 10.0;

/// Inversion by cdf walk; exact, expected O(n p) steps.
inline std::int64_t binomial_inversion(std::int64_t n, double p,
                                       RngStream& rng) {
  const double q = 1.0 - p;
  double u = rng.uniform();
  double pk = std::pow(q, double(n));  // Pr[X = 0]; safe since n p < 10
  const double ratio = p / q;
  std::int64_t k = 0;
  while (u > pk && k < n) {
    u -= pk;
    ++k;
    pk *= ratio * double(n - k + 1) / double(k);
  }
  return k;
}

/// Hormann's transformed rejection (BTRS). The acceptance test compares
/// against the exact log-pmf ratio, so draws are exact in distribution.
/// Requires p <= 0.5 and n p >= 10.
inline std::int64_t binomial_btrs(std::int64_t n, double p, RngStream& rng) {
  const double q = 1.0 - p;
  const double stddev = std::sqrt(double(n) * p * q);
  const double b = 1.15 + 2.53 * stddev;
  const double a = -0.0873 + 0.0248 * b + 0.01 * p;
  const double c = double(n) * p + 0.5;
  const double v_r = 0.92 - 4.2 / b;
  const double alpha = (2.83 + 5.1 / b) * stddev;
  const std::int64_t m = std::int64_t(std::floor(double(n + 1) * p));
  const double log_pmf_mode = log_binom_pmf(m, n, p);
  for (;;) {
    const double u = rng.uniform() - 0.5;
    double v = rng.uniform();
    const double us = 0.5 - std::fabs(u);
    const double kd = std::floor((2.0 * a / us + b) * u + c);
    if (kd < 0.0 || kd > double(n)) continue;  // range check before the cast
    const std::int64_t k = std::int64_t(kd);
    if (us >= 0.07 && v <= v_r) return k;
    v = std::log(v * alpha / (a / (us * us) + b));
    if (v <= log_binom_pmf(k, n, p) - log_pmf_mode) return k;
  }
}

}  // namespace detail

/// Exact draw from B(trials, p); no normal approximation on any path.
inline std::int64_t sample_binomial(std::int64_t trials, double p,
                                    RngStream& rng) {
  if (trials < 0) throw std::invalid_argument("sample_binomial: trials < 0");
  if (p < 0.0 || p > 1.0)
    throw std::invalid_argument("sample_binomial: p outside [0,1]");
  if (trials == 0 || p == 0.0) return 0;
  if (p == 1.0) return trials;
  const bool flipped = p > 0.5;
  const double ps = flipped ? 1.0 - p : p;
  std::int64_t k;
  if (double(trials) * ps < detail::kBinomialInversionThreshold)
    k = detail::binomial_inversion(trials, ps, rng);
  else
    k = detail::binomial_btrs(trials, ps, rng);
  return flipped ? trials - k : k;
}

}  // namespace giro
