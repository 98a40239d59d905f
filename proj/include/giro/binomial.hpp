#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace giro {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kPosInf = std::numeric_limits<double>::infinity();

/// log(k!), table-backed for the small arguments that dominate grid work.
inline double log_factorial(std::int64_t k) {
  if (k < 0) throw std::invalid_argument("log_factorial: negative argument");
  static const std::vector<double> table = [] {
    std::vector<double> t(4096);
    t[0] = 0.0;
    for (std::size_t i = 1; i < t.size(); ++i)
      t[i] = t[i - 1] + std::log(double(i));
    return t;
  }();
  if (std::size_t(k) < table.size()) return table[std::size_t(k)];
  return std::lgamma(double(k) + 1.0);
}

inline double log_binom_coeff(std::int64_t n, std::int64_t x) {
  if (x < 0 || x > n) return kNegInf;
  return log_factorial(n) - log_factorial(x) - log_factorial(n - x);
}

/// log B(x; n, p) with the 0^0 = 1 convention at p in {0, 1}.
inline double log_binom_pmf(std::int64_t x, std::int64_t n, double p) {
  if (n < 0 || p < 0.0 || p > 1.0)
    throw std::invalid_argument("log_binom_pmf: bad parameters");
  if (x < 0 || x > n) return kNegInf;
  if (p == 0.0) return x == 0 ? 0.0 : kNegInf;
  if (p == 1.0) return x == n ? 0.0 : kNegInf;
  return log_binom_coeff(n, x) + double(x) * std::log(p) +
         double(n - x) * std::log1p(-p);
}

inline double binom_pmf(std::int64_t x, std::int64_t n, double p) {
  return std::exp(log_binom_pmf(x, n, p));
}

/// log Pr[X >= k_from] for X ~ B(n, p). Sums log-pmf terms from the tails
/// toward the mode so small contributions accumulate first.
inline double log_binom_upper_tail(std::int64_t k_from, std::int64_t n,
                                   double p) {
  if (n < 0 || p < 0.0 || p > 1.0)
    throw std::invalid_argument("log_binom_upper_tail: bad parameters");
  if (k_from <= 0) return 0.0;
  if (k_from > n) return kNegInf;
  if (p == 0.0) return kNegInf;       // k_from >= 1 excludes the only atom
  if (p == 1.0) return 0.0;           // the atom at n is inside the tail
  std::int64_t peak = std::int64_t(std::floor(double(n + 1) * p));
  if (peak > n) peak = n;
  if (peak < k_from) peak = k_from;
  const double lmax = log_binom_pmf(peak, n, p);
  long double acc = 0.0L;
  for (std::int64_t y = n; y > peak; --y)
    acc += std::exp(double(log_binom_pmf(y, n, p) - lmax));
  long double left = 0.0L;
  for (std::int64_t y = k_from; y < peak; ++y)
    left += std::exp(double(log_binom_pmf(y, n, p) - lmax));
  acc += left + 1.0L;  // the peak term itself
  return lmax + std::log(double(acc));
}

inline double binom_upper_tail(std::int64_t k_from, std::int64_t n, double p) {
  return std::exp(log_binom_upper_tail(k_from, n, p));
}

/// Bernoulli KL divergence d(p1, p2) with the 0 log 0 = 0 convention.
/// p2 in {0, 1} with mismatched p1 yields the +infinity sentinel.
inline double kl_bernoulli(double p1, double p2) {
  if (p1 < 0.0 || p1 > 1.0 || p2 < 0.0 || p2 > 1.0)
    throw std::invalid_argument("kl_bernoulli: probabilities outside [0,1]");
  if (p2 == 0.0) return p1 == 0.0 ? 0.0 : kPosInf;
  if (p2 == 1.0) return p1 == 1.0 ? 0.0 : kPosInf;
  double d = 0.0;
  if (p1 > 0.0) d += p1 * std::log(p1 / p2);
  if (p1 < 1.0) d += (1.0 - p1) * std::log((1.0 - p1) / (1.0 - p2));
  return d;
}

/// Smallest integer >= v, tolerant of float noise on exact integers.
inline std::int64_t ceil_index(double v) {
  return std::int64_t(std::ceil(v - 1e-9));
}

}  // namespace giro
