#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace giro {

using Vec = std::vector<double>;

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// Small dense symmetric matrix, row-major. Sized for reward-model fitting
/// (tens of features), not bulk numerics.
class SymMat {
 public:
  explicit SymMat(int dim, double diagonal = 0.0)
      : dim_(dim), data_(std::size_t(dim) * std::size_t(dim), 0.0) {
    for (int i = 0; i < dim; ++i) at(i, i) = diagonal;
  }

  int dim() const { return dim_; }
  double& at(int i, int j) { return data_[std::size_t(i) * dim_ + j]; }
  double at(int i, int j) const { return data_[std::size_t(i) * dim_ + j]; }

  void add_outer(const Vec& x, double w) {
    for (int i = 0; i < dim_; ++i) {
      const double wi = w * x[std::size_t(i)];
      for (int j = 0; j < dim_; ++j) at(i, j) += wi * x[std::size_t(j)];
    }
  }

  void add_diagonal(double v) {
    for (int i = 0; i < dim_; ++i) at(i, i) += v;
  }

 private:
  int dim_;
  std::vector<double> data_;
};

/// Cholesky factorization A = L L^T of a symmetric positive definite matrix.
class Cholesky {
 public:
  explicit Cholesky(const SymMat& a) : dim_(a.dim()), l_(a) {
    for (int j = 0; j < dim_; ++j) {
      double d = l_.at(j, j);
      for (int k = 0; k < j; ++k) d -= l_.at(j, k) * l_.at(j, k);
      if (!(d > 0.0)) {
        ok_ = false;
        return;
      }
      const double root = std::sqrt(d);
      l_.at(j, j) = root;
      for (int i = j + 1; i < dim_; ++i) {
        double v = l_.at(i, j);
        for (int k = 0; k < j; ++k) v -= l_.at(i, k) * l_.at(j, k);
        l_.at(i, j) = v / root;
      }
    }
  }

  bool ok() const { return ok_; }

  /// Solves A x = b.
  Vec solve(const Vec& b) const {
    Vec y = forward(b);
    for (int i = dim_ - 1; i >= 0; --i) {
      double v = y[std::size_t(i)];
      for (int k = i + 1; k < dim_; ++k)
        v -= l_.at(k, i) * y[std::size_t(k)];
      y[std::size_t(i)] = v / l_.at(i, i);
    }
    return y;
  }

  /// x^T A^{-1} x, via one forward substitution.
  double quad_inverse(const Vec& x) const {
    const Vec y = forward(x);
    double s = 0.0;
    for (double v : y) s += v * v;
    return s;
  }

  /// Solves L^T w = z; w ~ N(0, A^{-1}) when z is standard normal.
  Vec solve_upper_transpose(const Vec& z) const {
    Vec w(z);
    for (int i = dim_ - 1; i >= 0; --i) {
      double v = w[std::size_t(i)];
      for (int k = i + 1; k < dim_; ++k)
        v -= l_.at(k, i) * w[std::size_t(k)];
      w[std::size_t(i)] = v / l_.at(i, i);
    }
    return w;
  }

 private:
  Vec forward(const Vec& b) const {
    if (int(b.size()) != dim_)
      throw std::invalid_argument("cholesky: dimension mismatch");
    Vec y(b);
    for (int i = 0; i < dim_; ++i) {
      double v = y[std::size_t(i)];
      for (int k = 0; k < i; ++k) v -= l_.at(i, k) * y[std::size_t(k)];
      y[std::size_t(i)] = v / l_.at(i, i);
    }
    return y;
  }

  int dim_;
  SymMat l_;
  bool ok_ = true;
};

}  // namespace giro
