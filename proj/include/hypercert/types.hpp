#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace hypercert {

// Dimension is 1 (circle) or 2 (torus); storage is inline, no heap.
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 2, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 2, 2>;

/// Precondition violated by the caller (bad argument, unsupported model).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure could not produce its result (singular matrix,
/// zero derivative, non-convergence).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Wraps a real number into [0, 1).
inline double wrap_unit(double v) {
  double r = v - std::floor(v);
  if (r >= 1.0) r = 0.0;
  return r;
}

/// Signed representative of v modulo 1 in [-1/2, 1/2).
inline double centered_mod(double v) { return v - std::floor(v + 0.5); }

/// A point of S^1 or T^2 in canonical coordinates.
class StatePoint {
 public:
  StatePoint() = default;
  explicit StatePoint(double x) : coords_(1) { coords_(0) = wrap_unit(x); }
  StatePoint(double x, double y) : coords_(2) {
    coords_(0) = wrap_unit(x);
    coords_(1) = wrap_unit(y);
  }
  explicit StatePoint(const Vec& v) : coords_(v.size()) {
    if (v.size() < 1 || v.size() > 2) throw PreconditionError("StatePoint: dimension must be 1 or 2");
    for (Eigen::Index i = 0; i < v.size(); ++i) coords_(i) = wrap_unit(v(i));
  }

  [[nodiscard]] int dim() const { return static_cast<int>(coords_.size()); }
  [[nodiscard]] const Vec& coords() const { return coords_; }
  [[nodiscard]] double operator[](int i) const { return coords_(i); }

  friend bool operator==(const StatePoint& a, const StatePoint& b) {
    return a.coords_.size() == b.coords_.size() && a.coords_ == b.coords_;
  }

 private:
  Vec coords_;
};

/// Flat metric on S^1 / T^2: componentwise min(|d|, 1 - |d|), Euclidean norm.
inline double flat_distance(const StatePoint& a, const StatePoint& b) {
  if (a.dim() != b.dim()) throw PreconditionError("flat_distance: dimension mismatch");
  double acc = 0.0;
  for (int i = 0; i < a.dim(); ++i) {
    const double d = std::abs(centered_mod(a[i] - b[i]));
    acc += d * d;
  }
  return std::sqrt(acc);
}

/// Displacement from a to b as the shortest lift (components in [-1/2, 1/2)).
inline Vec flat_displacement(const StatePoint& a, const StatePoint& b) {
  Vec d(a.dim());
  for (int i = 0; i < a.dim(); ++i) d(i) = centered_mod(b[i] - a[i]);
  return d;
}

/// Spectral norm of a (at most 2x2) matrix.
inline double spectral_norm(const Mat& m) {
  if (m.size() == 0) return 0.0;
  if (m.rows() == 1 && m.cols() == 1) return std::abs(m(0, 0));
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues()(0);
}

/// Conorm ||A^{-1}||^{-1}, i.e. the smallest singular value.
inline double conorm(const Mat& m) {
  if (m.rows() == 1 && m.cols() == 1) return std::abs(m(0, 0));
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues()(svd.singularValues().size() - 1);
}

/// Ordered product M_{n-1} ... M_1 M_0.
inline Mat ordered_product(const std::vector<Mat>& factors, int dim) {
  Mat p = Mat::Identity(dim, dim);
  for (const auto& m : factors) p = m * p;
  return p;
}

}  // namespace hypercert
