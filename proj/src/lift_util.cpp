#include "lift_util.hpp"

#include <cmath>

namespace hypercert::detail {

LiftIterate lift_iterate(const MapModel& model, const Vec& x, std::size_t n) {
  LiftIterate out{x, Mat::Identity(model.dim(), model.dim())};
  for (std::size_t i = 0; i < n; ++i) {
    out.jacobian = model.jacobian_at(out.value) * out.jacobian;
    out.value = model.lift(out.value);
  }
  return out;
}

Vec round_vec(const Vec& v) {
  Vec r(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) r(i) = std::round(v(i));
  return r;
}

FixedPointSolve newton_fixed_point(const MapModel& model, Vec x, std::size_t n, const Vec& shift, double tol,
                                   int max_iterations) {
  FixedPointSolve out;
  const int d = model.dim();
  for (int it = 0;; ++it) {
    const LiftIterate li = lift_iterate(model, x, n);
    const Vec gap = li.value - x;
    const Vec m = shift.size() == 0 ? round_vec(gap) : shift;
    const Vec r = gap - m;
    const double res = r.norm();
    out.residuals.push_back(res);
    if (!std::isfinite(res)) {
      out.reason = "non-finite residual";
      out.x = x;
      return out;
    }
    if (res < tol) {
      out.ok = true;
      out.x = x;
      return out;
    }
    if (it >= max_iterations) {
      out.reason = "iteration cap exceeded";
      out.x = x;
      return out;
    }
    const Mat a = li.jacobian - Mat::Identity(d, d);
    const double det = a.determinant();
    if (!std::isfinite(det) || std::abs(det) < 1e-14) {
      out.reason = "singular Newton matrix";
      out.x = x;
      return out;
    }
    const Vec step = a.inverse() * r;
    if (step.norm() == 0.0) {
      // Residual is at rounding level for this point; no further progress possible.
      out.ok = res < 1e3 * tol;
      out.x = x;
      if (!out.ok) out.reason = "stalled";
      return out;
    }
    x -= step;
  }
}

}  // namespace hypercert::detail
