#pragma once

#include "hypercert/maps.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace hypercert::detail {

/// n-fold iterate of the lift together with its Jacobian.
struct LiftIterate {
  Vec value;
  Mat jacobian;
};

LiftIterate lift_iterate(const MapModel& model, const Vec& x, std::size_t n);

/// Integer vector nearest to v.
Vec round_vec(const Vec& v);

struct FixedPointSolve {
  bool ok = false;
  Vec x;
  std::vector<double> residuals;
  std::string reason;
};

/// Newton on lift^n(x) - x - shift = 0. When `shift` is empty the integer
/// shift is re-chosen as the nearest one at every step.
FixedPointSolve newton_fixed_point(const MapModel& model, Vec x, std::size_t n, const Vec& shift, double tol,
                                   int max_iterations);

}  // namespace hypercert::detail
