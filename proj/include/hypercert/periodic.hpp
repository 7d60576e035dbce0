#pragma once

#include "hypercert/maps.hpp"

#include <complex>
#include <cstddef>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace hypercert {

/// A periodic orbit of exact least period with its derivative cocycle.
struct PeriodicOrbit {
  std::string model_id;
  std::size_t period = 0;
  std::vector<StatePoint> points;  // g^j(p), j = 0..period-1
  std::vector<Mat> cocycle;        // Dg(g^j(p))
  Mat period_map;                  // Dg(g^{t-1} p) ... Dg(p)
  std::vector<std::complex<double>> eigenvalues;

  [[nodiscard]] const StatePoint& base() const { return points.front(); }
  [[nodiscard]] int dim() const { return base().dim(); }

  /// Orbit of p under the model, taking `period` as given.
  static PeriodicOrbit from_model(const MapModel& model, const StatePoint& p, std::size_t period);
  /// Orbit assembled from raw data (synthetic or imported cocycles).
  static PeriodicOrbit from_cocycle(std::string model_id, std::vector<StatePoint> points, std::vector<Mat> cocycle);
};

/// Period-map eigen-splitting of a 2x2 (or 1x1) matrix.
struct EigenSplit {
  bool ok = false;
  std::string reason;  // why the splitting is undefined
  double lambda_stable = 0.0;
  double lambda_unstable = 0.0;
  Vec stable_dir;    // empty in dimension 1
  Vec unstable_dir;
};

EigenSplit split_period_map(const Mat& period_map);

struct OrbitGap {
  std::size_t period = 0;
  std::string seed;    // itinerary word or seed point of the failed branch
  std::string reason;
};

enum class EnumerationMethod { automatic, symbolic, lattice, continuation };

struct FinderOptions {
  EnumerationMethod method = EnumerationMethod::automatic;
  double continuation_step = 0.05;
  double min_continuation_step = 1.0 / 4096.0;
  std::size_t symbolic_rounds = 400;
};

struct PeriodicSet {
  std::string model_id;
  std::size_t max_period = 0;
  std::vector<PeriodicOrbit> orbits;   // sorted by (period, base point)
  std::vector<OrbitGap> gaps;          // non-converged branches, never dropped silently
  std::map<std::size_t, std::size_t> fixed_point_counts;  // n -> #Fix(g^n)

  [[nodiscard]] bool complete() const { return gaps.empty(); }
  [[nodiscard]] std::vector<PeriodicOrbit> with_period_at_most(std::size_t t) const;
};

/// All periodic orbits of least period <= max_period.
PeriodicSet find_periodic_points(const MapModel& model, std::size_t max_period, const FinderOptions& options = {});

struct NewtonResult {
  StatePoint point;
  std::vector<double> residuals;  // flat d(g^n(x), x) before each step and at exit
};

/// Newton's method on g^n(x) = x (in the lift), iteration cap 50.
NewtonResult refine_newton(const MapModel& model, const StatePoint& x0, std::size_t n, double tol);

struct Multipliers {
  double prod_inv_norm = 0.0;                   // prod_j ||Dg(g^j p)^{-1}||
  std::optional<double> prod_stable_norm;       // prod_j ||Dg|_{E^s}||
  std::optional<double> prod_unstable_conorm;   // prod_j ||(Dg|_{E^u})^{-1}||^{-1}
  std::string splitting_issue;                  // non-empty when the splitting is undefined
};

Multipliers orbit_multipliers(const PeriodicOrbit& orbit);

/// Least period of p as a fixed point of g^n (divisor of n), tolerance 1e-6.
std::size_t least_period(const MapModel& model, const StatePoint& p, std::size_t n);

/// Short human-readable orbit id, e.g. "t=2 p=(0.333333333333)".
std::string orbit_label(const PeriodicOrbit& orbit);

/// One row per orbit point: orbit,period,index,x[,y],prod_inv_norm,prod_stable_norm,prod_unstable_conorm.
void write_orbits_csv(std::ostream& out, const std::vector<PeriodicOrbit>& orbits);

}  // namespace hypercert
