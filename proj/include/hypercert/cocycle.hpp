#pragma once

#include "hypercert/periodic.hpp"

#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace hypercert {

enum class CocycleKind { inverse_norm, stable_norm, unstable_inverse_norm };

std::string to_string(CocycleKind k);
CocycleKind cocycle_kind_from_string(const std::string& name);

/// a_j = log of the relevant norm at step j.
struct CocycleSequence {
  std::vector<double> values;
  CocycleKind kind = CocycleKind::inverse_norm;
  std::string source;

  [[nodiscard]] std::size_t size() const { return values.size(); }
  [[nodiscard]] double mean() const;
};

/// Log-norm sequence along x_0..x_{n-1} of a segment.
///
/// The restricted kinds need the invariant direction: either one unit
/// vector at x_0 (transported by the cocycle) or one per point.
CocycleSequence log_conorm_sequence(const MapModel& model, const OrbitSegment& segment, CocycleKind kind,
                                    const std::vector<Vec>& directions = {});

/// Sequence of one orbit period, restricted kinds use the period-map splitting.
CocycleSequence orbit_sequence(const PeriodicOrbit& orbit, CocycleKind kind);

struct OrbitMargin {
  std::string orbit;
  std::size_t period = 0;
  double margin = 0.0;  // geometric-mean rate over one period
};

struct NUECertificate {
  std::size_t max_period = 0;
  double varsigma = 0.0;
  double eta = 0.0;
  std::vector<OrbitMargin> margins;
  std::vector<std::string> violators;
  bool pass = false;
};

/// Uniform margin of prod ||Dg^{-1}|| over one period, across all orbits.
NUECertificate nue_certificate(const std::vector<PeriodicOrbit>& orbits);

struct NUHCertificate {
  std::size_t max_period = 0;
  double varsigma = 0.0;
  double eta = 0.0;
  std::vector<OrbitMargin> stable_margins;
  std::vector<OrbitMargin> unstable_margins;
  std::vector<EigenSplit> splittings;  // aligned with the input orbits
  std::vector<std::string> violators;  // orbit id: reason
  bool pass = false;
};

NUHCertificate nuh_certificate(const std::vector<PeriodicOrbit>& orbits);

/// Indices k in 1..n such that every backward partial sum of length i ending
/// at k-1 is at most i log(varsigma).
std::vector<std::size_t> hyperbolic_times(const CocycleSequence& seq, double varsigma);

struct PlissCount {
  std::size_t guaranteed = 0;
  std::size_t actual = 0;
  double mean = 0.0;
  double floor = 0.0;  // min a_j
};

/// Guaranteed density of varsigma'-hyperbolic times versus the actual count.
/// Throws PreconditionError when the mean exceeds log(varsigma).
PlissCount pliss_density(const CocycleSequence& seq, double varsigma, double varsigma_prime);
PlissCount pliss_density(const CocycleSequence& seq, double varsigma);  // varsigma' = sqrt(varsigma)

/// Finite-horizon exponents from repeated QR of the cocycle, descending.
std::vector<double> lyapunov_spectrum(const MapModel& model, const StatePoint& x, std::size_t n);

/// Weighted metric |v|_x = rho(x) |v| with
/// rho(x) = sum_{j<N} sigma0^{-j} |(g^j)'(x)|, sigma0 = varsigma^{-1/2}.
struct AdaptedMetric {
  MapModel model = MapModel::doubling();
  std::size_t horizon = 0;
  std::size_t grid = 0;
  double sigma0 = 0.0;
  double sigma = 0.0;          // grid minimum of the one-step factor
  double refined_sigma = 0.0;  // same on the 2x grid
  double argmin = 0.0;
  bool pass = false;
  std::string failure;

  [[nodiscard]] double weight(double x) const;
  /// rho(g x) |g'(x)| / rho(x)
  [[nodiscard]] double factor_at(double x) const;
};

AdaptedMetric adapted_metric(const MapModel& model, const NUECertificate& cert, std::size_t horizon = 8,
                             std::size_t grid = 1u << 14);

struct ShadowedTimeCheck {
  bool pass = false;
  std::optional<std::size_t> failing_prefix;  // smallest i that breaks the inequality
  double max_distance = 0.0;
};

/// Whether n' (a varsigma'-hyperbolic time of the p-segment) is a
/// sqrt(varsigma')-hyperbolic time of the x-segment. Segments must be
/// pointwise within `max_distance`.
ShadowedTimeCheck verify_shadowed_hyperbolic_time(const MapModel& model, const OrbitSegment& p_orbit,
                                                  const OrbitSegment& x_orbit, std::size_t n_prime,
                                                  double varsigma_prime, double max_distance);

void write_cocycle_csv(std::ostream& out, const CocycleSequence& seq);
CocycleSequence read_cocycle_csv(std::istream& in);

}  // namespace hypercert
