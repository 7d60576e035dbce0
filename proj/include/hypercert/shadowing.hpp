#pragma once

#include "hypercert/periodic.hpp"

#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace hypercert {

struct ShadowingResult {
  OrbitSegment segment;
  double closing_gap = 0.0;          // d(g^n x, x)
  std::vector<StatePoint> orbit;     // p, g(p), ..., g^{n-1}(p)
  std::size_t period = 0;            // least period of p (divides n)
  double epsilon = 0.0;              // max_{j<=n} d(g^j p, g^j x)
  std::optional<double> bound_constant;  // C with epsilon <= C * closing_gap
};

/// Periodic orbit shadowing a nearly closed segment x, ..., g^n(x).
ShadowingResult shadow_periodic(const MapModel& model, const OrbitSegment& segment, double alpha_max);

struct ShadowingRow {
  double alpha = 0.0;
  std::size_t trials = 0;
  std::size_t failures = 0;
  double max_epsilon = 0.0;
  double max_ratio = 0.0;  // max epsilon / alpha (0 for alpha = 0)
  std::vector<std::string> errors;
};

struct ShadowingTable {
  std::string model_id;
  std::vector<ShadowingRow> rows;
  bool monotone = false;
  bool pass = false;
};

struct ShadowingPlan {
  std::uint64_t seed = 0;
  std::size_t max_period = 6;   // trial segments follow periodic orbits up to this period
  double ratio_bound = 1e3;     // the table passes when every epsilon / alpha stays below this
};

/// Empirical epsilon(alpha). Trial i uses the same periodic point and
/// direction for every alpha, so rows are directly comparable.
ShadowingTable shadowing_constants(const MapModel& model, std::size_t trials, const std::vector<double>& alphas,
                                   const ShadowingPlan& plan);

/// Segment of length n starting near the periodic point p (period n) along
/// `direction`, with closing gap exactly `alpha` (to rounding).
OrbitSegment pseudo_closing_segment(const MapModel& model, const StatePoint& p, std::size_t n, const Vec& direction,
                                    double alpha);

/// Conjugacy h with h o g = f o h between a circle map g and the linear map f
/// of the same degree, tabulated on a dyadic grid.
class ConjugacyModel {
 public:
  ConjugacyModel(const MapModel& g, const MapModel& f, std::vector<double> table);

  [[nodiscard]] const MapModel& g() const { return g_; }
  [[nodiscard]] const MapModel& f() const { return f_; }
  [[nodiscard]] const std::vector<double>& table() const { return table_; }
  [[nodiscard]] std::vector<double>& mutable_table() { return table_; }
  [[nodiscard]] std::size_t resolution() const { return table_.size(); }
  [[nodiscard]] bool monotone() const;

  /// Itinerary evaluation at an arbitrary point.
  [[nodiscard]] double operator()(double x) const;
  /// Table value on grid points, itinerary elsewhere.
  [[nodiscard]] double at(double x) const;

  double defect_bound = 0.0;

 private:
  MapModel g_;
  MapModel f_;
  std::vector<double> table_;
};

/// h(x) = sum_j d_j k^{-(j+1)}, d_j the branch index of g^j(x).
ConjugacyModel build_conjugacy(const MapModel& g, const MapModel& f, std::size_t resolution);

/// sup over grid points of d(h(g x), f(h x)).
double conjugacy_defect(const ConjugacyModel& h, const MapModel& g, const MapModel& f, std::size_t grid);

/// d(h x, h y) <= K d(x, y)^exponent and d(x, y) <= K d(h x, h y)^exponent on every sampled pair.
struct HolderEstimate {
  double K = 0.0;
  double holder_exponent = 0.0;
  double fit_residual = 0.0;  // rms of the log-log fit
  std::size_t pairs = 0;
  double smallest_scale = 0.0;
  double largest_scale = 0.0;
};

HolderEstimate holder_estimate(const ConjugacyModel& h, std::size_t pair_count, std::uint64_t seed = 0);

struct DecayCheck {
  bool pass = true;
  double worst_margin = 0.0;  // max lhs / rhs
  std::size_t pairs = 0;
  std::optional<std::string> violation;  // "(x, y, j)" of the first violation
};

struct DecayPlan {
  std::size_t depth = 20;       // J
  double ball_radius = 1e-3;    // delta
  std::size_t max_period = 6;
  std::uint64_t seed = 0;
};

/// Checks d(g^{-j}x, g^{-j}y) <= (lambda_hat^a)^j K^{1+a} delta^{a^2} for j <= J
/// on pairs in B(p, delta/2) around periodic points, following the inverse
/// branches along the orbit of p.
DecayCheck contraction_decay_check(const MapModel& g, const HolderEstimate& h, double lambda_hat, std::size_t trials,
                                   const DecayPlan& plan = {});

enum class EigenVerdict { pass, inapplicable, conclusion_violated };
std::string to_string(EigenVerdict v);

struct EigenvalueCheck {
  EigenVerdict verdict = EigenVerdict::inapplicable;
  std::vector<double> moduli;   // eigenvalue moduli of DG(p) considered
  double hypothesis_worst = 0.0;  // max d(G^n x, G^n y) / (lambda^n d(x,y)^beta)
  std::size_t pairs = 0;
};

struct EigenvaluePlan {
  bool restrict_to_contracting = false;  // torus: only the direction that G contracts
  double ball_radius = 1e-2;
  std::size_t max_n = 10;
  std::size_t pairs = 200;
  std::uint64_t seed = 0;
};

/// G is the inverse-branch return map fixing the orbit's base point.
EigenvalueCheck eigenvalue_bound_check(const MapModel& model, const PeriodicOrbit& orbit, double lambda, double beta,
                                       const EigenvaluePlan& plan = {});

void write_shadowing_csv(std::ostream& out, const ShadowingTable& table);
void write_conjugacy_table(std::ostream& out, const ConjugacyModel& h);
ConjugacyModel read_conjugacy_table(std::istream& in, const MapModel& g, const MapModel& f);

/// Deterministic per-stream seed derivation (splitmix64 finaliser).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace hypercert
