#pragma once

#include "hypercert/periodic.hpp"

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace hypercert {

/// Linear subspace of the tangent space at `base`, stored as an orthonormal
/// basis (columns). A 0-column basis is the trivial subspace.
class Subspace {
 public:
  Subspace() = default;
  /// Orthonormalises the columns of `vectors` (Gram-Schmidt, in order).
  Subspace(StatePoint base, const Mat& vectors);
  static Subspace trivial(StatePoint base, int ambient);
  static Subspace line(StatePoint base, const Vec& direction);
  static Subspace whole(StatePoint base, int ambient);

  [[nodiscard]] int dim() const { return static_cast<int>(basis_.cols()); }
  [[nodiscard]] int ambient() const { return static_cast<int>(basis_.rows()); }
  [[nodiscard]] const Mat& basis() const { return basis_; }
  [[nodiscard]] const StatePoint& base() const { return base_; }

  /// Image under a linear map, re-orthonormalised and re-based.
  [[nodiscard]] Subspace mapped(const Mat& m, const StatePoint& new_base) const;

 private:
  StatePoint base_;
  Mat basis_;
};

/// Largest principal angle between two subspaces of equal dimension.
double principal_angle(const Subspace& a, const Subspace& b);

/// Cones about a pair of complementary lines: v = v_s + v_u lies in the
/// unstable cone iff width |v_s| < |v_u|, in the stable cone iff width |v_u| < |v_s|.
struct ConeSpec {
  Vec stable_axis;
  Vec unstable_axis;
  double width = 0.5;

  [[nodiscard]] bool in_unstable_cone(const Vec& v) const;
  [[nodiscard]] bool in_stable_cone(const Vec& v) const;
};

struct SplittingSample {
  StatePoint point;
  Subspace first;   // contracting / weak bundle (E^cs)
  Subspace second;  // expanding / strong bundle (E^cu)
  std::optional<std::size_t> successor;  // index of g(point) in the sample, if present
  double residual = 0.0;                 // angle between Dg E(x) and E(g x)
};

struct ModulusBin {
  double distance = 0.0;  // upper edge of the bin
  double max_angle = 0.0;
};

struct SplittingField {
  std::string model_id;
  std::vector<SplittingSample> samples;
  double convergence = 0.0;  // last inter-step angle change (cone iteration)

  [[nodiscard]] double invariance_residual() const;
  [[nodiscard]] bool orbit_closed() const;
};

SplittingField periodic_splitting(const PeriodicOrbit& orbit);
/// Periodic splittings of several orbits merged into one orbit-closed field.
SplittingField periodic_splitting(const std::vector<PeriodicOrbit>& orbits);

/// Field with the same two lines at every sample.
SplittingField constant_field(const MapModel& model, const std::vector<StatePoint>& samples, const Vec& first,
                              const Vec& second);

/// Pushes unstable cones forward from g^{-steps}(x) and pulls stable cones
/// back from g^{steps}(x). `initial` holds one cone for all samples or one
/// per sample.
SplittingField cone_field_iterate(const MapModel& model, const std::vector<StatePoint>& samples,
                                  const std::vector<ConeSpec>& initial, std::size_t steps);

struct DominationCertificate {
  std::size_t l = 1;
  double lambda = 0.0;  // worst ratio sup|Dg^l E| / inf|Dg^l E^|
  std::size_t worst_sample = 0;
  std::size_t samples = 0;
  bool pass = false;
};

DominationCertificate domination_check(const MapModel& model, const SplittingField& field, std::size_t l);

struct ExtensionOptions {
  std::optional<double> radius;   // default: from the continuity modulus
  std::size_t transport_steps = 12;
  std::size_t candidates = 3;     // nearest sources compared for the disagreement
};

struct Extension {
  SplittingField field;
  double disagreement = 0.0;  // max angle between candidate extensions
  double radius = 0.0;
};

/// Extends a field known on (periodic) samples to targets by transporting
/// bases from the sources nearest to g^{-k}(x) (strong bundle) and g^{k}(x)
/// (weak bundle) and orthonormalising.
Extension gram_schmidt_extend(const MapModel& model, const SplittingField& field,
                              const std::vector<StatePoint>& targets, const ExtensionOptions& options = {});

struct HyperbolicCertificate {
  double c = 0.0;
  double lambda = 0.0;
  std::size_t n_check = 0;
  std::vector<double> margins;  // per sample: max_n |Dg^{+-n}|_E| / (c lambda^n)
  bool pass = false;
};

/// Fits lambda from the horizon-N rate and then the least c for n <= N.
HyperbolicCertificate hyperbolic_set_certificate(const MapModel& model, const SplittingField& field,
                                                 std::size_t n_check);

/// Max angle between bundles over sample pairs, binned by distance
/// (dyadic edges), cumulative so the profile is monotone.
std::vector<ModulusBin> splitting_continuity_modulus(const SplittingField& field);

/// Largest bin edge whose modulus stays below `threshold` (0 if none).
double extension_radius(const std::vector<ModulusBin>& modulus, double threshold = 0.1);

void write_splitting_csv(std::ostream& out, const SplittingField& field);

}  // namespace hypercert
