#pragma once

#include "hypercert/types.hpp"

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace hypercert {

enum class Family { doubling, perturbed_doubling, cat_map, perturbed_cat, custom_closed_form };

std::string to_string(Family f);
Family family_from_string(const std::string& name);

/// User-supplied closed form. `lift_on_cell` is evaluated on canonical
/// coordinates in [0,1)^d; the lift elsewhere is obtained from the integer
/// `linear_part` (the degree for circles, the homotopy matrix for tori).
struct CustomForm {
  int dim = 1;
  Mat linear_part;
  std::function<Vec(const Vec&)> lift_on_cell;
  std::function<Mat(const Vec&)> jacobian;
  std::function<Vec(const Vec&)> inverse;  // required when invertible
  bool invertible = false;
  std::string description = "custom";
};

/// A smooth self-map of S^1 or T^2 with exact derivative.
///
/// Instances are immutable and cheap to copy (custom forms are shared).
class MapModel {
 public:
  static MapModel doubling();
  /// g_s(x) = 2x + (s / 2pi) sin(2 pi x) mod 1.
  static MapModel perturbed_doubling(double s);
  static MapModel cat_map();
  /// cat_map composed with the shear (x, y) -> (x + (s / 2pi) sin(2 pi y), y).
  static MapModel perturbed_cat(double s);
  static MapModel custom(CustomForm form);
  /// Circle map from expression strings in the variable x, e.g.
  /// lift "2*x + 0.1*sin(2*pi*x)", derivative "2 + 0.2*pi*cos(2*pi*x)".
  static MapModel custom_circle(const std::string& lift_expr, const std::string& derivative_expr,
                                int degree);

  [[nodiscard]] Family family() const { return family_; }
  [[nodiscard]] int dim() const { return dim_; }
  /// Degree of a circle map; |det| of the linear part for a torus map.
  [[nodiscard]] int degree() const { return degree_; }
  [[nodiscard]] bool invertible() const { return invertible_; }
  [[nodiscard]] bool is_circle() const { return dim_ == 1; }
  [[nodiscard]] const std::vector<double>& parameters() const { return params_; }
  /// Perturbation strength s (0 for the linear families).
  [[nodiscard]] double strength() const { return params_.empty() ? 0.0 : params_.front(); }
  [[nodiscard]] const std::string& id() const { return id_; }
  [[nodiscard]] const Mat& linear_part() const { return linear_part_; }
  /// True for the unperturbed linear models (doubling, cat_map, or s == 0).
  [[nodiscard]] bool is_linear() const;

  /// Radius of the balls on which inverse branches are treated as defined.
  [[nodiscard]] double branch_radius() const { return branch_radius_; }
  [[nodiscard]] MapModel with_branch_radius(double r) const;

  /// Same family with a different perturbation strength.
  [[nodiscard]] MapModel with_strength(double s) const;

  /// Continuous lift on R^d (equivariant under Z^d translations).
  [[nodiscard]] Vec lift(const Vec& x) const;
  /// Jacobian at an arbitrary real point (periodic in x).
  [[nodiscard]] Mat jacobian_at(const Vec& x) const;
  /// Exact inverse of an invertible model at canonical coordinates.
  [[nodiscard]] Vec inverse_at(const Vec& y) const;

 private:
  MapModel() = default;

  Family family_ = Family::doubling;
  int dim_ = 1;
  int degree_ = 2;
  bool invertible_ = false;
  std::vector<double> params_;
  std::string id_;
  Mat linear_part_;
  double branch_radius_ = 0.01;
  std::shared_ptr<const CustomForm> custom_;
};

/// Ordered list x, g(x), ..., g^n(x).
struct OrbitSegment {
  std::string model_id;
  std::vector<StatePoint> points;

  [[nodiscard]] std::size_t length() const { return points.empty() ? 0 : points.size() - 1; }
};

struct InverseBranch {
  StatePoint preimage;
  Mat derivative;  // [Dg(preimage)]^{-1}
};

struct ConormScan {
  double value = 0.0;
  StatePoint argmin;
};

StatePoint eval_map(const MapModel& model, const StatePoint& x);
Mat jacobian(const MapModel& model, const StatePoint& x);

/// All preimages of y (degree-many on the circle, one for invertible maps)
/// with the branch derivative. Throws NumericalError when a preimage is a
/// critical point.
std::vector<InverseBranch> inverse_branches(const MapModel& model, const StatePoint& y);

OrbitSegment iterate_orbit(const MapModel& model, const StatePoint& x, std::size_t n);

/// Minimum over a uniform grid (grid_size per axis) of ||Dg(x)^{-1}||^{-1}.
ConormScan min_conorm_scan(const MapModel& model, std::size_t grid_size);

// ---- circle helpers shared by the orbit finder and the conjugacy builder ----

/// Preimages of y, one per branch, ordered by branch index. Never throws on
/// critical points.
std::vector<double> circle_preimages(const MapModel& model, double y);

/// Preimage of y inside branch `branch` (left-closed partition at the
/// preimages of 0).
double circle_branch_preimage(const MapModel& model, int branch, double y);

/// Branch index of x in [0,1): the branch intervals are [c_j, c_{j+1}) with
/// c_j the preimages of 0 (left-closed convention).
int circle_branch_index(const MapModel& model, double x);

/// Branch cut points c_0 = 0 < c_1 < ... < c_{k-1}.
std::vector<double> circle_branch_cuts(const MapModel& model);

}  // namespace hypercert
