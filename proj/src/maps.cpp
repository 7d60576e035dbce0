#include "hypercert/maps.hpp"

#include "expression.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

namespace hypercert {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kCriticalDerivative = 1e-9;

Mat cat_matrix() {
  Mat a(2, 2);
  a << 2.0, 1.0, 1.0, 1.0;
  return a;
}

std::string format_param(double s) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", s);
  return buf;
}

Vec floor_vec(const Vec& x) {
  Vec f(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) f(i) = std::floor(x(i));
  return f;
}

}  // namespace

std::string to_string(Family f) {
  switch (f) {
    case Family::doubling: return "doubling";
    case Family::perturbed_doubling: return "perturbed_doubling";
    case Family::cat_map: return "cat_map";
    case Family::perturbed_cat: return "perturbed_cat";
    case Family::custom_closed_form: return "custom_closed_form";
  }
  return "unknown";
}

Family family_from_string(const std::string& name) {
  for (Family f : {Family::doubling, Family::perturbed_doubling, Family::cat_map, Family::perturbed_cat,
                   Family::custom_closed_form}) {
    if (to_string(f) == name) return f;
  }
  throw PreconditionError("unknown model family '" + name + "'");
}

MapModel MapModel::doubling() {
  MapModel m;
  m.family_ = Family::doubling;
  m.dim_ = 1;
  m.degree_ = 2;
  m.invertible_ = false;
  m.id_ = "doubling";
  m.linear_part_ = Mat::Constant(1, 1, 2.0);
  return m;
}

MapModel MapModel::perturbed_doubling(double s) {
  if (!std::isfinite(s) || s < 0.0) throw PreconditionError("perturbed_doubling: s must be finite and >= 0");
  MapModel m = doubling();
  m.family_ = Family::perturbed_doubling;
  m.params_ = {s};
  m.id_ = "perturbed_doubling(s=" + format_param(s) + ")";
  return m;
}

MapModel MapModel::cat_map() {
  MapModel m;
  m.family_ = Family::cat_map;
  m.dim_ = 2;
  m.degree_ = 1;
  m.invertible_ = true;
  m.id_ = "cat_map";
  m.linear_part_ = cat_matrix();
  return m;
}

MapModel MapModel::perturbed_cat(double s) {
  if (!std::isfinite(s)) throw PreconditionError("perturbed_cat: s must be finite");
  MapModel m = cat_map();
  m.family_ = Family::perturbed_cat;
  m.params_ = {s};
  m.id_ = "perturbed_cat(s=" + format_param(s) + ")";
  return m;
}

MapModel MapModel::custom(CustomForm form) {
  if (form.dim != 1 && form.dim != 2) throw PreconditionError("custom model: dimension must be 1 or 2");
  if (!form.lift_on_cell || !form.jacobian) {
    throw PreconditionError("custom model: closed form and derivative formula are both required");
  }
  if (form.linear_part.rows() != form.dim || form.linear_part.cols() != form.dim) {
    throw PreconditionError("custom model: linear part must be dim x dim");
  }
  if (form.invertible && !form.inverse) throw PreconditionError("custom model: invertible model needs an inverse");
  MapModel m;
  m.family_ = Family::custom_closed_form;
  m.dim_ = form.dim;
  m.invertible_ = form.invertible;
  m.linear_part_ = form.linear_part;
  m.degree_ = static_cast<int>(std::lround(std::abs(form.linear_part.determinant())));
  if (form.dim == 1 && form.linear_part(0, 0) < 1.0) {
    throw PreconditionError("custom circle model: degree must be positive");
  }
  m.id_ = "custom(" + form.description + ")";
  m.custom_ = std::make_shared<const CustomForm>(std::move(form));
  return m;
}

MapModel MapModel::custom_circle(const std::string& lift_expr, const std::string& derivative_expr, int degree) {
  if (degree < 1) throw PreconditionError("custom circle model: degree must be >= 1");
  detail::Expression lift(lift_expr, {"x"});
  detail::Expression deriv(derivative_expr, {"x"});
  const double zero = 0.0, one = 1.0;
  const double jump = lift(&one) - lift(&zero);
  if (!std::isfinite(jump) || std::abs(jump - degree) > 1e-9) {
    throw PreconditionError("custom circle model: lift(1) - lift(0) = " + format_param(jump) +
                            " does not match degree " + std::to_string(degree));
  }
  CustomForm form;
  form.dim = 1;
  form.linear_part = Mat::Constant(1, 1, static_cast<double>(degree));
  form.lift_on_cell = [lift](const Vec& x) {
    Vec r(1);
    r(0) = lift(x.data());
    return r;
  };
  form.jacobian = [deriv](const Vec& x) { return Mat::Constant(1, 1, deriv(x.data())); };
  form.description = lift_expr;
  return custom(std::move(form));
}

bool MapModel::is_linear() const {
  switch (family_) {
    case Family::doubling:
    case Family::cat_map: return true;
    case Family::perturbed_doubling:
    case Family::perturbed_cat: return strength() == 0.0;
    case Family::custom_closed_form: return false;
  }
  return false;
}

MapModel MapModel::with_branch_radius(double r) const {
  if (!(r > 0.0) || r >= 0.5) throw PreconditionError("branch radius must lie in (0, 0.5)");
  MapModel m = *this;
  m.branch_radius_ = r;
  return m;
}

MapModel MapModel::with_strength(double s) const {
  MapModel m;
  switch (family_) {
    case Family::perturbed_doubling: m = perturbed_doubling(s); break;
    case Family::perturbed_cat: m = perturbed_cat(s); break;
    default: throw PreconditionError("with_strength: " + id_ + " is not a perturbed family");
  }
  m.branch_radius_ = branch_radius_;
  return m;
}

Vec MapModel::lift(const Vec& x) const {
  switch (family_) {
    case Family::doubling: return 2.0 * x;
    case Family::perturbed_doubling: {
      const double s = params_[0];
      Vec r(1);
      r(0) = 2.0 * x(0) + (s / kTwoPi) * std::sin(kTwoPi * x(0));
      return r;
    }
    case Family::cat_map: return linear_part_ * x;
    case Family::perturbed_cat: {
      const double s = params_[0];
      const double u = x(0) + (s / kTwoPi) * std::sin(kTwoPi * x(1));
      Vec r(2);
      r(0) = 2.0 * u + x(1);
      r(1) = u + x(1);
      return r;
    }
    case Family::custom_closed_form: {
      const Vec fl = floor_vec(x);
      const Vec cell = x - fl;
      return custom_->lift_on_cell(cell) + linear_part_ * fl;
    }
  }
  return x;
}

Mat MapModel::jacobian_at(const Vec& x) const {
  switch (family_) {
    case Family::doubling: return Mat::Constant(1, 1, 2.0);
    case Family::perturbed_doubling:
      return Mat::Constant(1, 1, 2.0 + params_[0] * std::cos(kTwoPi * x(0)));
    case Family::cat_map: return linear_part_;
    case Family::perturbed_cat: {
      const double sc = params_[0] * std::cos(kTwoPi * x(1));
      Mat j(2, 2);
      j << 2.0, 2.0 * sc + 1.0, 1.0, sc + 1.0;
      return j;
    }
    case Family::custom_closed_form: {
      Vec cell(x.size());
      for (Eigen::Index i = 0; i < x.size(); ++i) cell(i) = wrap_unit(x(i));
      return custom_->jacobian(cell);
    }
  }
  return Mat::Identity(dim_, dim_);
}

Vec MapModel::inverse_at(const Vec& y) const {
  if (!invertible_) throw PreconditionError("inverse_at: " + id_ + " is not invertible");
  switch (family_) {
    case Family::cat_map: {
      Vec r(2);
      r(0) = y(0) - y(1);
      r(1) = -y(0) + 2.0 * y(1);
      return r;
    }
    case Family::perturbed_cat: {
      const double u = y(0) - y(1);
      const double v = -y(0) + 2.0 * y(1);
      Vec r(2);
      r(0) = u - (params_[0] / kTwoPi) * std::sin(kTwoPi * v);
      r(1) = v;
      return r;
    }
    case Family::custom_closed_form: return custom_->inverse(y);
    default: break;
  }
  throw PreconditionError("inverse_at: no inverse formula for " + id_);
}

StatePoint eval_map(const MapModel& model, const StatePoint& x) {
  if (x.dim() != model.dim()) throw PreconditionError("eval_map: dimension mismatch");
  return StatePoint(model.lift(x.coords()));
}

Mat jacobian(const MapModel& model, const StatePoint& x) {
  if (x.dim() != model.dim()) throw PreconditionError("jacobian: dimension mismatch");
  return model.jacobian_at(x.coords());
}

namespace {

double lift1(const MapModel& m, double x) {
  Vec v(1);
  v(0) = x;
  return m.lift(v)(0);
}

double deriv1(const MapModel& m, double x) {
  Vec v(1);
  v(0) = x;
  return m.jacobian_at(v)(0, 0);
}

// Solves lift(x) = target on [0, 1] by Newton steps safeguarded with bisection.
double solve_monotone_lift(const MapModel& m, double target, double guess) {
  double lo = 0.0, hi = 1.0;
  double x = std::clamp(guess, lo, hi);
  for (int it = 0; it < 400; ++it) {
    const double fx = lift1(m, x) - target;
    if (fx == 0.0) return x;
    if (fx < 0.0) lo = x;
    else hi = x;
    const double d = deriv1(m, x);
    double next = x - fx / d;
    if (!(d > 0.0) || !(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x)) ||
        hi - lo <= 4.0 * std::numeric_limits<double>::epsilon()) {
      return next;
    }
    x = next;
  }
  return x;
}

}  // namespace

double circle_branch_preimage(const MapModel& model, int branch, double y) {
  if (!model.is_circle()) throw PreconditionError("circle_branch_preimage: circle model required");
  const int k = model.degree();
  if (branch < 0 || branch >= k) throw PreconditionError("circle_branch_preimage: branch index out of range");
  const double base = lift1(model, 0.0);
  const double target = base + branch + wrap_unit(y - base);
  const double guess = (target - base) / k;
  const double x = solve_monotone_lift(model, target, guess);
  // The last branch must not round over to the first one.
  if (x >= 1.0 && branch == k - 1) return std::nextafter(1.0, 0.0);
  return wrap_unit(x);
}

std::vector<double> circle_preimages(const MapModel& model, double y) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(model.degree()));
  for (int j = 0; j < model.degree(); ++j) out.push_back(circle_branch_preimage(model, j, y));
  return out;
}

int circle_branch_index(const MapModel& model, double x) {
  const double rel = lift1(model, wrap_unit(x)) - lift1(model, 0.0);
  const int j = static_cast<int>(std::floor(rel));
  return std::clamp(j, 0, model.degree() - 1);
}

std::vector<double> circle_branch_cuts(const MapModel& model) {
  std::vector<double> cuts{0.0};
  const double base = lift1(model, 0.0);
  for (int j = 1; j < model.degree(); ++j) {
    cuts.push_back(solve_monotone_lift(model, base + j, static_cast<double>(j) / model.degree()));
  }
  return cuts;
}

std::vector<InverseBranch> inverse_branches(const MapModel& model, const StatePoint& y) {
  if (y.dim() != model.dim()) throw PreconditionError("inverse_branches: dimension mismatch");
  std::vector<InverseBranch> out;
  if (model.is_circle()) {
    if (model.degree() < 2 && !model.invertible()) {
      throw PreconditionError("inverse_branches: circle model of degree >= 2 required");
    }
    for (double x : circle_preimages(model, y[0])) {
      const double d = deriv1(model, x);
      if (std::abs(d) < kCriticalDerivative) {
        throw NumericalError("inverse_branches: zero derivative at preimage " + format_param(x) + " of " +
                             model.id() + " (not a local diffeomorphism)");
      }
      out.push_back({StatePoint(x), Mat::Constant(1, 1, 1.0 / d)});
    }
    return out;
  }
  if (!model.invertible()) throw PreconditionError("inverse_branches: torus model must be invertible");
  const StatePoint pre(model.inverse_at(y.coords()));
  const Mat j = model.jacobian_at(pre.coords());
  if (std::abs(j.determinant()) < kCriticalDerivative) {
    throw NumericalError("inverse_branches: singular Jacobian at preimage");
  }
  out.push_back({pre, j.inverse()});
  return out;
}

OrbitSegment iterate_orbit(const MapModel& model, const StatePoint& x, std::size_t n) {
  OrbitSegment seg;
  seg.model_id = model.id();
  seg.points.reserve(n + 1);
  seg.points.push_back(x);
  for (std::size_t i = 0; i < n; ++i) seg.points.push_back(eval_map(model, seg.points.back()));
  return seg;
}

ConormScan min_conorm_scan(const MapModel& model, std::size_t grid_size) {
  if (grid_size < 2) throw PreconditionError("min_conorm_scan: grid_size must be >= 2");
  ConormScan best{std::numeric_limits<double>::infinity(), {}};
  const double h = 1.0 / static_cast<double>(grid_size);
  if (model.is_circle()) {
    for (std::size_t i = 0; i < grid_size; ++i) {
      const StatePoint x(static_cast<double>(i) * h);
      const double c = conorm(jacobian(model, x));
      if (c < best.value) best = {c, x};
    }
    return best;
  }
  for (std::size_t i = 0; i < grid_size; ++i) {
    for (std::size_t j = 0; j < grid_size; ++j) {
      const StatePoint x(static_cast<double>(i) * h, static_cast<double>(j) * h);
      const double c = conorm(jacobian(model, x));
      if (c < best.value) best = {c, x};
    }
  }
  return best;
}

}  // namespace hypercert
