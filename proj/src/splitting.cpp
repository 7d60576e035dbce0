#include "hypercert/splitting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

namespace hypercert {

namespace {

Mat orthonormal_columns(const Mat& v) {
  Mat q(v.rows(), v.cols());
  for (Eigen::Index c = 0; c < v.cols(); ++c) {
    Vec w = v.col(c);
    // two passes keep the basis orthonormal to rounding level
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index k = 0; k < c; ++k) w -= q.col(k) * q.col(k).dot(w);
    }
    const double n = w.norm();
    if (!(n > 1e-300) || !std::isfinite(n)) throw NumericalError("Subspace: degenerate spanning vectors");
    q.col(c) = w / n;
  }
  return q;
}

// Coordinates (alpha, beta) of v in the basis (s, u).
std::pair<double, double> cone_coordinates(const Vec& s, const Vec& u, const Vec& v) {
  Mat b(2, 2);
  b.col(0) = s;
  b.col(1) = u;
  const Vec c = b.inverse() * v;
  return {c(0), c(1)};
}

double smallest_singular_value(const Mat& m) {
  if (m.cols() == 1) return m.col(0).norm();
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues()(svd.singularValues().size() - 1);
}

double largest_singular_value(const Mat& m) {
  if (m.cols() == 0) return 0.0;
  if (m.cols() == 1) return m.col(0).norm();
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues()(0);
}

double pair_angle(const SplittingSample& a, const SplittingSample& b) {
  return std::max(principal_angle(a.first, b.first), principal_angle(a.second, b.second));
}

std::vector<StatePoint> backward_orbit(const MapModel& model, const StatePoint& x, std::size_t steps) {
  std::vector<StatePoint> out{x};
  for (std::size_t k = 0; k < steps; ++k) out.emplace_back(model.inverse_at(out.back().coords()));
  return out;
}

std::vector<StatePoint> forward_orbit(const MapModel& model, const StatePoint& x, std::size_t steps) {
  std::vector<StatePoint> out{x};
  for (std::size_t k = 0; k < steps; ++k) out.push_back(eval_map(model, out.back()));
  return out;
}

// Strong bundle at back[0] from a basis living at back[k].
Mat push_forward(const MapModel& model, const std::vector<StatePoint>& back, std::size_t k, Mat q) {
  for (std::size_t j = k; j >= 1; --j) q = orthonormal_columns(jacobian(model, back[j]) * q);
  return q;
}

// Weak bundle at fwd[0] from a basis living at fwd[k].
Mat pull_back(const MapModel& model, const std::vector<StatePoint>& fwd, std::size_t k, Mat q) {
  for (std::size_t j = k; j >= 1; --j) q = orthonormal_columns(jacobian(model, fwd[j - 1]).inverse() * q);
  return q;
}

double residual_between(const MapModel& model, const StatePoint& x, const Subspace& e1, const Subspace& e2,
                        const Subspace& f1, const Subspace& f2) {
  const Mat j = jacobian(model, x);
  double r = 0.0;
  if (e1.dim() > 0 && e1.dim() < e1.ambient()) r = std::max(r, principal_angle(e1.mapped(j, f1.base()), f1));
  if (e2.dim() > 0 && e2.dim() < e2.ambient()) r = std::max(r, principal_angle(e2.mapped(j, f2.base()), f2));
  return r;
}

std::string point_text(const StatePoint& p) {
  char buf[64];
  if (p.dim() == 1) std::snprintf(buf, sizeof buf, "(%.9g)", p[0]);
  else std::snprintf(buf, sizeof buf, "(%.9g, %.9g)", p[0], p[1]);
  return buf;
}

}  // namespace

Subspace::Subspace(StatePoint base, const Mat& vectors) : base_(std::move(base)), basis_(orthonormal_columns(vectors)) {
  if (vectors.rows() != base_.dim()) throw PreconditionError("Subspace: basis dimension differs from the point");
}

Subspace Subspace::trivial(StatePoint base, int ambient) {
  Subspace s;
  s.base_ = std::move(base);
  s.basis_ = Mat(ambient, 0);
  return s;
}

Subspace Subspace::line(StatePoint base, const Vec& direction) {
  Mat m(direction.size(), 1);
  m.col(0) = direction;
  return Subspace(std::move(base), m);
}

Subspace Subspace::whole(StatePoint base, int ambient) {
  return Subspace(std::move(base), Mat::Identity(ambient, ambient));
}

Subspace Subspace::mapped(const Mat& m, const StatePoint& new_base) const {
  if (dim() == 0) return trivial(new_base, ambient());
  return Subspace(new_base, m * basis_);
}

double principal_angle(const Subspace& a, const Subspace& b) {
  if (a.dim() != b.dim() || a.ambient() != b.ambient()) {
    throw PreconditionError("principal_angle: subspaces of different dimension");
  }
  if (a.dim() == 0 || a.dim() == a.ambient()) return 0.0;
  const Mat qa = a.basis();
  const Mat r = b.basis() - qa * (qa.transpose() * b.basis());
  return std::asin(std::min(1.0, largest_singular_value(r)));
}

bool ConeSpec::in_unstable_cone(const Vec& v) const {
  const auto [a, b] = cone_coordinates(stable_axis, unstable_axis, v);
  return width * std::abs(a) < std::abs(b);
}

bool ConeSpec::in_stable_cone(const Vec& v) const {
  const auto [a, b] = cone_coordinates(stable_axis, unstable_axis, v);
  return width * std::abs(b) < std::abs(a);
}

double SplittingField::invariance_residual() const {
  double r = 0.0;
  for (const auto& s : samples) r = std::max(r, s.residual);
  return r;
}

bool SplittingField::orbit_closed() const {
  if (samples.empty()) return false;
  std::vector<int> incoming(samples.size(), 0);
  for (const auto& s : samples) {
    if (!s.successor || *s.successor >= samples.size()) return false;
    ++incoming[*s.successor];
  }
  return std::all_of(incoming.begin(), incoming.end(), [](int c) { return c == 1; });
}

SplittingField periodic_splitting(const PeriodicOrbit& orbit) {
  SplittingField f;
  f.model_id = orbit.model_id;
  const std::size_t t = orbit.period;
  const int d = orbit.dim();
  if (d == 1) {
    for (std::size_t j = 0; j < t; ++j) {
      f.samples.push_back({orbit.points[j], Subspace::trivial(orbit.points[j], 1), Subspace::whole(orbit.points[j], 1),
                           (j + 1) % t, 0.0});
    }
    return f;
  }
  const EigenSplit split = split_period_map(orbit.period_map);
  if (!split.ok) throw PreconditionError("periodic_splitting: " + split.reason);
  std::vector<Vec> u(t), s(t);
  u[0] = split.unstable_dir;
  for (std::size_t j = 1; j < t; ++j) u[j] = (orbit.cocycle[j - 1] * u[j - 1]).normalized();
  // Stable lines are carried backwards, where they are attracting.
  s[0] = split.stable_dir;
  Vec v = split.stable_dir;
  for (std::size_t j = t; j-- > 1;) {
    v = (orbit.cocycle[j].inverse() * v).normalized();
    s[j] = v;
  }
  for (std::size_t j = 0; j < t; ++j) {
    f.samples.push_back({orbit.points[j], Subspace::line(orbit.points[j], s[j]), Subspace::line(orbit.points[j], u[j]),
                         (j + 1) % t, 0.0});
  }
  for (std::size_t j = 0; j < t; ++j) {
    const auto& a = f.samples[j];
    const auto& b = f.samples[(j + 1) % t];
    const Mat& jac = orbit.cocycle[j];
    f.samples[j].residual = std::max(principal_angle(a.first.mapped(jac, b.point), b.first),
                                     principal_angle(a.second.mapped(jac, b.point), b.second));
  }
  return f;
}

SplittingField periodic_splitting(const std::vector<PeriodicOrbit>& orbits) {
  SplittingField f;
  for (const auto& o : orbits) {
    SplittingField part = periodic_splitting(o);
    if (f.model_id.empty()) f.model_id = part.model_id;
    const std::size_t offset = f.samples.size();
    for (auto& s : part.samples) {
      if (s.successor) s.successor = *s.successor + offset;
      f.samples.push_back(std::move(s));
    }
  }
  return f;
}

SplittingField constant_field(const MapModel& model, const std::vector<StatePoint>& samples, const Vec& first,
                              const Vec& second) {
  SplittingField f;
  f.model_id = model.id();
  for (const auto& p : samples) {
    SplittingSample s{p, Subspace::line(p, first), Subspace::line(p, second), std::nullopt, 0.0};
    const StatePoint gp = eval_map(model, p);
    s.residual = residual_between(model, p, s.first, s.second, Subspace::line(gp, first), Subspace::line(gp, second));
    f.samples.push_back(std::move(s));
  }
  return f;
}

SplittingField cone_field_iterate(const MapModel& model, const std::vector<StatePoint>& samples,
                                  const std::vector<ConeSpec>& initial, std::size_t steps) {
  if (model.dim() != 2 || !model.invertible()) {
    throw PreconditionError("cone_field_iterate: invertible torus model required");
  }
  if (initial.size() != 1 && initial.size() != samples.size()) {
    throw PreconditionError("cone_field_iterate: need one cone or one per sample");
  }
  auto cone_for = [&](std::size_t i) -> const ConeSpec& { return initial.size() == 1 ? initial[0] : initial[i]; };

  for (std::size_t i = 0; i < samples.size(); ++i) {
    const ConeSpec& c = cone_for(i);
    if (!(c.width > 0.0 && c.width < 1.0)) throw PreconditionError("cone_field_iterate: width must be in (0,1)");
    const Vec s = c.stable_axis.normalized(), u = c.unstable_axis.normalized();
    const Mat jf = jacobian(model, samples[i]);
    const Mat jb = jacobian(model, StatePoint(model.inverse_at(samples[i].coords()))).inverse();
    // Boundary rays of one half of each cone, and the images of the axes.
    const Vec ub1 = u + s / c.width, ub2 = u - s / c.width;
    const Vec sb1 = s + u / c.width, sb2 = s - u / c.width;
    auto same_half = [&](const Vec& a, const Vec& b, const Vec& axis, bool unstable) {
      const auto [a1, a2] = cone_coordinates(s, u, a);
      const auto [b1, b2] = cone_coordinates(s, u, b);
      const auto [x1, x2] = cone_coordinates(s, u, axis);
      if (unstable) return (a2 > 0) == (x2 > 0) && (b2 > 0) == (x2 > 0);
      return (a1 > 0) == (x1 > 0) && (b1 > 0) == (x1 > 0);
    };
    const bool u_ok = c.in_unstable_cone(jf * ub1) && c.in_unstable_cone(jf * ub2) &&
                      same_half(jf * ub1, jf * ub2, jf * u, true);
    const bool s_ok = c.in_stable_cone(jb * sb1) && c.in_stable_cone(jb * sb2) &&
                      same_half(jb * sb1, jb * sb2, jb * s, false);
    if (!u_ok || !s_ok) {
      throw PreconditionError("cone_field_iterate: " + std::string(u_ok ? "stable" : "unstable") +
                              " cone not invariant at sample " + std::to_string(i) + " " + point_text(samples[i]));
    }
  }

  auto lines_at = [&](const StatePoint& x, const ConeSpec& c, std::size_t k, Mat& weak, Mat& strong) {
    const auto back = backward_orbit(model, x, k);
    const auto fwd = forward_orbit(model, x, k);
    Mat u(2, 1), s(2, 1);
    u.col(0) = c.unstable_axis.normalized();
    s.col(0) = c.stable_axis.normalized();
    strong = push_forward(model, back, k, u);
    weak = pull_back(model, fwd, k, s);
  };

  SplittingField f;
  f.model_id = model.id();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const ConeSpec& c = cone_for(i);
    const StatePoint& x = samples[i];
    Mat weak, strong;
    lines_at(x, c, steps, weak, strong);
    SplittingSample smp{x, Subspace(x, weak), Subspace(x, strong), std::nullopt, 0.0};
    if (steps > 0) {
      Mat w0, s0;
      lines_at(x, c, steps - 1, w0, s0);
      f.convergence = std::max(f.convergence, std::max(principal_angle(smp.first, Subspace(x, w0)),
                                                       principal_angle(smp.second, Subspace(x, s0))));
    }
    const StatePoint gx = eval_map(model, x);
    Mat gw, gs;
    lines_at(gx, c, steps, gw, gs);
    smp.residual = residual_between(model, x, smp.first, smp.second, Subspace(gx, gw), Subspace(gx, gs));
    f.samples.push_back(std::move(smp));
  }
  return f;
}

DominationCertificate domination_check(const MapModel& model, const SplittingField& field, std::size_t l) {
  if (l < 1) throw PreconditionError("domination_check: l must be >= 1");
  if (field.samples.empty()) throw PreconditionError("domination_check: empty field");
  DominationCertificate cert;
  cert.l = l;
  cert.samples = field.samples.size();
  for (std::size_t i = 0; i < field.samples.size(); ++i) {
    const auto& s = field.samples[i];
    if (s.second.dim() == 0) throw PreconditionError("domination_check: dominating bundle is trivial");
    StatePoint p = s.point;
    Mat prod = Mat::Identity(model.dim(), model.dim());
    for (std::size_t j = 0; j < l; ++j) {
      prod = jacobian(model, p) * prod;
      p = eval_map(model, p);
    }
    const double sup_weak = s.first.dim() == 0 ? 0.0 : largest_singular_value(prod * s.first.basis());
    const double inf_strong = smallest_singular_value(prod * s.second.basis());
    const double ratio = sup_weak / inf_strong;
    if (ratio > cert.lambda || i == 0) {
      cert.lambda = ratio;
      cert.worst_sample = i;
    }
  }
  cert.pass = cert.lambda < 1.0;
  return cert;
}

std::vector<ModulusBin> splitting_continuity_modulus(const SplittingField& field) {
  if (field.samples.size() < 2) throw PreconditionError("splitting_continuity_modulus: need >= 2 samples");
  std::vector<ModulusBin> bins;
  for (int e = 10; e >= 1; --e) bins.push_back({std::ldexp(1.0, -e), 0.0});
  bins.push_back({1.0, 0.0});
  const auto& smp = field.samples;
  for (std::size_t i = 0; i < smp.size(); ++i) {
    for (std::size_t j = i + 1; j < smp.size(); ++j) {
      const double d = flat_distance(smp[i].point, smp[j].point);
      auto it = std::lower_bound(bins.begin(), bins.end(), d,
                                 [](const ModulusBin& b, double v) { return b.distance < v; });
      if (it == bins.end()) it = bins.end() - 1;
      it->max_angle = std::max(it->max_angle, pair_angle(smp[i], smp[j]));
    }
  }
  for (std::size_t k = 1; k < bins.size(); ++k) bins[k].max_angle = std::max(bins[k].max_angle, bins[k - 1].max_angle);
  return bins;
}

double extension_radius(const std::vector<ModulusBin>& modulus, double threshold) {
  double r = 0.0;
  for (const auto& b : modulus) {
    if (b.max_angle < threshold) r = b.distance;
  }
  return r;
}

Extension gram_schmidt_extend(const MapModel& model, const SplittingField& field,
                              const std::vector<StatePoint>& targets, const ExtensionOptions& options) {
  if (field.samples.empty()) throw PreconditionError("gram_schmidt_extend: empty source field");
  Extension ext;
  ext.field.model_id = field.model_id;
  ext.radius = options.radius ? *options.radius
                              : (field.samples.size() >= 2
                                     ? extension_radius(splitting_continuity_modulus(field))
                                     : 0.0);
  const int d = model.dim();
  if (d == 2 && !model.invertible()) throw PreconditionError("gram_schmidt_extend: invertible torus model required");
  const std::size_t k = options.transport_steps;
  const std::size_t m = std::max<std::size_t>(1, std::min(options.candidates, field.samples.size()));

  auto nearest = [&](const StatePoint& y) {
    std::vector<std::pair<double, std::size_t>> dist;
    dist.reserve(field.samples.size());
    for (std::size_t i = 0; i < field.samples.size(); ++i) dist.emplace_back(flat_distance(y, field.samples[i].point), i);
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(m), dist.end());
    dist.resize(m);
    return dist;
  };

  // Extension at one point; returns the bundles from the nearest source and the candidate spread.
  auto extend_at = [&](const StatePoint& x, Subspace& weak, Subspace& strong) {
    const auto here = nearest(x);
    if (here.front().first > ext.radius) {
      throw PreconditionError("gram_schmidt_extend: target " + point_text(x) + " is isolated (nearest sample at " +
                              std::to_string(here.front().first) + " > radius " + std::to_string(ext.radius) + ")");
    }
    if (d == 1) {
      weak = Subspace::trivial(x, 1);
      strong = Subspace::whole(x, 1);
      return 0.0;
    }
    const auto back = backward_orbit(model, x, k);
    const auto fwd = forward_orbit(model, x, k);
    const auto src_strong = nearest(back.back());
    const auto src_weak = nearest(fwd.back());
    std::vector<Subspace> cs, cw;
    for (const auto& [dist, idx] : src_strong) {
      const auto& b = field.samples[idx].second;
      cs.emplace_back(x, b.dim() == 0 ? Mat(d, 0) : push_forward(model, back, k, b.basis()));
    }
    for (const auto& [dist, idx] : src_weak) {
      const auto& b = field.samples[idx].first;
      cw.emplace_back(x, b.dim() == 0 ? Mat(d, 0) : pull_back(model, fwd, k, b.basis()));
    }
    double spread = 0.0;
    for (std::size_t a = 0; a < cs.size(); ++a)
      for (std::size_t b = a + 1; b < cs.size(); ++b) spread = std::max(spread, principal_angle(cs[a], cs[b]));
    for (std::size_t a = 0; a < cw.size(); ++a)
      for (std::size_t b = a + 1; b < cw.size(); ++b) spread = std::max(spread, principal_angle(cw[a], cw[b]));
    weak = cw.front();
    strong = cs.front();
    return spread;
  };

  for (const auto& x : targets) {
    Subspace weak, strong;
    const double spread = extend_at(x, weak, strong);
    ext.disagreement = std::max(ext.disagreement, spread);
    SplittingSample smp{x, weak, strong, std::nullopt, 0.0};
    if (d == 2) {
      const StatePoint gx = eval_map(model, x);
      // Same construction at g(x), without the isolation check (g(x) need not be a target).
      const auto gback = backward_orbit(model, gx, k);
      const auto gfwd = forward_orbit(model, gx, k);
      const auto& src_s = field.samples[nearest(gback.back()).front().second];
      const auto& src_w = field.samples[nearest(gfwd.back()).front().second];
      const Subspace gs(gx, push_forward(model, gback, k, src_s.second.basis()));
      const Subspace gw(gx, src_w.first.dim() == 0 ? Mat(d, 0) : pull_back(model, gfwd, k, src_w.first.basis()));
      smp.residual = residual_between(model, x, weak, strong, gw, gs);
    }
    ext.field.samples.push_back(std::move(smp));
  }
  return ext;
}

HyperbolicCertificate hyperbolic_set_certificate(const MapModel& model, const SplittingField& field,
                                                 std::size_t n_check) {
  if (n_check < 1) throw PreconditionError("hyperbolic_set_certificate: n_check must be >= 1");
  if (!field.orbit_closed()) throw PreconditionError("hyperbolic_set_certificate: sample set not orbit-closed");
  const auto& smp = field.samples;
  const std::size_t count = smp.size();
  std::vector<std::size_t> pred(count);
  for (std::size_t i = 0; i < count; ++i) pred[*smp[i].successor] = i;

  // rates[i][n-1] = max(|Dg^n|_{E^s}(x_i)|, |Dg^{-n}|_{E^u}(x_i)|), computed as products of the
  // one-step maps between the sampled subspaces so that no direction is carried unprotected.
  std::vector<std::vector<double>> rates(count, std::vector<double>(n_check, 0.0));
  std::vector<Mat> weak_step(count), strong_back(count);
  for (std::size_t i = 0; i < count; ++i) {
    const Mat j = jacobian(model, smp[i].point);
    const auto& next = smp[*smp[i].successor];
    if (smp[i].first.dim() > 0) weak_step[i] = next.first.basis().transpose() * j * smp[i].first.basis();
    if (smp[i].second.dim() > 0) strong_back[*smp[i].successor] = smp[i].second.basis().transpose() * j.inverse() * next.second.basis();
  }
  for (std::size_t i = 0; i < count; ++i) {
    const int ds = smp[i].first.dim(), du = smp[i].second.dim();
    Mat fwd = Mat::Identity(ds, ds), bwd = Mat::Identity(du, du);
    std::size_t a = i, b = i;
    for (std::size_t n = 1; n <= n_check; ++n) {
      double r = 0.0;
      if (ds > 0) {
        fwd = weak_step[a] * fwd;
        r = std::max(r, largest_singular_value(fwd));
      }
      if (du > 0) {
        bwd = strong_back[b] * bwd;
        r = std::max(r, largest_singular_value(bwd));
      }
      a = *smp[a].successor;
      b = pred[b];
      rates[i][n - 1] = r;
    }
  }
  std::vector<double> worst(n_check, 0.0);
  for (const auto& r : rates)
    for (std::size_t n = 0; n < n_check; ++n) worst[n] = std::max(worst[n], r[n]);

  HyperbolicCertificate cert;
  cert.n_check = n_check;
  cert.lambda = std::pow(worst.back(), 1.0 / static_cast<double>(n_check));
  for (std::size_t n = 1; n <= n_check; ++n) {
    cert.c = std::max(cert.c, worst[n - 1] / std::pow(cert.lambda, static_cast<double>(n)));
  }
  for (const auto& r : rates) {
    double m = 0.0;
    for (std::size_t n = 1; n <= n_check; ++n) {
      m = std::max(m, r[n - 1] / (cert.c * std::pow(cert.lambda, static_cast<double>(n))));
    }
    cert.margins.push_back(m);
  }
  cert.pass = cert.lambda < 1.0 && std::isfinite(cert.c) && cert.c > 0.0;
  return cert;
}

void write_splitting_csv(std::ostream& out, const SplittingField& field) {
  const bool two_d = !field.samples.empty() && field.samples.front().point.dim() == 2;
  out << "index,x" << (two_d ? ",y" : "") << ",first_dim,first_x" << (two_d ? ",first_y" : "")
      << ",second_dim,second_x" << (two_d ? ",second_y" : "") << ",residual,successor\n";
  char buf[32];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  auto vec_cols = [&](const Subspace& s) {
    std::string r = std::to_string(s.dim());
    for (int c = 0; c < s.ambient(); ++c) r += "," + (s.dim() > 0 ? num(s.basis()(c, 0)) : std::string());
    return r;
  };
  for (std::size_t i = 0; i < field.samples.size(); ++i) {
    const auto& s = field.samples[i];
    out << i << ',' << num(s.point[0]);
    if (two_d) out << ',' << num(s.point[1]);
    out << ',' << vec_cols(s.first) << ',' << vec_cols(s.second) << ',' << num(s.residual) << ','
        << (s.successor ? std::to_string(*s.successor) : std::string()) << '\n';
  }
}

}  // namespace hypercert
