#include "hypercert/shadowing.hpp"

#include "lift_util.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

namespace hypercert {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

// Preimage of y closest to `near`: the local inverse branch at `near`.
StatePoint local_preimage(const MapModel& model, const StatePoint& y, const StatePoint& near) {
  if (!model.is_circle()) return StatePoint(model.inverse_at(y.coords()));
  double best = 0.0, best_d = std::numeric_limits<double>::infinity();
  for (double q : circle_preimages(model, y[0])) {
    const double d = std::abs(centered_mod(q - near[0]));
    if (d < best_d) {
      best_d = d;
      best = q;
    }
  }
  return StatePoint(best);
}

double segment_epsilon(const MapModel& model, const StatePoint& p, const OrbitSegment& seg) {
  double eps = 0.0;
  StatePoint q = p;
  for (std::size_t j = 0; j < seg.points.size(); ++j) {
    eps = std::max(eps, flat_distance(q, seg.points[j]));
    if (j + 1 < seg.points.size()) q = eval_map(model, q);
  }
  return eps;
}

void shadow_circle(const MapModel& model, ShadowingResult& r) {
  const auto& xs = r.segment.points;
  const std::size_t n = r.segment.length();
  StatePoint p = xs.front();
  double last_step = std::numeric_limits<double>::infinity();
  bool converged = false;
  for (int round = 0; round < 200; ++round) {
    StatePoint q = p;
    for (std::size_t j = n; j-- > 0;) q = local_preimage(model, q, xs[j]);
    const double step = flat_distance(q, p);
    p = q;
    if (step <= 1e-15) {
      converged = true;
      break;
    }
    if (round > 3 && step > 0.999 * last_step && step > 1e-12) {
      throw NumericalError("shadow_periodic: composed inverse branches do not contract (step " + short_num(step) + ")");
    }
    last_step = step;
  }
  if (!converged && last_step > 1e-12) throw NumericalError("shadow_periodic: inverse-branch iteration did not converge");
  std::vector<StatePoint> orbit(n);
  StatePoint q = p;
  for (std::size_t j = n; j-- > 0;) {
    q = local_preimage(model, q, xs[j]);
    orbit[j] = q;
  }
  r.orbit = std::move(orbit);
  const double mu = min_conorm_scan(model, 4096).value;
  if (mu > 1.0) r.bound_constant = 1.0 / (1.0 - std::pow(mu, -static_cast<double>(n)));
}

void shadow_torus(const MapModel& model, ShadowingResult& r) {
  if (!model.invertible()) throw PreconditionError("shadow_periodic: torus model must be invertible");
  const auto& xs = r.segment.points;
  const std::size_t n = r.segment.length();
  const Eigen::Index dim = 2 * static_cast<Eigen::Index>(n);
  Eigen::VectorXd p(dim);
  std::vector<Vec> shift(n);
  for (std::size_t j = 0; j < n; ++j) {
    p.segment<2>(2 * static_cast<Eigen::Index>(j)) = xs[j].coords();
    const Vec target = j + 1 < n ? xs[j + 1].coords() : xs[0].coords();
    shift[j] = detail::round_vec(model.lift(xs[j].coords()) - target);
  }
  auto residual = [&](const Eigen::VectorXd& v) {
    Eigen::VectorXd f(dim);
    for (std::size_t j = 0; j < n; ++j) {
      const auto jj = 2 * static_cast<Eigen::Index>(j);
      const auto nj = 2 * static_cast<Eigen::Index>((j + 1) % n);
      const Vec pj = v.segment<2>(jj);
      f.segment<2>(jj) = model.lift(pj) - Vec(v.segment<2>(nj)) - shift[j];
    }
    return f;
  };
  auto jacobian_of = [&](const Eigen::VectorXd& v) {
    Eigen::MatrixXd jm = Eigen::MatrixXd::Zero(dim, dim);
    for (std::size_t j = 0; j < n; ++j) {
      const auto jj = 2 * static_cast<Eigen::Index>(j);
      const auto nj = 2 * static_cast<Eigen::Index>((j + 1) % n);
      jm.block<2, 2>(jj, jj) += model.jacobian_at(v.segment<2>(jj));
      jm.block<2, 2>(jj, nj) -= Eigen::Matrix2d::Identity();
    }
    return jm;
  };
  Eigen::VectorXd f = residual(p);
  const double initial = f.lpNorm<Eigen::Infinity>();
  int it = 0;
  while (f.lpNorm<Eigen::Infinity>() > 1e-13) {
    if (++it > 50) throw NumericalError("shadow_periodic: Newton iteration cap reached");
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(jacobian_of(p));
    p -= lu.solve(f);
    f = residual(p);
    const double nf = f.lpNorm<Eigen::Infinity>();
    if (!std::isfinite(nf) || nf > 1e3 * std::max(initial, 1e-12)) {
      throw NumericalError("shadow_periodic: Newton divergence in sequence space");
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(jacobian_of(p));
  r.bound_constant = 1.0 / svd.singularValues()(dim - 1);
  r.orbit.clear();
  for (std::size_t j = 0; j < n; ++j) r.orbit.emplace_back(Vec(p.segment<2>(2 * static_cast<Eigen::Index>(j))));
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

ShadowingResult shadow_periodic(const MapModel& model, const OrbitSegment& segment, double alpha_max) {
  const std::size_t n = segment.length();
  if (n < 1) throw PreconditionError("shadow_periodic: segment must have length >= 1");
  ShadowingResult r;
  r.segment = segment;
  r.closing_gap = flat_distance(segment.points.back(), segment.points.front());
  if (!(r.closing_gap < alpha_max)) {
    throw PreconditionError("shadow_periodic: closing gap " + short_num(r.closing_gap) + " is not below " +
                            short_num(alpha_max));
  }
  if (r.closing_gap <= 1e-12) {
    r.orbit.assign(segment.points.begin(), segment.points.end() - 1);
    r.period = least_period(model, r.orbit.front(), n);
    r.epsilon = segment_epsilon(model, r.orbit.front(), segment);
    if (model.is_circle()) {
      const double mu = min_conorm_scan(model, 4096).value;
      if (mu > 1.0) r.bound_constant = 1.0 / (1.0 - std::pow(mu, -static_cast<double>(n)));
    }
    return r;
  }
  if (model.is_circle()) shadow_circle(model, r);
  else shadow_torus(model, r);
  r.period = least_period(model, r.orbit.front(), n);
  r.epsilon = 0.0;
  for (std::size_t j = 0; j <= n; ++j) {
    r.epsilon = std::max(r.epsilon, flat_distance(r.orbit[j % n], segment.points[j]));
  }
  return r;
}

OrbitSegment pseudo_closing_segment(const MapModel& model, const StatePoint& p, std::size_t n, const Vec& direction,
                                    double alpha) {
  if (alpha < 0.0) throw PreconditionError("pseudo_closing_segment: alpha must be >= 0");
  if (alpha == 0.0) return iterate_orbit(model, p, n);
  const Vec v = direction.normalized();
  auto start = [&](double t) { return StatePoint(Vec(p.coords() + t * v)); };
  auto gap = [&](double t) {
    const StatePoint x = start(t);
    StatePoint y = x;
    for (std::size_t i = 0; i < n; ++i) y = eval_map(model, y);
    return flat_distance(y, x) - alpha;
  };
  const auto li = detail::lift_iterate(model, p.coords(), n);
  const double slope = ((li.jacobian - Mat::Identity(model.dim(), model.dim())) * v).norm();
  if (!(slope > 0.0)) throw NumericalError("pseudo_closing_segment: degenerate periodic point");
  // Secant iteration on t -> d(g^n x_t, x_t) - alpha.
  double t0 = alpha / slope, t1 = 1.05 * t0;
  double f0 = gap(t0), f1 = gap(t1);
  // once f is at rounding level the secant wanders, so keep the best iterate
  double best_t = std::abs(f0) < std::abs(f1) ? t0 : t1;
  double best_f = std::min(std::abs(f0), std::abs(f1));
  for (int i = 0; i < 60 && best_f > 1e-12 * alpha; ++i) {
    if (f1 == f0 || std::abs(t1 - t0) <= 1e-15 * std::abs(t1)) break;
    const double t2 = t1 - f1 * (t1 - t0) / (f1 - f0);
    t0 = t1;
    f0 = f1;
    t1 = t2;
    f1 = gap(t1);
    if (std::abs(f1) < best_f) {
      best_f = std::abs(f1);
      best_t = t1;
    }
  }
  if (best_f > 1e-7 * alpha) {
    // far from linear (orbits near a critical point): bracket from t = 0 and bisect
    double lo = 0.0, hi = 0.0;
    for (double t = 1e-6 * alpha / slope; t < 0.5; t *= 1.25) {
      if (gap(t) >= 0.0) {
        hi = t;
        break;
      }
      lo = t;
    }
    if (hi > 0.0) {
      for (int i = 0; i < 200 && hi - lo > 1e-17; ++i) {
        const double mid = 0.5 * (lo + hi);
        (gap(mid) >= 0.0 ? hi : lo) = mid;
      }
      const double f = std::abs(gap(hi));
      if (f < best_f) {
        best_f = f;
        best_t = hi;
      }
    }
  }
  if (best_f > 1e-7 * alpha) {
    throw NumericalError("pseudo_closing_segment: could not reach the requested gap (off by " + short_num(best_f) + ")");
  }
  return iterate_orbit(model, start(best_t), n);
}

ShadowingTable shadowing_constants(const MapModel& model, std::size_t trials, const std::vector<double>& alphas,
                                   const ShadowingPlan& plan) {
  if (trials < 1) throw PreconditionError("shadowing_constants: trials must be >= 1");
  if (alphas.empty()) throw PreconditionError("shadowing_constants: no alpha values");
  const PeriodicSet set = find_periodic_points(model, plan.max_period);
  if (set.orbits.empty()) throw PreconditionError("shadowing_constants: no periodic orbits to start from");

  std::vector<double> sorted = alphas;
  std::sort(sorted.begin(), sorted.end());
  ShadowingTable table;
  table.model_id = model.id();
  for (double a : sorted) table.rows.push_back({a, trials, 0, 0.0, 0.0, {}});

  for (std::size_t i = 0; i < trials; ++i) {
    std::mt19937_64 rng(derive_seed(plan.seed, i));
    std::uniform_int_distribution<std::size_t> pick_orbit(0, set.orbits.size() - 1);
    const auto& orbit = set.orbits[pick_orbit(rng)];
    std::uniform_int_distribution<std::size_t> pick_point(0, orbit.period - 1);
    const StatePoint p = orbit.points[pick_point(rng)];
    Vec dir(model.dim());
    if (model.dim() == 1) {
      dir(0) = std::bernoulli_distribution(0.5)(rng) ? 1.0 : -1.0;
    } else {
      const double th = std::uniform_real_distribution<double>(0.0, 2.0 * M_PI)(rng);
      dir << std::cos(th), std::sin(th);
    }
    for (auto& row : table.rows) {
      try {
        const OrbitSegment seg = pseudo_closing_segment(model, p, orbit.period, dir, row.alpha);
        const ShadowingResult res = shadow_periodic(model, seg, 2.0 * row.alpha + 1e-11);
        row.max_epsilon = std::max(row.max_epsilon, res.epsilon);
        if (row.alpha > 0.0) row.max_ratio = std::max(row.max_ratio, res.epsilon / row.alpha);
      } catch (const std::exception& e) {
        ++row.failures;
        if (row.errors.size() < 5) row.errors.push_back("trial " + std::to_string(i) + ": " + e.what());
      }
    }
  }
  table.monotone = true;
  for (std::size_t k = 1; k < table.rows.size(); ++k) {
    if (table.rows[k].max_epsilon < table.rows[k - 1].max_epsilon) table.monotone = false;
  }
  table.pass = table.monotone;
  for (const auto& row : table.rows) {
    if (row.failures > 0 || row.max_ratio > plan.ratio_bound) table.pass = false;
  }
  return table;
}

// ---- conjugacy ---------------------------------------------------------------

namespace {

struct DigitPlan {
  int digits;
  double scale;  // k^digits
};

DigitPlan digit_plan(int k) {
  int digits = 0;
  double scale = 1.0;
  while (scale * k <= 4611686018427387904.0) {  // 2^62
    scale *= k;
    ++digits;
  }
  return {digits, scale};
}

}  // namespace

ConjugacyModel::ConjugacyModel(const MapModel& g, const MapModel& f, std::vector<double> table)
    : g_(g), f_(f), table_(std::move(table)) {}

bool ConjugacyModel::monotone() const {
  for (std::size_t i = 1; i < table_.size(); ++i) {
    if (!(table_[i] > table_[i - 1])) return false;
  }
  return true;
}

double ConjugacyModel::operator()(double x) const {
  const int k = g_.degree();
  const DigitPlan plan = digit_plan(k);
  std::uint64_t acc = 0;
  double y = wrap_unit(x);
  for (int j = 0; j < plan.digits; ++j) {
    acc = acc * static_cast<std::uint64_t>(k) + static_cast<std::uint64_t>(circle_branch_index(g_, y));
    y = eval_map(g_, StatePoint(y))[0];
  }
  return static_cast<double>(acc) / plan.scale;
}

double ConjugacyModel::at(double x) const {
  const double pos = wrap_unit(x) * static_cast<double>(table_.size());
  const double idx = std::round(pos);
  if (pos == idx) return table_[static_cast<std::size_t>(idx) % table_.size()];
  return (*this)(x);
}

ConjugacyModel build_conjugacy(const MapModel& g, const MapModel& f, std::size_t resolution) {
  if (!g.is_circle() || !f.is_circle()) throw PreconditionError("build_conjugacy: circle models required");
  if (!f.is_linear()) throw PreconditionError("build_conjugacy: the target must be the linear model");
  if (g.degree() != f.degree()) {
    throw PreconditionError("build_conjugacy: degree mismatch (" + std::to_string(g.degree()) + " vs " +
                            std::to_string(f.degree()) + ")");
  }
  if (g.degree() < 2) throw PreconditionError("build_conjugacy: degree must be >= 2");
  Vec zero(1);
  zero(0) = 0.0;
  if (std::abs(centered_mod(g.lift(zero)(0))) > 1e-12) {
    throw PreconditionError("build_conjugacy: g must fix 0 so that h(0) = 0");
  }
  if (resolution < 2 || (resolution & (resolution - 1)) != 0) {
    throw PreconditionError("build_conjugacy: resolution must be a power of two");
  }
  ConjugacyModel h(g, f, {});
  std::vector<double> table(resolution);
  for (std::size_t i = 0; i < resolution; ++i) table[i] = h(static_cast<double>(i) / static_cast<double>(resolution));
  ConjugacyModel out(g, f, std::move(table));
  out.defect_bound = conjugacy_defect(out, g, f, resolution);
  return out;
}

double conjugacy_defect(const ConjugacyModel& h, const MapModel& g, const MapModel& f, std::size_t grid) {
  if (grid < 1) throw PreconditionError("conjugacy_defect: grid must be >= 1");
  double worst = 0.0;
  for (std::size_t i = 0; i < grid; ++i) {
    const double x = static_cast<double>(i) / static_cast<double>(grid);
    const double lhs = h(eval_map(g, StatePoint(x))[0]);
    const double rhs = eval_map(f, StatePoint(h.at(x)))[0];
    worst = std::max(worst, std::abs(centered_mod(lhs - rhs)));
  }
  return worst;
}

HolderEstimate holder_estimate(const ConjugacyModel& h, std::size_t pair_count, std::uint64_t seed) {
  if (pair_count < 100) throw PreconditionError("holder_estimate: pair_count must be >= 100");
  const int finest = static_cast<int>(std::lround(std::log2(static_cast<double>(h.resolution()))));
  if (finest < 3) throw PreconditionError("holder_estimate: degenerate sampling (resolution spans a single scale)");
  std::mt19937_64 rng(derive_seed(seed, 0x40));
  std::uniform_int_distribution<int> scale(2, finest);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> ld, lh;
  ld.reserve(pair_count);
  lh.reserve(pair_count);
  HolderEstimate est;
  est.smallest_scale = 1.0;
  for (std::size_t i = 0; i < pair_count; ++i) {
    const double x = unit(rng);
    const double len = std::ldexp(0.5 + 0.5 * unit(rng), -scale(rng));
    const double d = flat_distance(StatePoint(x), StatePoint(x + len));
    const double dh = std::abs(centered_mod(h(x + len) - h(x)));
    if (!(d > 0.0) || !(dh > 0.0)) continue;
    ld.push_back(std::log(d));
    lh.push_back(std::log(dh));
    est.smallest_scale = std::min(est.smallest_scale, d);
    est.largest_scale = std::max(est.largest_scale, d);
  }
  est.pairs = ld.size();
  if (est.pairs < 2) throw PreconditionError("holder_estimate: degenerate sampling");
  const double m = static_cast<double>(est.pairs);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < est.pairs; ++i) {
    mx += ld[i];
    my += lh[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < est.pairs; ++i) {
    sxx += (ld[i] - mx) * (ld[i] - mx);
    syy += (lh[i] - my) * (lh[i] - my);
    sxy += (ld[i] - mx) * (lh[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) throw PreconditionError("holder_estimate: degenerate sampling (one scale only)");
  const double slope_h = sxy / sxx;    // h
  const double slope_inv = sxy / syy;  // h^{-1}
  double rss = 0.0;
  for (std::size_t i = 0; i < est.pairs; ++i) {
    const double e = lh[i] - (my + slope_h * (ld[i] - mx));
    rss += e * e;
  }
  est.fit_residual = std::sqrt(rss / m);
  // A common exponent for h and its inverse; exponents above 1 are not meaningful here.
  est.holder_exponent = std::clamp(std::min(slope_h, slope_inv), 1e-3, 1.0);
  const double a = est.holder_exponent;
  double k = 0.0;
  for (std::size_t i = 0; i < est.pairs; ++i) {
    k = std::max(k, std::exp(lh[i] - a * ld[i]));
    k = std::max(k, std::exp(ld[i] - a * lh[i]));
  }
  est.K = k;
  return est;
}

DecayCheck contraction_decay_check(const MapModel& g, const HolderEstimate& h, double lambda_hat, std::size_t trials,
                                   const DecayPlan& plan) {
  if (!(lambda_hat > 0.0 && lambda_hat < 1.0)) throw PreconditionError("contraction_decay_check: need 0 < lambda_hat < 1");
  if (trials < 1) throw PreconditionError("contraction_decay_check: trials must be >= 1");
  if (!g.is_circle() && !g.invertible()) throw PreconditionError("contraction_decay_check: g must have inverse branches");
  const PeriodicSet set = find_periodic_points(g, plan.max_period);
  if (set.orbits.empty()) throw PreconditionError("contraction_decay_check: no periodic orbits");
  const double a = h.holder_exponent;
  const double delta = plan.ball_radius;
  const double base = std::pow(h.K, 1.0 + a) * std::pow(delta, a * a);
  DecayCheck out;
  out.pairs = trials;
  for (std::size_t i = 0; i < trials; ++i) {
    std::mt19937_64 rng(derive_seed(plan.seed, 0x1000 + i));
    const auto& orbit = set.orbits[std::uniform_int_distribution<std::size_t>(0, set.orbits.size() - 1)(rng)];
    const std::size_t t = orbit.period;
    std::size_t q = std::uniform_int_distribution<std::size_t>(0, t - 1)(rng);
    std::uniform_real_distribution<double> off(-0.5 * delta, 0.5 * delta);
    const Vec& pc = orbit.points[q].coords();
    Vec xv = pc, yv = pc;
    if (g.dim() == 1) {
      xv(0) += off(rng);
      yv(0) += off(rng);
    } else {
      // uniform in the disc of radius delta/2
      for (Vec* v : {&xv, &yv}) {
        Vec d(2);
        do {
          d << off(rng), off(rng);
        } while (d.norm() > 0.5 * delta);
        *v += d;
      }
    }
    StatePoint x(xv), y(yv);
    for (std::size_t j = 1; j <= plan.depth; ++j) {
      q = (q + t - 1) % t;
      x = local_preimage(g, x, orbit.points[q]);
      y = local_preimage(g, y, orbit.points[q]);
      const double lhs = flat_distance(x, y);
      const double rhs = std::pow(std::pow(lambda_hat, a), static_cast<double>(j)) * base;
      out.worst_margin = std::max(out.worst_margin, lhs / rhs);
      if (lhs > rhs * (1.0 + 1e-12) && !out.violation) {
        out.pass = false;
        std::string pt = "(" + short_num(x[0]);
        if (x.dim() == 2) pt += "," + short_num(x[1]);
        pt += "), (" + short_num(y[0]);
        if (y.dim() == 2) pt += "," + short_num(y[1]);
        out.violation = pt + "), j=" + std::to_string(j);
      }
    }
  }
  return out;
}

std::string to_string(EigenVerdict v) {
  switch (v) {
    case EigenVerdict::pass: return "pass";
    case EigenVerdict::inapplicable: return "inapplicable";
    case EigenVerdict::conclusion_violated: return "conclusion violated";
  }
  return "inapplicable";
}

constexpr double kResolutionFloor = 1e-11;
// absolute rounding of distances between points stored in [0, 1)
constexpr double kCoordinateNoise = 1e-14;

EigenvalueCheck eigenvalue_bound_check(const MapModel& model, const PeriodicOrbit& orbit, double lambda, double beta,
                                       const EigenvaluePlan& plan) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw PreconditionError("eigenvalue_bound_check: need 0 < lambda < 1");
  if (!(beta > 0.0 && beta <= 1.0)) throw PreconditionError("eigenvalue_bound_check: need 0 < beta <= 1");
  if (!model.is_circle() && !model.invertible()) {
    throw PreconditionError("eigenvalue_bound_check: model must have inverse branches");
  }
  const std::size_t t = orbit.period;
  const StatePoint& p = orbit.base();
  EigenvalueCheck out;

  Vec line;  // direction of the restriction, empty for the full ball
  const Mat dg = orbit.period_map.inverse();
  if (orbit.dim() == 1) {
    out.moduli.push_back(std::abs(dg(0, 0)));
  } else if (plan.restrict_to_contracting) {
    const EigenSplit split = split_period_map(orbit.period_map);
    if (!split.ok) throw PreconditionError("eigenvalue_bound_check: " + split.reason);
    line = split.unstable_dir;
    out.moduli.push_back((dg * line).norm());
  } else {
    const Eigen::EigenSolver<Eigen::Matrix2d> es{Eigen::Matrix2d(dg)};
    for (int i = 0; i < 2; ++i) out.moduli.push_back(std::abs(es.eigenvalues()(i)));
  }

  // G^n along the orbit: n*t local inverse steps.
  auto apply_g = [&](StatePoint x, std::size_t n) {
    std::size_t q = 0;
    for (std::size_t s = 0; s < n * t; ++s) {
      q = (q + t - 1) % t;
      x = local_preimage(model, x, orbit.points[q]);
    }
    return x;
  };

  std::mt19937_64 rng(derive_seed(plan.seed, 0x2000));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double r = plan.ball_radius;
  auto random_offset = [&](double radius) {
    Vec d(orbit.dim());
    if (orbit.dim() == 1) {
      d(0) = (2.0 * unit(rng) - 1.0) * radius;
    } else if (line.size() > 0) {
      d = (2.0 * unit(rng) - 1.0) * radius * line;
    } else {
      const double th = 2.0 * M_PI * unit(rng);
      d << std::cos(th), std::sin(th);
      d *= radius * std::sqrt(unit(rng));
    }
    return d;
  };
  out.pairs = plan.pairs;
  bool hypothesis = true;
  for (std::size_t i = 0; i < plan.pairs; ++i) {
    const Vec xv = p.coords() + random_offset(0.5 * r);
    // pair separations spread over four decades below the ball radius
    const double sep = 0.5 * r * std::pow(10.0, -4.0 * unit(rng));
    Vec dv = random_offset(1.0);
    if (dv.norm() == 0.0) continue;
    dv *= sep / dv.norm();
    StatePoint x(xv), y(Vec(xv + dv));
    const double d0 = flat_distance(x, y);
    for (std::size_t n = 1; n <= plan.max_n; ++n) {
      x = apply_g(x, 1);
      y = apply_g(y, 1);
      if (line.size() > 0) {
        // stay on the contracting line; the transverse rounding error would grow like the expansion
        const Vec dx = flat_displacement(p, x);
        x = StatePoint(Vec(p.coords() + dx.dot(line) * line));
        const Vec d = flat_displacement(x, y);
        y = StatePoint(Vec(x.coords() + d.dot(line) * line));
      }
      const double lhs = flat_distance(x, y);
      const double rhs = std::pow(lambda, static_cast<double>(n)) * std::pow(d0, beta);
      // below this the coordinates' rounding dominates the separation
      if (rhs < kResolutionFloor) break;
      const double ratio = lhs / rhs;
      out.hypothesis_worst = std::max(out.hypothesis_worst, ratio);
      if (lhs > rhs * (1.0 + 1e-9) + kCoordinateNoise) hypothesis = false;
    }
  }
  if (!hypothesis) {
    out.verdict = EigenVerdict::inapplicable;
    return out;
  }
  const double top = *std::max_element(out.moduli.begin(), out.moduli.end());
  out.verdict = top <= lambda + 1e-8 ? EigenVerdict::pass : EigenVerdict::conclusion_violated;
  return out;
}

void write_shadowing_csv(std::ostream& out, const ShadowingTable& table) {
  out << "alpha,trials,failures,max_epsilon,max_ratio\n";
  for (const auto& r : table.rows) {
    out << num(r.alpha) << ',' << r.trials << ',' << r.failures << ',' << num(r.max_epsilon) << ','
        << num(r.max_ratio) << '\n';
  }
}

void write_conjugacy_table(std::ostream& out, const ConjugacyModel& h) {
  out << "# g: " << h.g().id() << '\n';
  out << "# f: " << h.f().id() << '\n';
  out << "# resolution: " << h.resolution() << '\n';
  out << "# defect_bound: " << num(h.defect_bound) << '\n';
  for (double v : h.table()) out << num(v) << '\n';
}

ConjugacyModel read_conjugacy_table(std::istream& in, const MapModel& g, const MapModel& f) {
  std::string line;
  std::vector<double> values;
  std::size_t resolution = 0;
  double defect = 0.0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto colon = line.find(':');
      if (colon == std::string::npos) continue;
      std::string key = line.substr(1, colon - 1);
      key.erase(0, key.find_first_not_of(' '));
      std::string val = line.substr(colon + 1);
      val.erase(0, val.find_first_not_of(' '));
      if (key == "g" && val != g.id()) throw PreconditionError("read_conjugacy_table: table built for g = " + val);
      if (key == "f" && val != f.id()) throw PreconditionError("read_conjugacy_table: table built for f = " + val);
      if (key == "resolution") resolution = std::stoul(val);
      if (key == "defect_bound") defect = std::stod(val);
      continue;
    }
    values.push_back(std::stod(line));
  }
  if (values.empty() || (resolution != 0 && values.size() != resolution)) {
    throw PreconditionError("read_conjugacy_table: expected " + std::to_string(resolution) + " values, got " +
                            std::to_string(values.size()));
  }
  ConjugacyModel h(g, f, std::move(values));
  h.defect_bound = defect;
  return h;
}

}  // namespace hypercert
