#include "hypercert/periodic.hpp"

#include "lift_util.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <limits>
#include <numeric>
#include <set>
#include <utility>

namespace hypercert {

namespace {

constexpr double kPeriodicTol = 1e-10;
constexpr double kLeastPeriodTol = 1e-6;
constexpr double kDedupTol = 1e-8;

bool lex_less(const StatePoint& a, const StatePoint& b) {
  for (int i = 0; i < a.dim(); ++i) {
    if (a[i] != b[i]) return a[i] < b[i];
  }
  return false;
}

std::vector<std::complex<double>> eigenvalues_of(const Mat& m) {
  if (m.rows() == 1) return {std::complex<double>(m(0, 0), 0.0)};
  const double tr = m.trace();
  const double det = m.determinant();
  const double disc = tr * tr - 4.0 * det;
  if (disc >= 0.0) {
    const double sq = std::sqrt(disc);
    // stable root pair
    const double q = -0.5 * (-tr + std::copysign(sq, -tr));
    double l1 = q;
    double l2 = q != 0.0 ? det / q : 0.0;
    if (std::abs(l1) < std::abs(l2)) std::swap(l1, l2);
    return {{l1, 0.0}, {l2, 0.0}};
  }
  const double im = 0.5 * std::sqrt(-disc);
  return {{0.5 * tr, im}, {0.5 * tr, -im}};
}

Vec eigenvector_2x2(const Mat& m, double lambda) {
  Vec a(2), b(2);
  a << m(0, 1), lambda - m(0, 0);
  b << lambda - m(1, 1), m(1, 0);
  Vec v = a.norm() >= b.norm() ? a : b;
  if (v.norm() == 0.0) {
    // m is a multiple of the identity; any direction is an eigenvector
    v << 1.0, 0.0;
  }
  v.normalize();
  if (v(0) < 0.0 || (v(0) == 0.0 && v(1) < 0.0)) v = -v;
  return v;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return -floor_div(-a, b); }

using IMat = std::array<std::array<std::int64_t, 2>, 2>;

IMat imul(const IMat& a, const IMat& b) {
  IMat r{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
  return r;
}

using Numerators = std::pair<std::int64_t, std::int64_t>;

std::string word_string(const std::vector<int>& w) {
  std::string s;
  for (int d : w) s += static_cast<char>('0' + d);
  return s;
}

// Orbit canonicalisation for floating-point fixed points of g^n: keeps the
// points of least period n, groups them into orbits, base = smallest point.
void collect_orbits(const MapModel& model, std::size_t n, std::vector<StatePoint> pts, PeriodicSet& out) {
  std::sort(pts.begin(), pts.end(), lex_less);
  std::vector<bool> used(pts.size(), false);
  auto find_match = [&](const StatePoint& q) -> std::ptrdiff_t {
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (flat_distance(pts[i], q) < kLeastPeriodTol) return static_cast<std::ptrdiff_t>(i);
    }
    return -1;
  };
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (used[i]) continue;
    const StatePoint& p = pts[i];
    if (least_period(model, p, n) != n) {
      used[i] = true;
      continue;
    }
    std::vector<StatePoint> orbit{p};
    used[i] = true;
    StatePoint q = p;
    bool ok = true;
    for (std::size_t j = 1; j < n; ++j) {
      q = eval_map(model, q);
      const auto idx = find_match(q);
      if (idx < 0) {
        ok = false;
        break;
      }
      used[static_cast<std::size_t>(idx)] = true;
      orbit.push_back(pts[static_cast<std::size_t>(idx)]);
      q = pts[static_cast<std::size_t>(idx)];
    }
    if (!ok) {
      out.gaps.push_back({n, "point " + std::to_string(p[0]), "orbit of a fixed point of g^n left the enumerated set"});
      continue;
    }
    std::vector<Mat> cocycle;
    for (const auto& x : orbit) cocycle.push_back(jacobian(model, x));
    out.orbits.push_back(PeriodicOrbit::from_cocycle(model.id(), std::move(orbit), std::move(cocycle)));
  }
}

std::vector<StatePoint> dedupe_points(std::vector<StatePoint> pts) {
  std::sort(pts.begin(), pts.end(), lex_less);
  std::vector<StatePoint> out;
  for (const auto& p : pts) {
    bool dup = false;
    for (auto it = out.rbegin(); it != out.rend(); ++it) {
      if (flat_distance(*it, p) < kDedupTol) {
        dup = true;
        break;
      }
      if (p.dim() == 1 && p[0] - (*it)[0] > kDedupTol) break;
    }
    if (!dup && p.dim() == 1 && !out.empty() && flat_distance(out.front(), p) < kDedupTol) dup = true;
    if (!dup) out.push_back(p);
  }
  return out;
}

// ---- continuation from the linear model -------------------------------------

bool continue_fixed_point(const MapModel& target, const Vec& seed, std::size_t n, const FinderOptions& opt, Vec& out,
                          std::string& reason) {
  const MapModel linear = target.with_strength(0.0);
  const Vec shift = detail::round_vec(detail::lift_iterate(linear, seed, n).value - seed);
  const double s_end = target.strength();
  const double dir = s_end >= 0.0 ? 1.0 : -1.0;
  double s = 0.0;
  double h = opt.continuation_step;
  Vec x = seed;
  for (;;) {
    const bool last = std::abs(s_end - s) <= h;
    const double s_next = last ? s_end : s + dir * h;
    const auto solve = detail::newton_fixed_point(target.with_strength(s_next), x, n, shift, 1e-13, 50);
    if (solve.ok) {
      x = solve.x;
      s = s_next;
      if (last) break;
    } else {
      h *= 0.5;
      if (h < opt.min_continuation_step) {
        reason = "continuation stalled at s=" + std::to_string(s) + " (" + solve.reason + ")";
        return false;
      }
    }
  }
  out = x;
  return true;
}

void enumerate_symbolic(const MapModel& model, std::size_t max_period, const FinderOptions& opt, PeriodicSet& out,
                        bool allow_fallback) {
  const int k = model.degree();
  for (std::size_t n = 1; n <= max_period; ++n) {
    const auto total = static_cast<std::uint64_t>(std::llround(std::pow(static_cast<double>(k), static_cast<double>(n))));
    std::vector<StatePoint> fixed;
    fixed.reserve(total);
    std::vector<int> word(n);
    for (std::uint64_t code = 0; code < total; ++code) {
      std::uint64_t c = code;
      for (std::size_t i = n; i-- > 0;) {
        word[i] = static_cast<int>(c % static_cast<std::uint64_t>(k));
        c /= static_cast<std::uint64_t>(k);
      }
      // Linear-model fixed point of this itinerary as the starting guess.
      double x = wrap_unit(static_cast<double>(code) / (static_cast<double>(total) - 1.0));
      bool converged = false;
      for (std::size_t r = 0; r < opt.symbolic_rounds; ++r) {
        double y = x;
        for (std::size_t i = n; i-- > 0;) y = circle_branch_preimage(model, word[i], y);
        const double step = std::abs(centered_mod(y - x));
        x = y;
        if (step <= 4.0 * std::numeric_limits<double>::epsilon()) {
          converged = true;
          break;
        }
      }
      Vec v(1);
      v(0) = x;
      if (converged) {
        const auto polish = detail::newton_fixed_point(model, v, n, Vec(), 1e-13, 5);
        if (polish.ok && std::abs(centered_mod(polish.x(0) - x)) < 1e-9) v(0) = wrap_unit(polish.x(0));
        fixed.emplace_back(v(0));
        continue;
      }
      if (allow_fallback) {
        Vec seed(1), res(1);
        seed(0) = wrap_unit(static_cast<double>(code) / (static_cast<double>(total) - 1.0));
        std::string why;
        if (continue_fixed_point(model, seed, n, opt, res, why)) {
          fixed.emplace_back(res(0));
          continue;
        }
        out.gaps.push_back({n, word_string(word), "inverse-branch composition did not contract; " + why});
      } else {
        out.gaps.push_back({n, word_string(word), "inverse-branch composition did not contract"});
      }
    }
    auto unique = dedupe_points(std::move(fixed));
    out.fixed_point_counts[n] = unique.size();
    collect_orbits(model, n, std::move(unique), out);
  }
}

// Exact enumeration for integer toral automorphisms: the fixed points of A^n
// are M^{-1} z mod 1 with M = A^n - I, kept as numerators over D = |det M|.
void enumerate_lattice(const MapModel& model, std::size_t max_period, PeriodicSet& out) {
  const Mat& lp = model.linear_part();
  IMat a{{{std::llround(lp(0, 0)), std::llround(lp(0, 1))}, {{std::llround(lp(1, 0)), std::llround(lp(1, 1))}}}};
  IMat an{{{1, 0}, {0, 1}}};
  for (std::size_t n = 1; n <= max_period; ++n) {
    an = imul(a, an);
    IMat m = an;
    m[0][0] -= 1;
    m[1][1] -= 1;
    const std::int64_t det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if (det == 0) throw NumericalError("lattice enumeration: A^n - I is singular (non-hyperbolic linear part)");
    const std::int64_t D = std::llabs(det);
    const std::int64_t sg = det > 0 ? 1 : -1;
    // v = adj(M) z / det = adjs z / D
    const std::int64_t adj[2][2] = {{sg * m[1][1], -sg * m[0][1]}, {-sg * m[1][0], sg * m[0][0]}};
    const std::int64_t xs[4] = {0, m[0][0], m[0][1], m[0][0] + m[0][1]};
    const std::int64_t z1lo = *std::min_element(xs, xs + 4), z1hi = *std::max_element(xs, xs + 4);
    std::vector<Numerators> pts;
    pts.reserve(static_cast<std::size_t>(D));
    for (std::int64_t z1 = z1lo; z1 <= z1hi; ++z1) {
      std::int64_t lo = std::numeric_limits<std::int64_t>::min() / 4, hi = std::numeric_limits<std::int64_t>::max() / 4;
      bool empty = false;
      for (int i = 0; i < 2; ++i) {
        const std::int64_t kk = adj[i][0] * z1, c = adj[i][1];
        if (c > 0) {
          lo = std::max(lo, ceil_div(-kk, c));
          hi = std::min(hi, floor_div(D - 1 - kk, c));
        } else if (c < 0) {
          lo = std::max(lo, ceil_div(D - 1 - kk, c));
          hi = std::min(hi, floor_div(-kk, c));
        } else if (kk < 0 || kk > D - 1) {
          empty = true;
        }
      }
      if (empty) continue;
      for (std::int64_t z2 = lo; z2 <= hi; ++z2) {
        pts.emplace_back(adj[0][0] * z1 + adj[0][1] * z2, adj[1][0] * z1 + adj[1][1] * z2);
      }
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    out.fixed_point_counts[n] = pts.size();
    if (static_cast<std::int64_t>(pts.size()) != D) {
      out.gaps.push_back({n, "lattice", "lattice enumeration found " + std::to_string(pts.size()) + " of " +
                                            std::to_string(D) + " points"});
    }
    // exact orbits
    auto step = [&](const Numerators& p) {
      const std::int64_t u = ((a[0][0] * p.first + a[0][1] * p.second) % D + D) % D;
      const std::int64_t v = ((a[1][0] * p.first + a[1][1] * p.second) % D + D) % D;
      return Numerators{u, v};
    };
    std::set<Numerators> seen;
    for (const auto& p : pts) {
      if (seen.count(p)) continue;
      std::vector<Numerators> orb{p};
      Numerators q = step(p);
      while (q != p) {
        orb.push_back(q);
        q = step(q);
      }
      for (const auto& o : orb) seen.insert(o);
      if (orb.size() != n) continue;  // divisor period, listed at its own n
      auto base_it = std::min_element(orb.begin(), orb.end());
      std::rotate(orb.begin(), base_it, orb.end());
      std::vector<StatePoint> points;
      std::vector<Mat> cocycle;
      for (const auto& o : orb) {
        points.emplace_back(static_cast<double>(o.first) / static_cast<double>(D),
                            static_cast<double>(o.second) / static_cast<double>(D));
        cocycle.push_back(jacobian(model, points.back()));
      }
      out.orbits.push_back(PeriodicOrbit::from_cocycle(model.id(), std::move(points), std::move(cocycle)));
    }
  }
}

void enumerate_by_continuation(const MapModel& model, std::size_t max_period, const FinderOptions& opt,
                               PeriodicSet& out) {
  const MapModel linear = model.with_strength(0.0);
  PeriodicSet base;
  if (model.is_circle()) enumerate_symbolic(linear, max_period, opt, base, false);
  else enumerate_lattice(linear, max_period, base);
  out.gaps.insert(out.gaps.end(), base.gaps.begin(), base.gaps.end());

  std::map<std::size_t, std::vector<StatePoint>> bases;
  for (const auto& orb : base.orbits) {
    Vec res;
    std::string why;
    if (!continue_fixed_point(model, orb.base().coords(), orb.period, opt, res, why)) {
      std::string seed = "(" + std::to_string(orb.base()[0]);
      if (orb.dim() == 2) seed += ", " + std::to_string(orb.base()[1]);
      out.gaps.push_back({orb.period, seed + ")", why});
      continue;
    }
    bases[orb.period].push_back(StatePoint(res));
  }
  for (auto& [n, pts] : bases) {
    std::vector<StatePoint> all;
    for (const auto& p : pts) {
      StatePoint q = p;
      for (std::size_t j = 0; j < n; ++j) {
        all.push_back(q);
        q = eval_map(model, q);
      }
    }
    const std::size_t before = all.size();
    auto unique = dedupe_points(std::move(all));
    if (unique.size() != before) {
      out.gaps.push_back({n, "continuation", std::to_string(before - unique.size()) +
                                                  " continued orbit points merged with another branch"});
    }
    collect_orbits(model, n, std::move(unique), out);
  }
  for (std::size_t n = 1; n <= max_period; ++n) {
    std::size_t count = 0;
    for (const auto& orb : out.orbits) {
      if (n % orb.period == 0) count += orb.period;
    }
    out.fixed_point_counts[n] = count;
  }
}

}  // namespace

PeriodicOrbit PeriodicOrbit::from_cocycle(std::string model_id, std::vector<StatePoint> points,
                                          std::vector<Mat> cocycle) {
  if (points.empty() || points.size() != cocycle.size()) {
    throw PreconditionError("PeriodicOrbit: points and cocycle must be non-empty and of equal length");
  }
  PeriodicOrbit o;
  o.model_id = std::move(model_id);
  o.period = points.size();
  o.points = std::move(points);
  o.cocycle = std::move(cocycle);
  o.period_map = ordered_product(o.cocycle, o.points.front().dim());
  o.eigenvalues = eigenvalues_of(o.period_map);
  return o;
}

PeriodicOrbit PeriodicOrbit::from_model(const MapModel& model, const StatePoint& p, std::size_t period) {
  if (period == 0) throw PreconditionError("PeriodicOrbit: period must be >= 1");
  std::vector<StatePoint> pts{p};
  for (std::size_t j = 1; j < period; ++j) pts.push_back(eval_map(model, pts.back()));
  if (flat_distance(eval_map(model, pts.back()), p) > kPeriodicTol) {
    throw PreconditionError("PeriodicOrbit: g^t(p) != p for " + model.id());
  }
  std::vector<Mat> cocycle;
  for (const auto& x : pts) cocycle.push_back(jacobian(model, x));
  return from_cocycle(model.id(), std::move(pts), std::move(cocycle));
}

std::vector<PeriodicOrbit> PeriodicSet::with_period_at_most(std::size_t t) const {
  std::vector<PeriodicOrbit> out;
  for (const auto& o : orbits) {
    if (o.period <= t) out.push_back(o);
  }
  return out;
}

EigenSplit split_period_map(const Mat& period_map) {
  EigenSplit s;
  if (period_map.rows() == 1) {
    s.ok = true;
    s.lambda_unstable = period_map(0, 0);
    s.unstable_dir = Vec::Ones(1);
    return s;
  }
  const double tr = period_map.trace();
  const double det = period_map.determinant();
  const double disc = tr * tr - 4.0 * det;
  const double scale = std::max(1.0, tr * tr);
  if (disc < -1e-12 * scale) {
    s.reason = "splitting undefined: complex (elliptic) period-map spectrum";
    return s;
  }
  if (std::abs(disc) <= 1e-12 * scale) {
    s.reason = "splitting undefined: repeated or defective period-map eigenvalue";
    return s;
  }
  const auto ev = eigenvalues_of(period_map);
  const double l_big = ev[0].real(), l_small = ev[1].real();
  if (std::abs(std::abs(l_big) - std::abs(l_small)) <= 1e-12 * std::abs(l_big)) {
    s.reason = "splitting undefined: eigenvalues of equal modulus";
    return s;
  }
  s.ok = true;
  s.lambda_unstable = l_big;
  s.lambda_stable = l_small;
  s.unstable_dir = eigenvector_2x2(period_map, l_big);
  s.stable_dir = eigenvector_2x2(period_map, l_small);
  return s;
}

std::size_t least_period(const MapModel& model, const StatePoint& p, std::size_t n) {
  StatePoint q = p;
  for (std::size_t j = 1; j < n; ++j) {
    q = eval_map(model, q);
    if (n % j == 0 && flat_distance(q, p) < kLeastPeriodTol) return j;
  }
  return n;
}

PeriodicSet find_periodic_points(const MapModel& model, std::size_t max_period, const FinderOptions& options) {
  if (max_period < 1) throw PreconditionError("find_periodic_points: max_period must be >= 1");
  PeriodicSet out;
  out.model_id = model.id();
  out.max_period = max_period;

  const bool perturbed = model.family() == Family::perturbed_doubling || model.family() == Family::perturbed_cat;
  EnumerationMethod method = options.method;
  if (method == EnumerationMethod::automatic) {
    if (model.is_circle()) method = EnumerationMethod::symbolic;
    else if (model.is_linear()) method = EnumerationMethod::lattice;
    else method = EnumerationMethod::continuation;
  }
  switch (method) {
    case EnumerationMethod::symbolic:
      if (!model.is_circle()) throw PreconditionError("symbolic enumeration needs a circle model");
      enumerate_symbolic(model, max_period, options, out, perturbed);
      break;
    case EnumerationMethod::lattice:
      if (!model.is_linear() || model.is_circle()) {
        throw PreconditionError("lattice enumeration needs a linear torus model");
      }
      enumerate_lattice(model, max_period, out);
      break;
    case EnumerationMethod::continuation:
      if (!perturbed) {
        out.gaps.push_back({0, model.id(), "no continuation path from a linear model"});
        break;
      }
      enumerate_by_continuation(model, max_period, options, out);
      break;
    case EnumerationMethod::automatic: break;
  }
  std::stable_sort(out.orbits.begin(), out.orbits.end(), [](const PeriodicOrbit& a, const PeriodicOrbit& b) {
    if (a.period != b.period) return a.period < b.period;
    return lex_less(a.base(), b.base());
  });
  return out;
}

NewtonResult refine_newton(const MapModel& model, const StatePoint& x0, std::size_t n, double tol) {
  if (n < 1) throw PreconditionError("refine_newton: n must be >= 1");
  if (!(tol > 0.0)) throw PreconditionError("refine_newton: tol must be positive");
  NewtonResult out;
  Vec x = x0.coords();
  auto flat_residual = [&](const Vec& v) {
    const StatePoint p(v);
    StatePoint q = p;
    for (std::size_t i = 0; i < n; ++i) q = eval_map(model, q);
    return flat_distance(q, p);
  };
  for (int it = 0;; ++it) {
    const double res = flat_residual(x);
    out.residuals.push_back(res);
    if (res < tol) {
      out.point = it == 0 ? x0 : StatePoint(x);
      return out;
    }
    if (it >= 50) throw NumericalError("refine_newton: iteration cap (50) exceeded");
    const auto li = detail::lift_iterate(model, x, n);
    const Vec r = li.value - x - detail::round_vec(li.value - x);
    const Mat a = li.jacobian - Mat::Identity(model.dim(), model.dim());
    if (std::abs(a.determinant()) < 1e-14) throw NumericalError("refine_newton: singular Newton matrix");
    const Vec step = a.inverse() * r;
    if (step.norm() == 0.0) {
      throw NumericalError("refine_newton: residual " + std::to_string(res) + " stalled above tolerance");
    }
    x -= step;
  }
}

Multipliers orbit_multipliers(const PeriodicOrbit& orbit) {
  Multipliers m;
  double prod = 1.0;
  for (const auto& j : orbit.cocycle) prod /= conorm(j);
  m.prod_inv_norm = prod;
  const EigenSplit split = split_period_map(orbit.period_map);
  if (!split.ok) {
    m.splitting_issue = split.reason;
    return m;
  }
  auto transported = [&](Vec e) {
    double p = 1.0;
    for (const auto& j : orbit.cocycle) {
      const Vec w = j * e;
      const double nw = w.norm();
      p *= nw;
      e = w / nw;
    }
    return p;
  };
  if (orbit.dim() == 1) {
    double p = 1.0;
    for (const auto& j : orbit.cocycle) p *= std::abs(j(0, 0));
    m.prod_unstable_conorm = p;
    return m;
  }
  m.prod_stable_norm = transported(split.stable_dir);
  m.prod_unstable_conorm = transported(split.unstable_dir);
  return m;
}

}  // namespace hypercert

namespace hypercert {

std::string orbit_label(const PeriodicOrbit& orbit) {
  char buf[96];
  if (orbit.dim() == 1) {
    std::snprintf(buf, sizeof buf, "t=%zu p=(%.12g)", orbit.period, orbit.base()[0]);
  } else {
    std::snprintf(buf, sizeof buf, "t=%zu p=(%.12g,%.12g)", orbit.period, orbit.base()[0], orbit.base()[1]);
  }
  return buf;
}

void write_orbits_csv(std::ostream& out, const std::vector<PeriodicOrbit>& orbits) {
  const bool two_d = !orbits.empty() && orbits.front().dim() == 2;
  out << "orbit,period,index,x" << (two_d ? ",y" : "") << ",prod_inv_norm,prod_stable_norm,prod_unstable_conorm\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  for (std::size_t i = 0; i < orbits.size(); ++i) {
    const auto& o = orbits[i];
    const Multipliers m = orbit_multipliers(o);
    const std::string tail = "," + num(m.prod_inv_norm) + "," +
                             (m.prod_stable_norm ? num(*m.prod_stable_norm) : std::string()) + "," +
                             (m.prod_unstable_conorm ? num(*m.prod_unstable_conorm) : std::string());
    for (std::size_t j = 0; j < o.points.size(); ++j) {
      out << i << ',' << o.period << ',' << j << ',' << num(o.points[j][0]);
      if (two_d) out << ',' << num(o.points[j][1]);
      out << tail << '\n';
    }
  }
}

}  // namespace hypercert
