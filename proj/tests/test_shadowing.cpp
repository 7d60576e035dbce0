#include "hypercert/shadowing.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace hypercert;

namespace {

Vec dir1(double s) {
  Vec v(1);
  v(0) = s;
  return v;
}

}  // namespace

TEST_CASE("exactly periodic segment is its own shadow") {
  const MapModel d = MapModel::doubling();
  const auto seg = iterate_orbit(d, StatePoint(1.0 / 7.0), 3);
  const ShadowingResult r = shadow_periodic(d, seg, 1e-3);
  CHECK(r.epsilon < 1e-15);
  CHECK(r.period == 3);
}

TEST_CASE("doubling shadowing bound with a closed-form constant") {
  // near the period-2 orbit {1/3, 2/3} the constant is 1 / (1 - 2^-2)
  const MapModel d = MapModel::doubling();
  const auto seg = iterate_orbit(d, StatePoint(1.0 / 3.0 + 1e-4), 2);
  const ShadowingResult r = shadow_periodic(d, seg, 1e-2);
  REQUIRE(r.bound_constant.has_value());
  CHECK(*r.bound_constant == doctest::Approx(1.0 / (1.0 - 0.25)));
  CHECK(r.epsilon <= *r.bound_constant * r.closing_gap * (1 + 1e-9));
  CHECK(r.closing_gap == doctest::Approx(3e-4).epsilon(1e-9));
}

TEST_CASE("pseudo-closing segments have the requested gap") {
  const MapModel g = MapModel::perturbed_doubling(0.5);
  const auto orbits = find_periodic_points(g, 3).orbits;
  for (double alpha : {1e-4, 1e-3, 1e-2}) {
    const auto& o = orbits.back();
    const OrbitSegment seg = pseudo_closing_segment(g, o.base(), o.period, dir1(1.0), alpha);
    CHECK(flat_distance(seg.points.back(), seg.points.front()) == doctest::Approx(alpha).epsilon(1e-6));
  }
  CHECK_THROWS_AS(pseudo_closing_segment(g, orbits.front().base(), 1, dir1(1.0), -1.0), PreconditionError);
}

TEST_CASE("pseudo-closing near a critical orbit still reaches the gap") {
  const MapModel g = MapModel::perturbed_doubling(2.0);
  const PeriodicOrbit o = [&] {
    for (const auto& orb : find_periodic_points(g, 6).orbits) {
      if (orb.period == 6 && orb.base()[0] < 1e-3) return orb;
    }
    return find_periodic_points(g, 6).orbits.back();
  }();
  const OrbitSegment seg = pseudo_closing_segment(g, o.base(), o.period, dir1(-1.0), 1e-3);
  CHECK(flat_distance(seg.points.back(), seg.points.front()) == doctest::Approx(1e-3).epsilon(1e-6));
}

TEST_CASE("torus shadowing via sequence-space Newton") {
  const MapModel c = MapModel::cat_map();
  const auto orbits = find_periodic_points(c, 3).orbits;
  Vec v(2);
  v << 0.6, 0.8;
  const auto& o = orbits.back();
  const OrbitSegment seg = pseudo_closing_segment(c, o.base(), o.period, v, 1e-4);
  const ShadowingResult r = shadow_periodic(c, seg, 1e-2);
  REQUIRE(r.bound_constant.has_value());
  CHECK(r.epsilon <= *r.bound_constant * r.closing_gap * (1 + 1e-9));
  CHECK(r.period == o.period);
}

TEST_CASE("shadowing tables are monotone and pass on the built-in models") {
  ShadowingPlan plan;
  plan.seed = 42;
  for (const MapModel& m : {MapModel::doubling(), MapModel::perturbed_doubling(0.5), MapModel::cat_map()}) {
    const ShadowingTable t = shadowing_constants(m, 30, {1e-2, 0.0, 1e-3}, plan);
    CHECK(t.pass);
    CHECK(t.monotone);
    REQUIRE(t.rows.size() == 3);
    CHECK(t.rows[0].alpha == 0.0);
    CHECK(t.rows[0].max_epsilon < 1e-12);
    for (const auto& row : t.rows) CHECK(row.failures == 0);
  }
}

TEST_CASE("doubling shadowing ratio never exceeds two") {
  ShadowingPlan plan;
  plan.seed = 7;
  const ShadowingTable t = shadowing_constants(MapModel::doubling(), 50, {1e-4, 1e-3, 1e-2}, plan);
  for (const auto& row : t.rows) CHECK(row.max_ratio <= 2.0 * (1 + 1e-9));
}

TEST_CASE("shadowing csv") {
  ShadowingPlan plan;
  const ShadowingTable t = shadowing_constants(MapModel::doubling(), 5, {1e-3}, plan);
  std::ostringstream out;
  write_shadowing_csv(out, t);
  CHECK(out.str().rfind("alpha,trials,failures,max_epsilon,max_ratio\n", 0) == 0);
}

TEST_CASE("conjugacy of the doubling map with itself is the identity") {
  const MapModel d = MapModel::doubling();
  const ConjugacyModel h = build_conjugacy(d, d, 1u << 10);
  for (std::size_t i = 0; i < h.resolution(); ++i) {
    CHECK(h.table()[i] == doctest::Approx(static_cast<double>(i) / 1024.0));
  }
  CHECK(conjugacy_defect(h, d, d, 1u << 10) == 0.0);
}

TEST_CASE("conjugacy for a perturbed doubling map") {
  const MapModel g = MapModel::perturbed_doubling(0.5);
  const MapModel f = MapModel::doubling();
  const ConjugacyModel h = build_conjugacy(g, f, 1u << 12);
  CHECK(h.monotone());
  CHECK(conjugacy_defect(h, g, f, 1u << 12) < 1e-12);
  // the fixed point 0 and the period-2 orbit go to their linear counterparts
  CHECK(h(0.0) == 0.0);
  const auto orbits = find_periodic_points(g, 2).orbits;
  for (const auto& o : orbits) {
    if (o.period != 2) continue;
    for (const auto& p : o.points) {
      const double v = h(p[0]);
      CHECK((std::abs(v - 1.0 / 3.0) < 1e-9 || std::abs(v - 2.0 / 3.0) < 1e-9));
    }
  }
}

TEST_CASE("conjugacy preconditions") {
  CHECK_THROWS_AS(build_conjugacy(MapModel::cat_map(), MapModel::doubling(), 1024), PreconditionError);
  CHECK_THROWS_AS(build_conjugacy(MapModel::doubling(), MapModel::perturbed_doubling(0.5), 1024), PreconditionError);
  CHECK_THROWS_AS(build_conjugacy(MapModel::doubling(), MapModel::doubling(), 1000), PreconditionError);
}

TEST_CASE("Hoelder estimate") {
  const MapModel f = MapModel::doubling();
  const HolderEstimate id = holder_estimate(build_conjugacy(f, f, 1u << 12), 500, 3);
  CHECK(id.holder_exponent == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(id.K == doctest::Approx(1.0).epsilon(1e-6));
  const HolderEstimate h = holder_estimate(build_conjugacy(MapModel::perturbed_doubling(0.5), f, 1u << 14), 1000, 3);
  CHECK(h.holder_exponent > 0.0);
  CHECK(h.holder_exponent <= 1.0);
  CHECK(h.K >= 1.0);
  CHECK_THROWS_AS(holder_estimate(build_conjugacy(f, f, 1024), 10, 3), PreconditionError);
}

TEST_CASE("contraction decay check") {
  const MapModel g = MapModel::perturbed_doubling(0.5);
  const HolderEstimate he = holder_estimate(build_conjugacy(g, MapModel::doubling(), 1u << 14), 1000, 5);
  DecayPlan plan;
  plan.seed = 5;
  const DecayCheck c = contraction_decay_check(g, he, 0.5, 50, plan);
  CHECK(c.pass);
  CHECK(c.pairs > 0);
  CHECK_FALSE(c.violation.has_value());
}

TEST_CASE("eigenvalue bound on the doubling fixed point") {
  const MapModel d = MapModel::doubling();
  const PeriodicOrbit o = PeriodicOrbit::from_model(d, StatePoint(0.0), 1);
  EigenvaluePlan plan;
  const EigenvalueCheck ok = eigenvalue_bound_check(d, o, 0.5, 1.0, plan);
  CHECK(ok.verdict == EigenVerdict::pass);
  REQUIRE(ok.moduli.size() == 1);
  CHECK(ok.moduli[0] == doctest::Approx(0.5));
  // a rate below the true contraction breaks the hypothesis, so nothing is concluded
  CHECK(eigenvalue_bound_check(d, o, 0.4, 1.0, plan).verdict == EigenVerdict::inapplicable);
  CHECK_THROWS_AS(eigenvalue_bound_check(d, o, 1.5, 1.0, plan), PreconditionError);
  CHECK(to_string(EigenVerdict::conclusion_violated) == "conclusion violated");
}

TEST_CASE("eigenvalue bound restricted to the contracting direction of the cat map") {
  const MapModel c = MapModel::cat_map();
  const PeriodicOrbit o = PeriodicOrbit::from_model(c, StatePoint(0.0, 0.0), 1);
  EigenvaluePlan plan;
  plan.restrict_to_contracting = true;
  const EigenvalueCheck r = eigenvalue_bound_check(c, o, 0.39, 1.0, plan);
  CHECK(r.verdict == EigenVerdict::pass);
  CHECK(r.moduli[0] == doctest::Approx((3.0 - std::sqrt(5.0)) / 2.0));
}

TEST_CASE("conjugacy table round trip") {
  const MapModel g = MapModel::perturbed_doubling(0.5);
  const MapModel f = MapModel::doubling();
  ConjugacyModel h = build_conjugacy(g, f, 256);
  h.defect_bound = 1.5e-16;
  std::ostringstream out;
  write_conjugacy_table(out, h);
  std::istringstream in(out.str());
  const ConjugacyModel r = read_conjugacy_table(in, g, f);
  CHECK(r.table() == h.table());
  CHECK(r.defect_bound == h.defect_bound);
  std::istringstream again(out.str());
  CHECK_THROWS_AS(read_conjugacy_table(again, MapModel::perturbed_doubling(1.5), f), PreconditionError);
}

TEST_CASE("seed derivation is deterministic and spreads streams") {
  CHECK(derive_seed(1, 2) == derive_seed(1, 2));
  CHECK(derive_seed(1, 2) != derive_seed(1, 3));
  CHECK(derive_seed(1, 2) != derive_seed(2, 2));
}
