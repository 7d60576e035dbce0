#include "hypercert/maps.hpp"

#include <doctest.h>

#include <cmath>

using namespace hypercert;

namespace {

Vec v1(double x) {
  Vec v(1);
  v(0) = x;
  return v;
}

}  // namespace

TEST_CASE("state points wrap into the unit cell") {
  CHECK(StatePoint(1.25)[0] == doctest::Approx(0.25));
  CHECK(StatePoint(-0.25)[0] == doctest::Approx(0.75));
  CHECK(StatePoint(1.0)[0] == 0.0);
  CHECK(flat_distance(StatePoint(0.05), StatePoint(0.95)) == doctest::Approx(0.1));
  CHECK(flat_distance(StatePoint(0.05, 0.5), StatePoint(0.95, 0.5)) == doctest::Approx(0.1));
  CHECK_THROWS_AS(flat_distance(StatePoint(0.1), StatePoint(0.1, 0.1)), PreconditionError);
}

TEST_CASE("doubling map values and derivative") {
  const MapModel d = MapModel::doubling();
  CHECK(d.degree() == 2);
  CHECK(d.is_circle());
  CHECK(d.is_linear());
  CHECK(eval_map(d, StatePoint(0.3))[0] == doctest::Approx(0.6));
  CHECK(eval_map(d, StatePoint(0.7))[0] == doctest::Approx(0.4));
  CHECK(jacobian(d, StatePoint(0.123))(0, 0) == 2.0);
}

TEST_CASE("perturbed doubling at zero strength equals the doubling map bit for bit") {
  const MapModel d = MapModel::doubling();
  const MapModel p = MapModel::perturbed_doubling(0.0);
  for (int i = 0; i < 1024; ++i) {
    const StatePoint x(static_cast<double>(i) / 1024.0 + 1e-7);
    CHECK(eval_map(d, x)[0] == eval_map(p, x)[0]);
    CHECK(jacobian(d, x)(0, 0) == jacobian(p, x)(0, 0));
  }
}

TEST_CASE("perturbed doubling derivative matches a central difference") {
  for (double s : {0.5, 1.5, 2.0}) {
    const MapModel g = MapModel::perturbed_doubling(s);
    for (double x : {0.05, 0.25, 0.4, 0.77}) {
      const double h = 1e-6;
      const double fd = (g.lift(v1(x + h))(0) - g.lift(v1(x - h))(0)) / (2 * h);
      const double exact = 2.0 + s * std::cos(2.0 * M_PI * x);
      CHECK(jacobian(g, StatePoint(x))(0, 0) == doctest::Approx(exact).epsilon(1e-12));
      CHECK(fd == doctest::Approx(exact).epsilon(1e-7));
    }
  }
}

TEST_CASE("lift is equivariant under integer shifts") {
  const MapModel g = MapModel::perturbed_doubling(1.5);
  for (double x : {0.1, 0.6}) CHECK(g.lift(v1(x + 1.0))(0) == doctest::Approx(g.lift(v1(x))(0) + 2.0));
}

TEST_CASE("cat map values, inverse and linear part") {
  const MapModel c = MapModel::cat_map();
  CHECK(c.dim() == 2);
  CHECK(c.invertible());
  const StatePoint y = eval_map(c, StatePoint(0.1, 0.2));
  CHECK(y[0] == doctest::Approx(0.4));
  CHECK(y[1] == doctest::Approx(0.3));
  const StatePoint back(c.inverse_at(y.coords()));
  CHECK(flat_distance(back, StatePoint(0.1, 0.2)) < 1e-15);
  CHECK(c.linear_part()(0, 0) == 2.0);
  CHECK(c.linear_part()(1, 1) == 1.0);
}

TEST_CASE("perturbed cat inverse undoes the map") {
  const MapModel c = MapModel::perturbed_cat(0.3);
  for (double x : {0.13, 0.5, 0.91}) {
    const StatePoint p(x, 1.0 - x / 2);
    const StatePoint back(c.inverse_at(eval_map(c, p).coords()));
    CHECK(flat_distance(back, p) < 1e-13);
  }
}

TEST_CASE("inverse branches of circle maps") {
  const MapModel g = MapModel::perturbed_doubling(0.5);
  const StatePoint y(0.37);
  const auto branches = inverse_branches(g, y);
  REQUIRE(branches.size() == 2);
  for (const auto& b : branches) {
    CHECK(flat_distance(eval_map(g, b.preimage), y) < 1e-13);
    CHECK(b.derivative(0, 0) == doctest::Approx(1.0 / jacobian(g, b.preimage)(0, 0)));
  }
}

TEST_CASE("inverse branches fail at a critical preimage") {
  // g_2(1/2) = 1, and g_2'(1/2) = 0
  const MapModel g = MapModel::perturbed_doubling(2.0);
  CHECK_THROWS_AS(inverse_branches(g, StatePoint(0.0)), NumericalError);
}

TEST_CASE("branch cuts and branch index") {
  const MapModel d = MapModel::doubling();
  const auto cuts = circle_branch_cuts(d);
  REQUIRE(cuts.size() == 2);
  CHECK(cuts[0] == 0.0);
  CHECK(cuts[1] == doctest::Approx(0.5));
  CHECK(circle_branch_index(d, 0.2) == 0);
  CHECK(circle_branch_index(d, 0.7) == 1);
  CHECK(circle_branch_preimage(d, 1, 0.4) == doctest::Approx(0.7));
  CHECK(circle_branch_preimage(d, 1, 1.0) < 1.0);
}

TEST_CASE("minimum conorm scan") {
  CHECK(min_conorm_scan(MapModel::doubling(), 64).value == doctest::Approx(2.0));
  const ConormScan s = min_conorm_scan(MapModel::perturbed_doubling(1.5), 1024);
  CHECK(s.value == doctest::Approx(0.5));
  CHECK(s.argmin[0] == doctest::Approx(0.5));
  CHECK(min_conorm_scan(MapModel::cat_map(), 16).value == doctest::Approx((3.0 - std::sqrt(5.0)) / 2.0));
  CHECK_THROWS_AS(min_conorm_scan(MapModel::doubling(), 1), PreconditionError);
}

TEST_CASE("custom circle map from expressions") {
  const double s = 0.2 * M_PI;  // lift coefficient 0.1 = s / (2 pi)
  const MapModel c = MapModel::custom_circle("2*x + 0.1*sin(2*pi*x)", "2 + 0.2*pi*cos(2*pi*x)", 2);
  const MapModel p = MapModel::perturbed_doubling(s);
  for (double x : {0.0, 0.2, 0.55, 0.9}) {
    CHECK(eval_map(c, StatePoint(x))[0] == doctest::Approx(eval_map(p, StatePoint(x))[0]).epsilon(1e-14));
    CHECK(jacobian(c, StatePoint(x))(0, 0) == doctest::Approx(jacobian(p, StatePoint(x))(0, 0)).epsilon(1e-14));
  }
}

TEST_CASE("custom circle map rejects bad input") {
  CHECK_THROWS_AS(MapModel::custom_circle("2*x +", "2", 2), PreconditionError);
  CHECK_THROWS_AS(MapModel::custom_circle("3*x", "3", 2), PreconditionError);
  CHECK_THROWS_AS(MapModel::custom_circle("2*x", "2", 0), PreconditionError);
}

TEST_CASE("family names round trip") {
  for (Family f : {Family::doubling, Family::perturbed_doubling, Family::cat_map, Family::perturbed_cat}) {
    CHECK(family_from_string(to_string(f)) == f);
  }
  CHECK_THROWS_AS(family_from_string("tent"), PreconditionError);
}

TEST_CASE("model knobs") {
  const MapModel g = MapModel::perturbed_doubling(0.5);
  CHECK(g.with_strength(1.5).strength() == 1.5);
  CHECK(g.with_branch_radius(0.05).branch_radius() == 0.05);
  CHECK_THROWS_AS((void)g.with_branch_radius(0.6), PreconditionError);
  CHECK_THROWS_AS((void)MapModel::doubling().with_strength(1.0), PreconditionError);
  CHECK_THROWS_AS(MapModel::perturbed_doubling(-1.0), PreconditionError);
}

TEST_CASE("orbit segments") {
  const OrbitSegment seg = iterate_orbit(MapModel::doubling(), StatePoint(0.2), 4);
  CHECK(seg.length() == 4);
  CHECK(seg.points[4][0] == doctest::Approx(0.2));
}
