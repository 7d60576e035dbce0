#include "hypercert/cocycle.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace hypercert;

TEST_CASE("doubling log-conorm sequence is constant") {
  const auto seg = iterate_orbit(MapModel::doubling(), StatePoint(0.1234), 20);
  const auto seq = log_conorm_sequence(MapModel::doubling(), seg, CocycleKind::inverse_norm);
  REQUIRE(seq.size() == 20);
  for (double v : seq.values) CHECK(v == std::log(0.5));
  CHECK(seq.mean() == doctest::Approx(std::log(0.5)));
}

TEST_CASE("orbit sequence sums to the log of the multiplier product") {
  const PeriodicSet set = find_periodic_points(MapModel::perturbed_doubling(0.5), 5);
  for (const auto& o : set.orbits) {
    const auto seq = orbit_sequence(o, CocycleKind::inverse_norm);
    double sum = 0.0;
    for (double v : seq.values) sum += v;
    CHECK(sum == doctest::Approx(std::log(orbit_multipliers(o).prod_inv_norm)).epsilon(1e-12));
  }
}

TEST_CASE("NUE certificate for the doubling map") {
  const NUECertificate c = nue_certificate(find_periodic_points(MapModel::doubling(), 8).orbits);
  CHECK(c.pass);
  CHECK(c.varsigma == 0.5);
  CHECK(c.eta == std::log(0.5));
  CHECK(c.max_period == 8);
  CHECK(c.violators.empty());
}

TEST_CASE("NUE varsigma equals the worst geometric-mean rate") {
  const MapModel g = MapModel::perturbed_doubling(0.5);
  const auto orbits = find_periodic_points(g, 6).orbits;
  double oracle = 0.0;
  for (const auto& o : orbits) {
    double log_prod = 0.0;
    for (const auto& p : o.points) log_prod -= std::log(2.0 + 0.5 * std::cos(2.0 * M_PI * p[0]));
    oracle = std::max(oracle, std::exp(log_prod / static_cast<double>(o.period)));
  }
  const NUECertificate c = nue_certificate(orbits);
  CHECK(c.varsigma == doctest::Approx(oracle).epsilon(1e-10));
  CHECK(c.pass);
}

TEST_CASE("NUE certificate names contracting orbits") {
  Mat a(1, 1), b(1, 1);
  a << 1.2;
  b << 0.5;
  const auto bad = PeriodicOrbit::from_cocycle("synthetic", {StatePoint(0.1), StatePoint(0.4)}, {a, b});
  Mat e(1, 1);
  e << 3.0;
  const auto good = PeriodicOrbit::from_cocycle("synthetic", {StatePoint(0.0)}, {e});
  const NUECertificate c = nue_certificate({good, bad});
  CHECK_FALSE(c.pass);
  REQUIRE(c.violators.size() == 1);
  CHECK(c.varsigma == doctest::Approx(std::sqrt(1.0 / 0.6)));
  CHECK_THROWS_AS(nue_certificate({}), PreconditionError);
}

TEST_CASE("NUH certificate for the cat map") {
  const NUHCertificate c = nuh_certificate(find_periodic_points(MapModel::cat_map(), 5).orbits);
  CHECK(c.pass);
  CHECK(c.varsigma == doctest::Approx((3.0 - std::sqrt(5.0)) / 2.0).epsilon(1e-12));
  CHECK(c.splittings.size() == c.stable_margins.size());
}

TEST_CASE("NUH certificate for the perturbed cat map") {
  const NUHCertificate c = nuh_certificate(find_periodic_points(MapModel::perturbed_cat(0.3), 4).orbits);
  CHECK(c.pass);
  CHECK(c.varsigma < 0.5);
}

TEST_CASE("hyperbolic times of a hand-checked sequence") {
  CocycleSequence s;
  s.values = {-1.5, 0.0, -2.0, 1.0};
  // level log(1/2) = -0.693: k = 1 and k = 3 qualify, k = 2 and 4 start with a positive term
  const auto t = hyperbolic_times(s, 0.5);
  REQUIRE(t.size() == 2);
  CHECK(t[0] == 1);
  CHECK(t[1] == 3);
  CHECK_THROWS_AS(hyperbolic_times(s, 1.5), PreconditionError);
}

TEST_CASE("Pliss density bound") {
  CocycleSequence s;
  for (int i = 0; i < 100; ++i) s.values.push_back(i % 4 == 0 ? 0.5 : -1.5);
  const double vs = 0.5, vp = std::sqrt(0.5);
  const PlissCount c = pliss_density(s, vs, vp);
  const double oracle =
      std::ceil(100.0 * (std::log(vp) - std::log(vs)) / (std::log(vp) - (-1.5)) - 1e-9);
  CHECK(c.guaranteed == static_cast<std::size_t>(oracle));
  CHECK(c.actual >= c.guaranteed);
  CHECK(c.floor == -1.5);
  const PlissCount d = pliss_density(s, vs);
  CHECK(d.guaranteed == c.guaranteed);
}

TEST_CASE("Pliss density rejects sequences above the level") {
  CocycleSequence s;
  s.values = {0.1, -0.2, 0.3};
  CHECK_THROWS_AS(pliss_density(s, 0.5, 0.7), PreconditionError);
  CHECK_THROWS_AS(pliss_density(s, 0.7, 0.5), PreconditionError);
}

TEST_CASE("Lyapunov exponents") {
  const auto d = lyapunov_spectrum(MapModel::doubling(), StatePoint(0.3), 500);
  REQUIRE(d.size() == 1);
  CHECK(d[0] == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  const auto c = lyapunov_spectrum(MapModel::cat_map(), StatePoint(0.2, 0.7), 20000);
  REQUIRE(c.size() == 2);
  CHECK(c[0] == doctest::Approx(std::log((3.0 + std::sqrt(5.0)) / 2.0)).epsilon(1e-3));
  // area preserving: exponents sum to zero
  CHECK(std::abs(c[0] + c[1]) < 1e-10);
}

TEST_CASE("adapted metric for the doubling map is exactly two") {
  const MapModel d = MapModel::doubling();
  const NUECertificate cert = nue_certificate(find_periodic_points(d, 6).orbits);
  const AdaptedMetric m = adapted_metric(d, cert, 8, 256);
  CHECK(m.pass);
  CHECK(m.sigma == doctest::Approx(2.0));
  CHECK(m.sigma0 == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("adapted metric expands where the flat metric does not") {
  const MapModel g = MapModel::perturbed_doubling(1.5);
  const NUECertificate cert = nue_certificate(find_periodic_points(g, 8).orbits);
  const AdaptedMetric m = adapted_metric(g, cert, 8, 4096);
  CHECK(min_conorm_scan(g, 1024).value < 1.0);
  CHECK(m.pass);
  CHECK(m.sigma > 1.0);
  CHECK(m.factor_at(0.5) > 1.0);
  CHECK(m.weight(0.25) > 0.0);
}

TEST_CASE("adapted metric fails at a critical point and says so") {
  const MapModel g = MapModel::perturbed_doubling(2.0);
  const NUECertificate cert = nue_certificate(find_periodic_points(g, 8).orbits);
  REQUIRE(cert.pass);
  const AdaptedMetric m = adapted_metric(g, cert, 8, 4096);
  CHECK_FALSE(m.pass);
  CHECK(m.argmin == doctest::Approx(0.5));
  CHECK(m.failure.find("increase N") != std::string::npos);
  CHECK_THROWS_AS(adapted_metric(MapModel::cat_map(), cert), PreconditionError);
}

TEST_CASE("hyperbolic time transfers to a shadowed segment") {
  const MapModel d = MapModel::doubling();
  const auto p = iterate_orbit(d, StatePoint(1.0 / 7.0), 6);
  const auto x = iterate_orbit(d, StatePoint(1.0 / 7.0 + 1e-6), 6);
  const ShadowedTimeCheck c = verify_shadowed_hyperbolic_time(d, p, x, 6, 0.6, 1e-3);
  CHECK(c.pass);
  CHECK(c.max_distance < 1e-4);
  CHECK_THROWS_AS(verify_shadowed_hyperbolic_time(d, p, x, 6, 0.6, 1e-6), PreconditionError);
  CHECK_THROWS_AS(verify_shadowed_hyperbolic_time(d, p, x, 7, 0.6, 1e-3), PreconditionError);
  // 1/2 < 0.4 fails, so n' is not a hyperbolic time of p
  CHECK_THROWS_AS(verify_shadowed_hyperbolic_time(d, p, x, 6, 0.4, 1e-3), PreconditionError);
}

TEST_CASE("cocycle csv round trip") {
  CocycleSequence s;
  s.kind = CocycleKind::unstable_inverse_norm;
  s.source = "cat_map t=1";
  s.values = {-0.9624236501192069, 0.1, -1e-12};
  std::ostringstream out;
  write_cocycle_csv(out, s);
  std::istringstream in(out.str());
  const CocycleSequence r = read_cocycle_csv(in);
  CHECK(r.kind == s.kind);
  CHECK(r.source == s.source);
  CHECK(r.values == s.values);
}

TEST_CASE("cocycle kind names") {
  for (auto k : {CocycleKind::inverse_norm, CocycleKind::stable_norm, CocycleKind::unstable_inverse_norm}) {
    CHECK(cocycle_kind_from_string(to_string(k)) == k);
  }
  CHECK_THROWS_AS(cocycle_kind_from_string("volume"), PreconditionError);
}
