// Randomised properties over seeded inputs.
#include "hypercert/certifier.hpp"
#include "hypercert/cocycle.hpp"
#include "hypercert/shadowing.hpp"
#include "hypercert/splitting.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace hypercert;

namespace {

constexpr std::uint64_t kSeed = 0x5eed'2024;

Vec vec1(double x) {
  Vec v(1);
  v(0) = x;
  return v;
}

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

// n is a hyperbolic time iff every backward window ending at n-1 sums to at most k log(level)
std::vector<std::size_t> brute_hyperbolic_times(const std::vector<double>& a, double level) {
  std::vector<std::size_t> out;
  const long double l = std::log(static_cast<long double>(level));
  for (std::size_t n = 1; n <= a.size(); ++n) {
    bool ok = true;
    long double s = 0.0L;
    for (std::size_t k = 1; k <= n && ok; ++k) {
      s += a[n - k];
      ok = s <= static_cast<long double>(k) * l;
    }
    if (ok) out.push_back(n);
  }
  return out;
}

CocycleSequence random_sequence(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  CocycleSequence s;
  for (std::size_t i = 0; i < n; ++i) s.values.push_back(u(rng));
  return s;
}

}  // namespace

TEST_CASE("hyperbolic times agree with the brute-force definition") {
  std::mt19937_64 rng(kSeed);
  std::uniform_real_distribution<double> level(0.05, 0.95);
  for (int trial = 0; trial < 300; ++trial) {
    const CocycleSequence s = random_sequence(rng, 1 + static_cast<std::size_t>(trial % 60), -2.5, 1.0);
    const double v = level(rng);
    CAPTURE(trial);
    CHECK(hyperbolic_times(s, v) == brute_hyperbolic_times(s.values, v));
  }
}

TEST_CASE("Pliss guarantee holds on random sequences below the level") {
  std::mt19937_64 rng(kSeed + 1);
  std::uniform_real_distribution<double> level(0.1, 0.8);
  for (int trial = 0; trial < 300; ++trial) {
    const double vs = level(rng);
    const double vp = std::sqrt(vs);
    CocycleSequence s = random_sequence(rng, 200, -4.0, 1.5);
    // shift so the mean sits at or below log(varsigma)
    const double shift = std::min(0.0, std::log(vs) - s.mean()) - 1e-12;
    for (double& a : s.values) a += shift;
    const PlissCount c = pliss_density(s, vs, vp);
    CAPTURE(trial);
    CHECK(c.actual >= c.guaranteed);
    CHECK(c.actual == brute_hyperbolic_times(s.values, vp).size());
    CHECK(c.guaranteed >= 1);
  }
}

TEST_CASE("lift equivariance under integer translation") {
  std::mt19937_64 rng(kSeed + 2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const MapModel custom = MapModel::custom_circle("3*x + 0.1*sin(2*pi*x)", "3 + 0.2*pi*cos(2*pi*x)", 3);
  for (const MapModel& m : {MapModel::doubling(), MapModel::perturbed_doubling(0.5),
                            MapModel::perturbed_doubling(1.9), custom}) {
    for (int i = 0; i < 200; ++i) {
      const double x = u(rng);
      const int k = static_cast<int>(u(rng) * 7.0) - 3;
      CHECK(m.lift(vec1(x + k))(0) ==
            doctest::Approx(m.lift(vec1(x))(0) + k * m.degree()).epsilon(1e-13));
    }
  }
}

TEST_CASE("fixed-point counts of degree-d circle maps are d^n - 1") {
  for (double s : {0.0, 0.7, 1.5}) {
    const PeriodicSet set = find_periodic_points(MapModel::perturbed_doubling(s), 7);
    CHECK(set.complete());
    std::map<std::size_t, std::size_t> by_least;
    for (const auto& o : set.orbits) by_least[o.period] += o.period;
    for (std::size_t n = 1; n <= 7; ++n) {
      std::size_t oracle_fix = 0;
      for (const auto& [t, count] : by_least) {
        if (n % t == 0) oracle_fix += count;
      }
      CAPTURE(s);
      CAPTURE(n);
      CHECK(oracle_fix == (std::size_t{1} << n) - 1);
    }
  }
}

TEST_CASE("flat distance is a metric bounded by half the diagonal") {
  std::mt19937_64 rng(kSeed + 3);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 500; ++i) {
    const StatePoint a(u(rng), u(rng)), b(u(rng), u(rng)), c(u(rng), u(rng));
    CHECK(flat_distance(a, b) == flat_distance(b, a));
    CHECK(flat_distance(a, c) <= flat_distance(a, b) + flat_distance(b, c) + 1e-15);
    CHECK(flat_distance(a, b) <= std::sqrt(0.5) + 1e-15);
    CHECK(flat_distance(a, a) == 0.0);
  }
}

TEST_CASE("Lyapunov exponents of area-preserving torus maps sum to zero") {
  std::mt19937_64 rng(kSeed + 4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const MapModel& m : {MapModel::cat_map(), MapModel::perturbed_cat(0.3)}) {
    for (int i = 0; i < 10; ++i) {
      const StatePoint x(u(rng), u(rng));
      const auto spec = lyapunov_spectrum(m, x, 2000);
      // the oracle is the Birkhoff mean of log|det Dg| along the same orbit
      double logdet = 0.0;
      StatePoint p = x;
      for (int k = 0; k < 2000; ++k) {
        logdet += std::log(std::abs(jacobian(m, p).determinant()));
        p = eval_map(m, p);
      }
      CHECK(spec[0] + spec[1] == doctest::Approx(logdet / 2000.0).epsilon(1e-9).scale(1.0));
      CHECK(spec[0] > 0.0);
    }
  }
}

TEST_CASE("circle Lyapunov exponent is the Birkhoff mean of log|g'|") {
  std::mt19937_64 rng(kSeed + 5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const MapModel g = MapModel::perturbed_doubling(0.5);
  for (int i = 0; i < 10; ++i) {
    const StatePoint x(u(rng));
    double sum = 0.0;
    StatePoint p = x;
    for (int k = 0; k < 500; ++k) {
      sum += std::log(2.0 + 0.5 * std::cos(2.0 * M_PI * p[0]));
      p = eval_map(g, p);
    }
    CHECK(lyapunov_spectrum(g, x, 500)[0] == doctest::Approx(sum / 500.0).epsilon(1e-12));
  }
}

TEST_CASE("diagonal cones are invariant under the cat map derivative") {
  std::mt19937_64 rng(kSeed + 6);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const ConeSpec cone{vec2(1, -1), vec2(1, 1), 0.5};
  const MapModel m = MapModel::cat_map();
  int tested = 0;
  for (int i = 0; i < 2000; ++i) {
    const StatePoint x(u(rng), u(rng));
    const Vec v = vec2(u(rng), u(rng));
    const Mat j = jacobian(m, x);
    if (cone.in_unstable_cone(v)) {
      ++tested;
      CHECK(cone.in_unstable_cone(j * v));
    }
    if (cone.in_stable_cone(v)) CHECK(cone.in_stable_cone(j.inverse() * v));
  }
  CHECK(tested > 100);
}

TEST_CASE("shadowing distance is within the constant times the gap") {
  std::mt19937_64 rng(kSeed + 7);
  std::uniform_real_distribution<double> alpha(1e-5, 1e-2);
  // uniformly expanding maps only: below that there is no a-priori constant
  for (const MapModel& m : {MapModel::doubling(), MapModel::perturbed_doubling(0.5), MapModel::perturbed_doubling(0.9)}) {
    const auto orbits = find_periodic_points(m, 5).orbits;
    for (int i = 0; i < 40; ++i) {
      const auto& o = orbits[static_cast<std::size_t>(rng() % orbits.size())];
      const double a = alpha(rng);
      const OrbitSegment seg = pseudo_closing_segment(m, o.base(), o.period, vec1(rng() % 2 ? 1.0 : -1.0), a);
      const ShadowingResult r = shadow_periodic(m, seg, 0.05);
      REQUIRE(r.bound_constant.has_value());
      CHECK(r.epsilon <= *r.bound_constant * r.closing_gap * (1 + 1e-9));
    }
  }
}

TEST_CASE("conjugacies are monotone with vanishing defect") {
  std::mt19937_64 rng(kSeed + 8);
  std::uniform_real_distribution<double> strength(0.0, 0.95);
  const MapModel f = MapModel::doubling();
  for (int i = 0; i < 6; ++i) {
    const MapModel g = MapModel::perturbed_doubling(strength(rng));
    const ConjugacyModel h = build_conjugacy(g, f, 1u << 11);
    CHECK(h.monotone());
    CHECK(h(0.0) == 0.0);
    CHECK(conjugacy_defect(h, g, f, 1u << 11) < 1e-8);
  }
}

TEST_CASE("report rounding is idempotent") {
  std::mt19937_64 rng(kSeed + 9);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int i = 0; i < 1000; ++i) {
    const double x = std::exp(u(rng)) * (i % 2 ? 1.0 : -1.0);
    const double r = report_round(x);
    CHECK(report_round(r) == r);
    CHECK(std::abs(r - x) <= 1e-11 * std::abs(x));
  }
}

TEST_CASE("verdict derivation only depends on the statuses it cites") {
  std::mt19937_64 rng(kSeed + 10);
  const std::vector<std::string> names{"local_diffeo", "nue",        "shadowing", "adapted_metric",
                                       "pliss",        "conjugacy",  "eigenvalue_bound"};
  const CheckStatus all[] = {CheckStatus::pass, CheckStatus::fail, CheckStatus::skipped, CheckStatus::error};
  for (int i = 0; i < 500; ++i) {
    std::map<std::string, CheckRecord> checks;
    for (const auto& n : names) {
      if (rng() % 5 == 0) continue;
      CheckRecord r;
      r.status = all[rng() % 4];
      checks[n] = r;
    }
    const Verdict v = derive_verdict(checks, 1);
    for (const auto& b : v.basis) CHECK(checks.count(b) == 1);
    // flipping a check outside the basis leaves the verdict unchanged
    for (const auto& n : names) {
      if (std::find(v.basis.begin(), v.basis.end(), n) != v.basis.end() || !checks.count(n)) continue;
      auto copy = checks;
      copy[n].status = copy[n].passed() ? CheckStatus::fail : CheckStatus::pass;
      CHECK(derive_verdict(copy, 1).verdict == v.verdict);
    }
    if (v.verdict == kVerdictExpanding) {
      for (const auto& n : {"local_diffeo", "nue", "shadowing", "adapted_metric"}) CHECK(checks.at(n).passed());
    }
  }
}
