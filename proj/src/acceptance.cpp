#include "hypercert/acceptance.hpp"

#include "hypercert/certifier.hpp"
#include "hypercert/cocycle.hpp"
#include "hypercert/periodic.hpp"
#include "hypercert/shadowing.hpp"
#include "hypercert/splitting.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>

namespace hypercert {

namespace {

std::string g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  std::string failures;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      failures += (pass ? "FAILED " : "; ") + what;
      pass = false;
    }
  }

  [[nodiscard]] std::string text() const { return failures.empty() ? detail.str() : failures + " | " + detail.str(); }
};

using Body = std::function<void(Outcome&, const SelftestOptions&)>;

// |det(A^n - I)| for the cat matrix, in integers.
long long cat_fixed_count(int n) {
  long long a = 1, b = 0, c = 0, d = 1;
  for (int i = 0; i < n; ++i) {
    const long long na = 2 * a + c, nb = 2 * b + d, nc = a + c, nd = b + d;
    a = na;
    b = nb;
    c = nc;
    d = nd;
  }
  return std::llabs((a - 1) * (d - 1) - b * c);
}

void doubling_exactness(Outcome& out, const SelftestOptions& opt) {
  const double tol = 1e-12 * opt.tolerance_scale;
  const PeriodicSet set = find_periodic_points(MapModel::doubling(), 12);
  out.require(set.complete(), "enumeration has gaps");
  for (std::size_t n = 1; n <= 12; ++n) {
    const auto it = set.fixed_point_counts.find(n);
    const std::size_t want = (std::size_t{1} << n) - 1;
    out.require(it != set.fixed_point_counts.end() && it->second == want,
                "#Fix(g^" + std::to_string(n) + ") != " + std::to_string(want));
  }
  double worst = 0.0;
  for (const auto& o : set.orbits) {
    double prod = 1.0;
    for (const auto& m : o.cocycle) prod *= m(0, 0);
    worst = std::max(worst, std::abs(prod / std::ldexp(1.0, static_cast<int>(o.period)) - 1.0));
  }
  out.require(worst <= tol, "multiplier product off by " + g(worst));
  const NUECertificate cert = nue_certificate(set.orbits);
  out.require(cert.varsigma == 0.5, "varsigma = " + g(cert.varsigma));
  out.detail << "counts 2^n-1 for n<=12, multiplier error " << g(worst) << ", varsigma " << cert.varsigma;
}

void cat_counting(Outcome& out, const SelftestOptions&) {
  const PeriodicSet set = find_periodic_points(MapModel::cat_map(), 8);
  std::string counts;
  for (int n = 1; n <= 8; ++n) {
    const auto it = set.fixed_point_counts.find(static_cast<std::size_t>(n));
    const long long want = cat_fixed_count(n);
    const long long got = it == set.fixed_point_counts.end() ? -1 : static_cast<long long>(it->second);
    out.require(got == want, "#Fix(A^" + std::to_string(n) + ") = " + std::to_string(got) + " != " +
                                 std::to_string(want));
    counts += (n > 1 ? "," : "") + std::to_string(got);
  }
  out.detail << "counts " << counts;
}

void lyapunov(Outcome& out, const SelftestOptions& opt) {
  const double exact = std::log((3.0 + std::sqrt(5.0)) / 2.0);
  const auto spec = lyapunov_spectrum(MapModel::cat_map(), StatePoint(0.1234567, 0.7654321), 100000);
  const double err = std::max(std::abs(spec[0] - exact), std::abs(spec[1] + exact));
  out.require(err <= 1e-4 * opt.tolerance_scale, "cat exponent error " + g(err));
  double derr = 0.0;
  for (std::size_t n : {1, 10, 1000, 20000}) {
    const auto d = lyapunov_spectrum(MapModel::doubling(), StatePoint(0.3141592653), n);
    derr = std::max(derr, std::abs(d[0] - std::log(2.0)));
  }
  out.require(derr <= 1e-12 * opt.tolerance_scale, "doubling exponent error " + g(derr));
  out.detail << "cat +-" << spec[0] << " (error " << g(err) << "), doubling error " << g(derr);
}

// Every backward partial sum of length i ending at k-1 is <= i log(varsigma).
std::vector<std::size_t> brute_hyperbolic_times(const std::vector<double>& a, double varsigma) {
  const double level = std::log(varsigma);
  std::vector<std::size_t> out;
  for (std::size_t k = 1; k <= a.size(); ++k) {
    long double sum = 0.0L;
    bool ok = true;
    for (std::size_t i = 1; i <= k && ok; ++i) {
      sum += static_cast<long double>(a[k - i]) - level;
      ok = sum <= 0.0L;
    }
    if (ok) out.push_back(k);
  }
  return out;
}

void pliss_suite(Outcome& out, const SelftestOptions& opt) {
  std::mt19937_64 rng(derive_seed(opt.seed, 4));
  std::size_t cases = 0, mismatches = 0, shortfalls = 0;
  double min_slack = 1e300;
  while (cases < 1000) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(20, 300)(rng);
    const double varsigma = std::uniform_real_distribution<double>(0.2, 0.9)(rng);
    const double spread = std::uniform_real_distribution<double>(0.1, 2.0)(rng);
    std::normal_distribution<double> noise(0.0, spread);
    std::vector<double> a(n);
    for (auto& v : a) v = noise(rng);
    double mean = 0.0;
    for (double v : a) mean += v;
    mean /= static_cast<double>(n);
    // shift so the mean sits at or below log(varsigma)
    const double shift = std::log(varsigma) - mean - std::uniform_real_distribution<double>(0.0, 0.3)(rng);
    for (auto& v : a) v += shift;
    CocycleSequence seq;
    seq.values = a;
    if (seq.mean() > std::log(varsigma)) continue;
    const double vp = std::sqrt(varsigma);
    const PlissCount pc = pliss_density(seq, varsigma, vp);
    const auto brute = brute_hyperbolic_times(a, vp);
    if (brute != hyperbolic_times(seq, vp)) ++mismatches;
    if (brute.size() < pc.guaranteed) ++shortfalls;
    if (pc.guaranteed > 0) {
      min_slack = std::min(min_slack, static_cast<double>(brute.size()) / static_cast<double>(pc.guaranteed));
    }
    ++cases;
  }
  out.require(mismatches == 0, std::to_string(mismatches) + " hyperbolic_times mismatches");
  out.require(shortfalls == 0, std::to_string(shortfalls) + " counts below the guaranteed bound");
  out.detail << cases << " sequences, min actual/guaranteed " << g(min_slack);
}

void shadowing_bound(Outcome& out, const SelftestOptions& opt) {
  ShadowingPlan plan;
  plan.seed = opt.seed;
  const std::vector<double> alphas{1e-4, 1e-3, 1e-2};
  const ShadowingTable d = shadowing_constants(MapModel::doubling(), 100, alphas, plan);
  const double bound = 2.0 * opt.tolerance_scale;
  double worst = 0.0;
  for (const auto& row : d.rows) {
    out.require(row.failures == 0, "doubling failures at alpha " + g(row.alpha));
    worst = std::max(worst, row.max_ratio);
  }
  // the exact constant for a fixed point is 2, so allow rounding on top
  out.require(worst <= bound * (1.0 + 1e-9), "doubling epsilon/alpha = " + g(worst));
  const ShadowingTable c = shadowing_constants(MapModel::cat_map(), 100, alphas, plan);
  double lo = 1e300, hi = 0.0;
  for (const auto& row : c.rows) {
    out.require(row.failures == 0, "cat failures at alpha " + g(row.alpha));
    lo = std::min(lo, row.max_ratio);
    hi = std::max(hi, row.max_ratio);
  }
  const double mid = 0.5 * (lo + hi);
  const double spread = (hi - lo) / mid;
  out.require(spread <= 0.2 * opt.tolerance_scale, "cat C spread " + g(spread));
  out.detail << "doubling max epsilon/alpha " << g(worst) << ", cat C " << g(mid) << " +-" << g(100 * spread / 2)
             << "%";
}

void domination(Outcome& out, const SelftestOptions& opt) {
  const double s5 = std::sqrt(5.0);
  const double want = (3.0 - s5) / (3.0 + s5);
  const MapModel cat = MapModel::cat_map();
  const PeriodicSet set = find_periodic_points(cat, 4);
  const DominationCertificate dc = domination_check(cat, periodic_splitting(set.orbits), 1);
  out.require(std::abs(dc.lambda - want) <= 1e-10 * opt.tolerance_scale, "domination lambda " + g(dc.lambda));

  const double gold = (s5 - 1.0) / 2.0;
  Vec eu(2), es(2);
  eu << 1.0, gold;
  es << -gold, 1.0;
  std::mt19937_64 rng(derive_seed(opt.seed, 6));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<StatePoint> pts;
  for (int i = 0; i < 32; ++i) pts.emplace_back(u(rng), u(rng));
  Vec diag_s(2), diag_u(2);
  diag_s << 1.0, -1.0;
  diag_u << 1.0, 1.0;
  std::vector<SplittingField> fields;
  double to_eigen = 0.0;
  for (double width : {0.3, 0.7}) {
    const SplittingField f = cone_field_iterate(cat, pts, {ConeSpec{diag_s, diag_u, width}}, 50);
    for (const auto& s : f.samples) {
      to_eigen = std::max(to_eigen, principal_angle(s.second, Subspace::line(s.point, eu)));
      to_eigen = std::max(to_eigen, principal_angle(s.first, Subspace::line(s.point, es)));
    }
    fields.push_back(f);
  }
  double between = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    between = std::max(between, principal_angle(fields[0].samples[i].second, fields[1].samples[i].second));
    between = std::max(between, principal_angle(fields[0].samples[i].first, fields[1].samples[i].first));
  }
  out.require(to_eigen <= 1e-8 * opt.tolerance_scale, "cone angle to eigen-directions " + g(to_eigen));
  out.require(between <= 1e-6 * opt.tolerance_scale, "widths disagree by " + g(between));
  out.detail << "lambda " << dc.lambda << " (error " << g(std::abs(dc.lambda - want)) << "), cone angle "
             << g(to_eigen) << ", width disagreement " << g(between);
}

void conjugacy(Outcome& out, const SelftestOptions& opt) {
  const MapModel gs = MapModel::perturbed_doubling(0.5);
  const MapModel f = MapModel::doubling();
  const ConjugacyModel h = build_conjugacy(gs, f, 1u << 14);
  const double defect = conjugacy_defect(h, gs, f, 1u << 14);
  out.require(defect < 1e-8 * opt.tolerance_scale, "defect " + g(defect));
  const auto& t = h.table();
  bool strict = true;
  for (std::size_t i = 1; i < t.size(); ++i) strict = strict && t[i] > t[i - 1];
  out.require(strict, "h not strictly monotone");
  // periodic points of the doubling map with period t are k / (2^t - 1)
  const PeriodicSet set = find_periodic_points(gs, 8);
  out.require(set.complete(), "period <= 8 enumeration has gaps");
  double worst = 0.0;
  std::size_t points = 0;
  for (const auto& o : set.orbits) {
    const double denom = std::ldexp(1.0, static_cast<int>(o.period)) - 1.0;
    for (const auto& p : o.points) {
      const double v = h(p[0]);
      worst = std::max(worst, std::abs(centered_mod(v - std::round(v * denom) / denom)));
      ++points;
    }
  }
  out.require(worst <= 1e-6 * opt.tolerance_scale, "periodic image off by " + g(worst));
  out.detail << "defect " << g(defect) << ", strictly monotone, " << points << " periodic points mapped within "
             << g(worst);
}

void eigenvalue_suite(Outcome& out, const SelftestOptions& opt) {
  struct Case {
    MapModel model;
    bool restrict;
  };
  const std::vector<Case> cases{{MapModel::doubling(), false},
                                {MapModel::perturbed_doubling(0.5), false},
                                {MapModel::perturbed_doubling(1.5), false},
                                {MapModel::cat_map(), true},
                                {MapModel::perturbed_cat(0.3), true}};
  std::size_t pass = 0, inapplicable = 0, violated = 0;
  for (const auto& c : cases) {
    const PeriodicSet set = find_periodic_points(c.model, 4);
    for (const auto& o : set.orbits) {
      double rate;
      if (o.dim() == 1) {
        rate = 1.0 / std::abs(o.period_map(0, 0));
      } else {
        rate = 1.0 / std::abs(split_period_map(o.period_map).lambda_unstable);
      }
      for (double factor : {1.05, 1.5}) {
        for (double beta : {1.0, 0.9}) {
          EigenvaluePlan plan;
          plan.restrict_to_contracting = c.restrict;
          plan.seed = opt.seed;
          const auto r = eigenvalue_bound_check(c.model, o, std::min(0.999, factor * rate), beta, plan);
          if (r.verdict == EigenVerdict::pass) ++pass;
          if (r.verdict == EigenVerdict::inapplicable) ++inapplicable;
          if (r.verdict == EigenVerdict::conclusion_violated) ++violated;
        }
      }
    }
  }
  out.require(violated == 0, std::to_string(violated) + " orbits with the conclusion violated");
  out.require(pass > 0, "hypothesis never verified");
  // falsification: lambda below the true contraction of the doubling fixed point
  const PeriodicSet d = find_periodic_points(MapModel::doubling(), 1);
  EigenvaluePlan plan;
  plan.seed = opt.seed;
  const auto fals = eigenvalue_bound_check(MapModel::doubling(), d.orbits.front(), 0.4, 1.0, plan);
  out.require(fals.verdict == EigenVerdict::inapplicable, "falsification case returned " + to_string(fals.verdict));
  out.detail << pass << " pass, " << inapplicable << " inapplicable, " << violated
             << " violated; falsification case " << to_string(fals.verdict);
}

RunConfig small_config(const std::string& family, double s, std::uint64_t seed) {
  RunConfig c;
  c.model.family = family;
  c.model.strength = s;
  c.max_period = 10;
  c.seed = seed;
  c.name = family;
  return c;
}

void verdict_logic(Outcome& out, const SelftestOptions& opt) {
  const CertificationReport a = run_pipeline(small_config("perturbed_doubling", 1.5, opt.seed));
  const double sigma = a.checks.at("adapted_metric").constants.at("sigma");
  const double flat = a.checks.at("local_diffeo").constants.at("min_conorm");
  out.require(a.verdict.verdict == kVerdictExpanding, "s=1.5 verdict \"" + a.verdict.verdict + "\"");
  out.require(sigma > 1.0, "s=1.5 sigma = " + g(sigma));
  out.require(flat < 1.0, "s=1.5 flat min |g'| = " + g(flat));
  const CertificationReport b = run_pipeline(small_config("perturbed_doubling", 2.0, opt.seed));
  out.require(b.verdict.verdict == kVerdictHypothesisViolated, "s=2 verdict \"" + b.verdict.verdict + "\"");
  out.require(b.checks.at("nue").passed(), "s=2 NUE on periodic points did not pass");
  out.detail << "s=1.5: " << a.verdict.verdict << " (sigma " << g(sigma) << ", flat min |g'| " << g(flat)
             << "); s=2: " << b.verdict.verdict << " (NUE varsigma " << g(b.checks.at("nue").constants.at("varsigma"))
             << ")";
}

void determinism(Outcome& out, const SelftestOptions& opt) {
  std::size_t bytes = 0;
  for (const auto& cfg : {small_config("doubling", 0.0, opt.seed), small_config("perturbed_doubling", 1.5, opt.seed)}) {
    const std::string first = report_json(run_pipeline(cfg));
    const std::string second = report_json(run_pipeline(cfg));
    out.require(first == second, cfg.model.family + " reports differ");
    out.require(report_csv_summary(run_pipeline(cfg)) == report_csv_summary(run_pipeline(cfg)),
                cfg.model.family + " summaries differ");
    bytes += first.size();
  }
  out.detail << "two configs, " << bytes << " report bytes identical across runs";
}

struct Criterion {
  const char* name;
  Body body;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all{
      {"doubling_exactness", doubling_exactness}, {"cat_counting", cat_counting},
      {"lyapunov_spectrum", lyapunov},            {"pliss_property", pliss_suite},
      {"shadowing_bound", shadowing_bound},       {"domination_constants", domination},
      {"conjugacy", conjugacy},                   {"eigenvalue_bound", eigenvalue_suite},
      {"verdict_logic", verdict_logic},           {"determinism", determinism},
  };
  return all;
}

}  // namespace

int criterion_count() { return static_cast<int>(criteria().size()); }

std::string criterion_name(int id) {
  if (id < 1 || id > criterion_count()) throw PreconditionError("no criterion " + std::to_string(id));
  return criteria()[static_cast<std::size_t>(id - 1)].name;
}

std::vector<CriterionResult> run_acceptance(const SelftestOptions& options) {
  for (int id : options.only) (void)criterion_name(id);
  std::vector<CriterionResult> results;
  for (int id = 1; id <= criterion_count(); ++id) {
    if (!options.only.empty() && std::find(options.only.begin(), options.only.end(), id) == options.only.end()) {
      continue;
    }
    CriterionResult r;
    r.id = id;
    r.name = criterion_name(id);
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      criteria()[static_cast<std::size_t>(id - 1)].body(o, options);
      r.pass = o.pass;
      r.detail = o.text();
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = std::string("error: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    results.push_back(std::move(r));
  }
  return results;
}

std::string format_result(const CriterionResult& r) {
  char head[64];
  std::snprintf(head, sizeof head, "%s %2d %-21s", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str());
  return std::string(head) + " " + r.detail;
}

}  // namespace hypercert
