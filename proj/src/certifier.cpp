#include "hypercert/certifier.hpp"

#include "hypercert/cocycle.hpp"
#include "hypercert/periodic.hpp"
#include "hypercert/shadowing.hpp"
#include "hypercert/splitting.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <sstream>

namespace hypercert {

const char* const kToolVersion = "0.3.0";

using json = nlohmann::json;

namespace {

// |g'| at or below this counts as a critical point
constexpr double kCriticalFloor = 1e-9;
constexpr double kConjugacyDefectBound = 1e-8;
constexpr double kConeAgreement = 1e-6;

std::string fmt(double v, int digits = 6) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

// ---------------------------------------------------------------- config

class Section {
 public:
  Section(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw PreconditionError("config: " + where() + " must be an object");
  }

  [[nodiscard]] const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  void count(const std::string& key, std::size_t& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer() || v->get<long long>() <= 0) {
        throw PreconditionError("config: " + field(key) + " must be a positive integer");
      }
      out = v->get<std::size_t>();
    }
  }

  void number(const std::string& key, double& out, double lo, double hi, bool open_lo = false) {
    if (const json* v = find(key)) {
      if (!v->is_number()) throw PreconditionError("config: " + field(key) + " must be a number");
      const double x = v->get<double>();
      const bool low_ok = open_lo ? x > lo : x >= lo;
      if (!std::isfinite(x) || !low_ok || x > hi) {
        throw PreconditionError("config: " + field(key) + " = " + fmt(x) + " is out of range");
      }
      out = x;
    }
  }

  void text(const std::string& key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) throw PreconditionError("config: " + field(key) + " must be a string");
      out = v->get<std::string>();
    }
  }

  void flag(const std::string& key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) throw PreconditionError("config: " + field(key) + " must be true or false");
      out = v->get<bool>();
    }
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!seen_.count(it.key())) throw PreconditionError("config: unknown key " + field(it.key()));
    }
  }

  [[nodiscard]] std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  [[nodiscard]] std::string where() const { return path_.empty() ? "top level" : path_; }

  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

std::size_t line_of(const std::string& text, std::size_t byte) {
  const std::size_t end = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(end), '\n'));
}

json config_to_json(const RunConfig& c) {
  json model = {{"family", c.model.family}, {"strength", c.model.strength}, {"branch_radius", c.model.branch_radius}};
  if (c.model.family == "custom") {
    model["lift"] = c.model.lift;
    model["derivative"] = c.model.derivative;
    model["degree"] = c.model.degree;
  }
  json pliss = {{"sequence_length", c.pliss_length}, {"orbits", c.pliss_orbits}};
  if (c.varsigma_prime) {
    pliss["varsigma_prime"] = *c.varsigma_prime;
  } else {
    pliss["varsigma_prime"] = "sqrt";
  }
  return json{
      {"seed", c.seed},
      {"model", model},
      {"max_period", c.max_period},
      {"pliss", pliss},
      {"local_diffeo", {{"grid", c.local_diffeo_grid}}},
      {"adapted_metric", {{"horizon", c.metric_horizon}, {"grid", c.metric_grid}}},
      {"shadowing",
       {{"trials", c.shadowing_trials},
        {"alphas", c.shadowing_alphas},
        {"max_period", c.shadowing_max_period},
        {"ratio_bound", c.shadowing_ratio_bound}}},
      {"conjugacy",
       {{"enabled", c.conjugacy},
        {"resolution", c.conjugacy_resolution},
        {"holder_pairs", c.holder_pairs},
        {"eigen_max_period", c.eigen_max_period}}},
      {"splitting",
       {{"cone_width", c.cone_width},
        {"cone_steps", c.cone_steps},
        {"domination_l", c.domination_l},
        {"hyperbolic_horizon", c.hyperbolic_horizon},
        {"max_period", c.splitting_max_period}}},
      {"output", {{"report_dir", c.report_dir}, {"name", c.name}}},
  };
}

// ---------------------------------------------------------------- report numbers

json number_json(double v) {
  if (!std::isfinite(v)) return nullptr;
  return report_round(v);
}

json check_json(const CheckRecord& r) {
  auto table = [](const std::map<std::string, double>& m) {
    json out = json::object();
    for (const auto& [k, v] : m) out[k] = number_json(v);
    return out;
  };
  return json{{"status", to_string(r.status)},
              {"inputs", table(r.inputs)},
              {"constants", table(r.constants)},
              {"margins", table(r.margins)},
              {"notes", r.notes}};
}

// ---------------------------------------------------------------- pipeline helpers

struct Context {
  const RunConfig& config;
  MapModel model;
  PeriodicSet periodic;
  std::optional<NUECertificate> nue;
  std::optional<NUHCertificate> nuh;
  std::optional<SplittingField> field;
};

void guarded(std::map<std::string, CheckRecord>& checks, const std::string& name,
             const std::function<void(CheckRecord&)>& body) {
  CheckRecord& rec = checks[name];
  try {
    body(rec);
  } catch (const std::exception& e) {
    rec.status = CheckStatus::error;
    rec.notes.emplace_back(e.what());
  }
}

CheckStatus status_of(bool ok) { return ok ? CheckStatus::pass : CheckStatus::fail; }

// Golden-section refinement of min |g'| around a grid minimiser.
double refine_circle_conorm(const MapModel& model, double x, double h) {
  auto f = [&](double t) {
    Vec v(1);
    v(0) = t;
    return std::abs(model.jacobian_at(v)(0, 0));
  };
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = x - h, b = x + h;
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < 200 && b - a > 1e-15; ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = f(d);
    }
  }
  return std::min({f(x), fc, fd});
}

void check_local_diffeo(Context& ctx, CheckRecord& rec) {
  const auto& m = ctx.model;
  const std::size_t grid = ctx.config.local_diffeo_grid;
  const ConormScan scan = min_conorm_scan(m, grid);
  double value = scan.value;
  if (m.is_circle()) value = std::min(value, refine_circle_conorm(m, scan.argmin[0], 1.0 / static_cast<double>(grid)));
  rec.inputs["grid"] = static_cast<double>(grid);
  rec.constants["min_conorm"] = value;
  rec.constants["argmin_x"] = scan.argmin[0];
  if (!m.is_circle()) rec.constants["argmin_y"] = scan.argmin[1];
  rec.margins["min_conorm_over_floor"] = value / kCriticalFloor;
  const bool ok = value > kCriticalFloor && (m.is_circle() || m.invertible());
  rec.status = status_of(ok);
  if (!ok) {
    rec.notes.push_back("derivative degenerates near " +
                        (m.is_circle() ? "x = " + fmt(scan.argmin[0])
                                       : "(" + fmt(scan.argmin[0]) + ", " + fmt(scan.argmin[1]) + ")"));
  }
}

void check_periodic(Context& ctx, CheckRecord& rec) {
  ctx.periodic = find_periodic_points(ctx.model, ctx.config.max_period);
  std::size_t points = 0;
  for (const auto& o : ctx.periodic.orbits) points += o.period;
  rec.inputs["max_period"] = static_cast<double>(ctx.config.max_period);
  rec.constants["orbits"] = static_cast<double>(ctx.periodic.orbits.size());
  rec.constants["points"] = static_cast<double>(points);
  rec.constants["gaps"] = static_cast<double>(ctx.periodic.gaps.size());
  for (const auto& [n, c] : ctx.periodic.fixed_point_counts) {
    char key[32];
    std::snprintf(key, sizeof key, "fix_%02zu", n);
    rec.constants[key] = static_cast<double>(c);
  }
  for (const auto& g : ctx.periodic.gaps) {
    rec.notes.push_back("gap at period " + std::to_string(g.period) + " (" + g.seed + "): " + g.reason);
  }
  rec.status = status_of(ctx.periodic.complete() && !ctx.periodic.orbits.empty());
}

void add_margins(CheckRecord& rec, const std::string& prefix, const std::vector<OrbitMargin>& margins) {
  double worst = 0.0;
  for (const auto& m : margins) worst = std::max(worst, m.margin);
  rec.margins[prefix + "worst_rate"] = worst;
}

void check_nue(Context& ctx, CheckRecord& rec) {
  ctx.nue = nue_certificate(ctx.periodic.orbits);
  const auto& c = *ctx.nue;
  rec.inputs["max_period"] = static_cast<double>(c.max_period);
  rec.constants["varsigma"] = c.varsigma;
  rec.constants["eta"] = c.eta;
  add_margins(rec, "", c.margins);
  for (const auto& v : c.violators) rec.notes.push_back("violator " + v);
  rec.status = status_of(c.pass);
}

void check_nuh(Context& ctx, CheckRecord& rec) {
  ctx.nuh = nuh_certificate(ctx.periodic.orbits);
  const auto& c = *ctx.nuh;
  rec.inputs["max_period"] = static_cast<double>(c.max_period);
  rec.constants["varsigma"] = c.varsigma;
  rec.constants["eta"] = c.eta;
  add_margins(rec, "stable_", c.stable_margins);
  add_margins(rec, "unstable_", c.unstable_margins);
  for (const auto& v : c.violators) rec.notes.push_back("violator " + v);
  rec.status = status_of(c.pass);
}

std::optional<double> certified_varsigma(const Context& ctx) {
  if (ctx.nue && ctx.nue->pass) return ctx.nue->varsigma;
  if (ctx.nuh && ctx.nuh->pass) return ctx.nuh->varsigma;
  return std::nullopt;
}

void check_pliss(Context& ctx, CheckRecord& rec) {
  const auto varsigma = certified_varsigma(ctx);
  if (!varsigma) {
    rec.status = CheckStatus::skipped;
    rec.notes.emplace_back("no certified varsigma");
    return;
  }
  const double vp = ctx.config.varsigma_prime.value_or(std::sqrt(*varsigma));
  rec.inputs["varsigma"] = *varsigma;
  rec.inputs["varsigma_prime"] = vp;
  rec.inputs["sequence_length"] = static_cast<double>(ctx.config.pliss_length);
  const CocycleKind kind = ctx.model.is_circle() ? CocycleKind::inverse_norm : CocycleKind::unstable_inverse_norm;
  const auto& orbits = ctx.periodic.orbits;
  const std::size_t want = std::min(ctx.config.pliss_orbits, orbits.size());
  double worst = std::numeric_limits<double>::infinity();
  bool ok = want > 0;
  for (std::size_t i = 0; i < want; ++i) {
    // spread the spot checks across the period range
    const PeriodicOrbit& o = orbits[(i * orbits.size()) / want];
    const CocycleSequence one = orbit_sequence(o, kind);
    CocycleSequence seq = one;
    seq.values.clear();
    while (seq.values.size() < ctx.config.pliss_length) {
      seq.values.insert(seq.values.end(), one.values.begin(), one.values.end());
    }
    const PlissCount pc = pliss_density(seq, *varsigma, vp);
    const double ratio = pc.guaranteed == 0 ? std::numeric_limits<double>::infinity()
                                            : static_cast<double>(pc.actual) / static_cast<double>(pc.guaranteed);
    worst = std::min(worst, ratio);
    if (pc.actual < pc.guaranteed) {
      ok = false;
      rec.notes.push_back(orbit_label(o) + ": " + std::to_string(pc.actual) + " < " + std::to_string(pc.guaranteed));
    }
  }
  rec.constants["orbits_checked"] = static_cast<double>(want);
  rec.margins["min_actual_over_guaranteed"] = worst;
  rec.status = status_of(ok);
}

void check_shadowing(Context& ctx, CheckRecord& rec, std::string& csv) {
  ShadowingPlan plan;
  plan.seed = ctx.config.seed;
  plan.max_period = ctx.config.shadowing_max_period;
  plan.ratio_bound = ctx.config.shadowing_ratio_bound;
  const ShadowingTable t = shadowing_constants(ctx.model, ctx.config.shadowing_trials, ctx.config.shadowing_alphas, plan);
  rec.inputs["trials"] = static_cast<double>(ctx.config.shadowing_trials);
  rec.inputs["ratio_bound"] = plan.ratio_bound;
  double worst = 0.0;
  std::size_t failures = 0;
  for (const auto& row : t.rows) {
    worst = std::max(worst, row.max_ratio);
    failures += row.failures;
    if (row.alpha > 0.0) rec.constants["max_ratio_at_" + fmt(row.alpha, 3)] = row.max_ratio;
    for (const auto& e : row.errors) rec.notes.push_back(e);
  }
  rec.constants["failures"] = static_cast<double>(failures);
  rec.constants["monotone"] = t.monotone ? 1.0 : 0.0;
  rec.margins["worst_ratio_over_bound"] = worst / plan.ratio_bound;
  if (rec.notes.size() > 8) rec.notes.resize(8);
  std::ostringstream out;
  write_shadowing_csv(out, t);
  csv = out.str();
  rec.status = status_of(t.pass);
}

std::optional<MapModel> linear_partner(const MapModel& g) {
  if (!g.is_circle() || g.degree() < 2) return std::nullopt;
  if (g.degree() == 2) return MapModel::doubling();
  const std::string k = std::to_string(g.degree());
  return MapModel::custom_circle(k + "*x", k, g.degree());
}

void check_conjugacy(Context& ctx, CheckRecord& rec, std::string& table) {
  const auto f = linear_partner(ctx.model);
  if (!ctx.config.conjugacy || !f) {
    rec.status = CheckStatus::skipped;
    rec.notes.emplace_back(ctx.config.conjugacy ? "no linear model of the same degree" : "disabled in config");
    return;
  }
  ConjugacyModel h = build_conjugacy(ctx.model, *f, ctx.config.conjugacy_resolution);
  const double defect = conjugacy_defect(h, ctx.model, *f, ctx.config.conjugacy_resolution);
  h.defect_bound = defect;
  const HolderEstimate he = holder_estimate(h, ctx.config.holder_pairs, ctx.config.seed);
  rec.inputs["resolution"] = static_cast<double>(ctx.config.conjugacy_resolution);
  rec.inputs["holder_pairs"] = static_cast<double>(ctx.config.holder_pairs);
  rec.constants["defect"] = defect;
  rec.constants["monotone"] = h.monotone() ? 1.0 : 0.0;
  rec.constants["holder_K"] = he.K;
  rec.constants["holder_exponent"] = he.holder_exponent;
  rec.constants["holder_fit_residual"] = he.fit_residual;
  rec.margins["defect_over_bound"] = defect / kConjugacyDefectBound;
  std::ostringstream out;
  write_conjugacy_table(out, h);
  table = out.str();
  rec.status = status_of(defect < kConjugacyDefectBound && h.monotone());
}

void check_eigenvalues(Context& ctx, CheckRecord& rec) {
  const auto varsigma = certified_varsigma(ctx);
  if (!varsigma) {
    rec.status = CheckStatus::skipped;
    rec.notes.emplace_back("no certified varsigma");
    return;
  }
  if (!ctx.model.is_circle() && !ctx.model.invertible()) {
    rec.status = CheckStatus::skipped;
    rec.notes.emplace_back("no inverse branches");
    return;
  }
  std::size_t pass = 0, inapplicable = 0, violated = 0;
  // the return map contracts at rate varsigma^t along the orbit; 5% slack per step
  const double slack = 1.05;
  for (const auto& o : ctx.periodic.orbits) {
    if (o.period > ctx.config.eigen_max_period) continue;
    const double lambda = std::min(0.999, std::pow(slack * *varsigma, static_cast<double>(o.period)));
    EigenvaluePlan plan;
    plan.restrict_to_contracting = !ctx.model.is_circle();
    plan.seed = derive_seed(ctx.config.seed, o.period);
    const EigenvalueCheck c = eigenvalue_bound_check(ctx.model, o, lambda, 1.0, plan);
    switch (c.verdict) {
      case EigenVerdict::pass: ++pass; break;
      case EigenVerdict::inapplicable: ++inapplicable; break;
      case EigenVerdict::conclusion_violated:
        ++violated;
        rec.notes.push_back(orbit_label(o) + ": " + to_string(c.verdict));
        break;
    }
  }
  rec.inputs["max_period"] = static_cast<double>(ctx.config.eigen_max_period);
  rec.inputs["slack"] = slack;
  rec.constants["orbits_pass"] = static_cast<double>(pass);
  rec.constants["orbits_inapplicable"] = static_cast<double>(inapplicable);
  rec.constants["orbits_violated"] = static_cast<double>(violated);
  rec.status = status_of(violated == 0);
}

void check_adapted_metric(Context& ctx, CheckRecord& rec) {
  if (!ctx.nue || ctx.nue->varsigma >= 1.0) {
    rec.status = CheckStatus::skipped;
    rec.notes.emplace_back("needs varsigma < 1 from the NUE certificate");
    return;
  }
  const AdaptedMetric am = adapted_metric(ctx.model, *ctx.nue, ctx.config.metric_horizon, ctx.config.metric_grid);
  rec.inputs["horizon"] = static_cast<double>(am.horizon);
  rec.inputs["grid"] = static_cast<double>(am.grid);
  rec.constants["sigma0"] = am.sigma0;
  rec.constants["sigma"] = am.sigma;
  rec.constants["refined_sigma"] = am.refined_sigma;
  rec.constants["argmin_x"] = am.argmin;
  rec.margins["sigma_minus_one"] = std::min(am.sigma, am.refined_sigma) - 1.0;
  if (!am.failure.empty()) rec.notes.push_back(am.failure);
  rec.status = status_of(am.pass);
}

std::vector<PeriodicOrbit> splitting_orbits(const Context& ctx) {
  return ctx.periodic.with_period_at_most(ctx.config.splitting_max_period);
}

void check_cones(Context& ctx, CheckRecord& rec) {
  const SplittingField exact = periodic_splitting(splitting_orbits(ctx));
  ctx.field = exact;
  const EigenSplit axes = split_period_map(ctx.model.linear_part());
  if (!axes.ok) throw PreconditionError("cone axes: " + axes.reason);
  ConeSpec cone{axes.stable_dir, axes.unstable_dir, ctx.config.cone_width};
  std::vector<StatePoint> pts;
  for (const auto& s : exact.samples) pts.push_back(s.point);
  const SplittingField cones = cone_field_iterate(ctx.model, pts, {cone}, ctx.config.cone_steps);
  double worst = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    worst = std::max(worst, principal_angle(cones.samples[i].first, exact.samples[i].first));
    worst = std::max(worst, principal_angle(cones.samples[i].second, exact.samples[i].second));
  }
  rec.inputs["cone_width"] = ctx.config.cone_width;
  rec.inputs["steps"] = static_cast<double>(ctx.config.cone_steps);
  rec.inputs["samples"] = static_cast<double>(pts.size());
  rec.constants["convergence"] = cones.convergence;
  rec.constants["max_angle_to_periodic_splitting"] = worst;
  rec.constants["invariance_residual"] = exact.invariance_residual();
  rec.margins["angle_over_tolerance"] = worst / kConeAgreement;
  rec.status = status_of(worst < kConeAgreement);
}

void check_domination(Context& ctx, CheckRecord& rec) {
  if (!ctx.field) throw PreconditionError("no splitting field");
  const DominationCertificate d = domination_check(ctx.model, *ctx.field, ctx.config.domination_l);
  rec.inputs["l"] = static_cast<double>(d.l);
  rec.inputs["samples"] = static_cast<double>(d.samples);
  rec.constants["lambda"] = d.lambda;
  rec.margins["one_minus_lambda"] = 1.0 - d.lambda;
  rec.status = status_of(d.pass);
}

void check_continuity(Context& ctx, CheckRecord& rec) {
  if (!ctx.field) throw PreconditionError("no splitting field");
  const auto modulus = splitting_continuity_modulus(*ctx.field);
  const double rho = extension_radius(modulus, 0.1);
  for (const auto& b : modulus) rec.constants["max_angle_below_" + fmt(b.distance, 4)] = b.max_angle;
  rec.constants["extension_radius"] = rho;
  rec.inputs["angle_threshold"] = 0.1;
  rec.status = status_of(rho > 0.0);
}

void check_hyperbolic(Context& ctx, CheckRecord& rec, std::string& csv) {
  if (!ctx.field) throw PreconditionError("no splitting field");
  const HyperbolicCertificate h = hyperbolic_set_certificate(ctx.model, *ctx.field, ctx.config.hyperbolic_horizon);
  rec.inputs["horizon"] = static_cast<double>(h.n_check);
  rec.constants["c"] = h.c;
  rec.constants["lambda"] = h.lambda;
  double worst = 0.0;
  for (double m : h.margins) worst = std::max(worst, m);
  rec.margins["worst_margin"] = worst;
  std::ostringstream out;
  write_splitting_csv(out, *ctx.field);
  csv = out.str();
  rec.status = status_of(h.pass);
}

std::string justification_for(const CertificationReport& r) {
  const auto& v = r.verdict.verdict;
  auto c = [&](const std::string& check, const std::string& key) {
    const auto it = r.checks.find(check);
    if (it == r.checks.end()) return std::string("?");
    const auto k = it->second.constants.find(key);
    return k == it->second.constants.end() ? std::string("?") : fmt(k->second);
  };
  const std::string periods = "periodic orbits up to period " + std::to_string(r.config.max_period);
  if (v == kVerdictExpanding) {
    return "g is a local diffeomorphism (min conorm " + c("local_diffeo", "min_conorm") + "), " + periods +
           " expand at rate varsigma = " + c("nue", "varsigma") +
           ", nearly closed segments are shadowed by periodic orbits, so g is expanding; confirmed directly by an "
           "adapted metric with one-step factor " +
           c("adapted_metric", "sigma") + ".";
  }
  if (v == kVerdictHypothesisViolated) {
    return periods + " satisfy the NUE margin (varsigma = " + c("nue", "varsigma") +
           ") but g' vanishes near x = " + c("local_diffeo", "argmin_x") +
           ", so g is not a local diffeomorphism and the expansion conclusion does not hold.";
  }
  if (v == kVerdictHyperbolic) {
    return periods + " are uniformly hyperbolic (varsigma = " + c("nuh", "varsigma") +
           "), the splitting is dominated (lambda = " + c("domination", "lambda") +
           ") and shadowed, so the closure of the periodic points is a hyperbolic set; confirmed with c = " +
           c("hyperbolic_set", "c") + ", lambda = " + c("hyperbolic_set", "lambda") + ".";
  }
  std::string failed;
  for (const auto& name : r.verdict.basis) {
    const auto it = r.checks.find(name);
    if (it != r.checks.end() && !it->second.passed()) {
      failed += (failed.empty() ? "" : ", ") + name + " (" + to_string(it->second.status) + ")";
    }
  }
  return "no certificate: " + (failed.empty() ? std::string("required checks missing") : failed) + ".";
}

}  // namespace

// ---------------------------------------------------------------- public API

double report_round(double v) {
  if (!std::isfinite(v) || v == 0.0) return v;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return std::strtod(buf, nullptr);
}

MapModel ModelSpec::build() const {
  MapModel m = [&] {
    if (family == "custom") return MapModel::custom_circle(lift, derivative, degree);
    const Family f = family_from_string(family);
    switch (f) {
      case Family::doubling: return MapModel::doubling();
      case Family::perturbed_doubling: return MapModel::perturbed_doubling(strength);
      case Family::cat_map: return MapModel::cat_map();
      case Family::perturbed_cat: return MapModel::perturbed_cat(strength);
      case Family::custom_closed_form: break;
    }
    throw PreconditionError("model: custom closed forms need family \"custom\" with lift and derivative");
  }();
  return m.with_branch_radius(branch_radius);
}

RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw PreconditionError("config: parse error at line " + std::to_string(line_of(text, e.byte)) + ": " + e.what());
  }
  RunConfig c;
  Section top(doc, "");
  if (const json* s = top.find("seed")) {
    if (!s->is_number_unsigned()) throw PreconditionError("config: seed must be a non-negative integer");
    c.seed = s->get<std::uint64_t>();
  } else {
    throw PreconditionError("config: seed is required");
  }
  if (const json* m = top.find("model")) {
    Section ms(*m, "model");
    if (const json* fam = ms.find("family")) {
      if (!fam->is_string()) throw PreconditionError("config: model.family must be a string");
      c.model.family = fam->get<std::string>();
      if (c.model.family != "custom") {
        try {
          (void)family_from_string(c.model.family);
        } catch (const std::exception&) {
          throw PreconditionError("config: model.family \"" + c.model.family + "\" is not a known family");
        }
      }
    } else {
      throw PreconditionError("config: model.family is required");
    }
    ms.number("strength", c.model.strength, -10.0, 10.0);
    ms.text("lift", c.model.lift);
    ms.text("derivative", c.model.derivative);
    std::size_t degree = static_cast<std::size_t>(c.model.degree);
    ms.count("degree", degree);
    c.model.degree = static_cast<int>(degree);
    ms.number("branch_radius", c.model.branch_radius, 0.0, 0.5, true);
    ms.finish();
    if (c.model.family == "custom" && (c.model.lift.empty() || c.model.derivative.empty())) {
      throw PreconditionError("config: model.lift and model.derivative are required for custom models");
    }
  } else {
    throw PreconditionError("config: model is required");
  }
  if (const json* mp = top.find("max_period")) {
    if (!mp->is_number_integer() || mp->get<long long>() <= 0) {
      throw PreconditionError("config: max_period must be a positive integer");
    }
    c.max_period = mp->get<std::size_t>();
  }
  if (const json* p = top.find("pliss")) {
    Section ps(*p, "pliss");
    if (const json* vp = ps.find("varsigma_prime")) {
      if (vp->is_string() && vp->get<std::string>() == "sqrt") {
        c.varsigma_prime.reset();
      } else if (vp->is_number() && vp->get<double>() > 0.0 && vp->get<double>() < 1.0) {
        c.varsigma_prime = vp->get<double>();
      } else {
        throw PreconditionError("config: pliss.varsigma_prime must be \"sqrt\" or a number in (0, 1)");
      }
    }
    ps.count("sequence_length", c.pliss_length);
    ps.count("orbits", c.pliss_orbits);
    ps.finish();
  }
  if (const json* l = top.find("local_diffeo")) {
    Section ls(*l, "local_diffeo");
    ls.count("grid", c.local_diffeo_grid);
    ls.finish();
  }
  if (const json* a = top.find("adapted_metric")) {
    Section as(*a, "adapted_metric");
    as.count("horizon", c.metric_horizon);
    as.count("grid", c.metric_grid);
    as.finish();
  }
  if (const json* s = top.find("shadowing")) {
    Section ss(*s, "shadowing");
    ss.count("trials", c.shadowing_trials);
    if (const json* al = ss.find("alphas")) {
      if (!al->is_array() || al->empty()) throw PreconditionError("config: shadowing.alphas must be a non-empty array");
      c.shadowing_alphas.clear();
      for (const auto& v : *al) {
        if (!v.is_number() || v.get<double>() < 0.0 || v.get<double>() > 0.1) {
          throw PreconditionError("config: shadowing.alphas entries must be numbers in [0, 0.1]");
        }
        c.shadowing_alphas.push_back(v.get<double>());
      }
    }
    ss.count("max_period", c.shadowing_max_period);
    ss.number("ratio_bound", c.shadowing_ratio_bound, 0.0, 1e12, true);
    ss.finish();
  }
  if (const json* s = top.find("conjugacy")) {
    Section cs(*s, "conjugacy");
    cs.flag("enabled", c.conjugacy);
    cs.count("resolution", c.conjugacy_resolution);
    cs.count("holder_pairs", c.holder_pairs);
    cs.count("eigen_max_period", c.eigen_max_period);
    cs.finish();
  }
  if (const json* s = top.find("splitting")) {
    Section ss(*s, "splitting");
    ss.number("cone_width", c.cone_width, 0.0, 1.0, true);
    if (c.cone_width >= 1.0) throw PreconditionError("config: splitting.cone_width must be below 1");
    ss.count("cone_steps", c.cone_steps);
    ss.count("domination_l", c.domination_l);
    ss.count("hyperbolic_horizon", c.hyperbolic_horizon);
    ss.count("max_period", c.splitting_max_period);
    ss.finish();
  }
  if (const json* s = top.find("output")) {
    Section os(*s, "output");
    os.text("report_dir", c.report_dir);
    os.text("name", c.name);
    os.finish();
    if (c.name.empty() || c.name.find('/') != std::string::npos) {
      throw PreconditionError("config: output.name must be a plain file stem");
    }
  }
  top.finish();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("config: cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string config_echo(const RunConfig& config) { return config_to_json(config).dump(2); }

std::string to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "fail";
    case CheckStatus::skipped: return "skipped";
    case CheckStatus::error: return "error";
  }
  return "error";
}

Verdict derive_verdict(const std::map<std::string, CheckRecord>& checks, int dim) {
  Verdict v;
  auto present = [&](const std::string& n) { return checks.count(n) > 0; };
  auto ok = [&](const std::string& n) { return present(n) && checks.at(n).passed(); };
  auto cite = [&](std::initializer_list<const char*> names) {
    for (const char* n : names) {
      if (present(n)) v.basis.emplace_back(n);
    }
  };
  if (dim == 1) {
    v.hypotheses_verified = ok("local_diffeo") && ok("nue") && ok("shadowing");
    v.conclusion_verified = ok("adapted_metric");
    if (v.hypotheses_verified && v.conclusion_verified) {
      v.verdict = kVerdictExpanding;
      cite({"local_diffeo", "nue", "shadowing", "adapted_metric"});
    } else if (ok("nue") && present("local_diffeo") && checks.at("local_diffeo").status == CheckStatus::fail) {
      v.verdict = kVerdictHypothesisViolated;
      cite({"local_diffeo", "nue"});
    } else {
      v.verdict = kVerdictNotCertified;
      cite({"local_diffeo", "nue", "shadowing", "adapted_metric"});
    }
    return v;
  }
  v.hypotheses_verified =
      ok("diffeo") && ok("nuh") && (ok("domination") || ok("continuity")) && ok("shadowing");
  v.conclusion_verified = ok("hyperbolic_set");
  v.verdict = v.hypotheses_verified && v.conclusion_verified ? kVerdictHyperbolic : kVerdictNotCertified;
  cite({"diffeo", "nuh", "domination", "continuity", "shadowing", "hyperbolic_set"});
  return v;
}

CertificationReport run_pipeline(const RunConfig& config) {
  CertificationReport r;
  r.tool_version = kToolVersion;
  r.config = config;
  const MapModel model = config.model.build();
  r.model_id = model.id();
  r.dim = model.dim();
  Context ctx{config, model, {}, {}, {}, {}};
  auto& checks = r.checks;
  const bool circle = model.is_circle();

  guarded(checks, circle ? "local_diffeo" : "diffeo", [&](CheckRecord& rec) { check_local_diffeo(ctx, rec); });
  guarded(checks, "periodic_points", [&](CheckRecord& rec) {
    check_periodic(ctx, rec);
    std::ostringstream out;
    write_orbits_csv(out, ctx.periodic.orbits);
    r.orbits_csv = out.str();
  });
  if (circle) {
    guarded(checks, "nue", [&](CheckRecord& rec) { check_nue(ctx, rec); });
  } else {
    guarded(checks, "nuh", [&](CheckRecord& rec) { check_nuh(ctx, rec); });
  }
  guarded(checks, "pliss", [&](CheckRecord& rec) { check_pliss(ctx, rec); });
  guarded(checks, "shadowing", [&](CheckRecord& rec) { check_shadowing(ctx, rec, r.shadowing_csv); });
  if (circle) {
    guarded(checks, "conjugacy", [&](CheckRecord& rec) { check_conjugacy(ctx, rec, r.conjugacy_table); });
  }
  guarded(checks, "eigenvalue_bound", [&](CheckRecord& rec) { check_eigenvalues(ctx, rec); });
  if (circle) {
    guarded(checks, "adapted_metric", [&](CheckRecord& rec) { check_adapted_metric(ctx, rec); });
  } else {
    guarded(checks, "splitting_cones", [&](CheckRecord& rec) { check_cones(ctx, rec); });
    guarded(checks, "domination", [&](CheckRecord& rec) { check_domination(ctx, rec); });
    guarded(checks, "continuity", [&](CheckRecord& rec) { check_continuity(ctx, rec); });
    guarded(checks, "hyperbolic_set", [&](CheckRecord& rec) { check_hyperbolic(ctx, rec, r.splitting_csv); });
  }

  r.verdict = derive_verdict(checks, r.dim);
  r.justification = justification_for(r);
  return r;
}

std::string report_json(const CertificationReport& report) {
  json checks = json::object();
  for (const auto& [name, rec] : report.checks) checks[name] = check_json(rec);
  json doc{
      {"tool", {{"name", "hypercert"}, {"version", report.tool_version}}},
      {"config", config_to_json(report.config)},
      {"model", {{"id", report.model_id}, {"dim", report.dim}}},
      {"checks", checks},
      {"verdict",
       {{"verdict", report.verdict.verdict},
        {"basis", report.verdict.basis},
        {"hypotheses_verified", report.verdict.hypotheses_verified},
        {"conclusion_verified", report.verdict.conclusion_verified},
        {"justification", report.justification}}},
  };
  // round config numbers too so the whole document obeys one precision
  std::function<void(json&)> round_all = [&](json& j) {
    if (j.is_number_float()) {
      j = number_json(j.get<double>());
    } else if (j.is_structured()) {
      for (auto& x : j) round_all(x);
    }
  };
  round_all(doc["config"]);
  return doc.dump(2) + "\n";
}

std::string report_csv_summary(const CertificationReport& report) {
  std::ostringstream out;
  out << "check,status,metric,value\n";
  for (const auto& [name, rec] : report.checks) {
    static const std::map<std::string, std::string> headline{
        {"local_diffeo", "min_conorm"},   {"diffeo", "min_conorm"},
        {"periodic_points", "orbits"},    {"nue", "varsigma"},
        {"nuh", "varsigma"},              {"pliss", "min_actual_over_guaranteed"},
        {"shadowing", "worst_ratio_over_bound"}, {"conjugacy", "defect"},
        {"eigenvalue_bound", "orbits_violated"}, {"adapted_metric", "sigma"},
        {"splitting_cones", "max_angle_to_periodic_splitting"}, {"domination", "lambda"},
        {"continuity", "extension_radius"}, {"hyperbolic_set", "lambda"}};
    std::string metric;
    double value = std::numeric_limits<double>::quiet_NaN();
    const auto h = headline.find(name);
    if (h != headline.end() && rec.constants.count(h->second)) {
      metric = h->second;
      value = rec.constants.at(metric);
    } else if (h != headline.end() && rec.margins.count(h->second)) {
      metric = h->second;
      value = rec.margins.at(metric);
    } else if (!rec.margins.empty()) {
      metric = rec.margins.begin()->first;
      value = rec.margins.begin()->second;
    } else if (!rec.constants.empty()) {
      metric = rec.constants.begin()->first;
      value = rec.constants.begin()->second;
    }
    out << name << ',' << to_string(rec.status) << ',' << metric << ',';
    if (std::isfinite(value)) out << fmt(value, 12);
    out << '\n';
  }
  return out.str();
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

std::string emit_report(const CertificationReport& report, ReportFormat format, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const auto base = std::filesystem::path(dir) / report.config.name;
  if (format == ReportFormat::json) {
    const auto p = base.string() + ".report.json";
    write_file(p, report_json(report));
    return p;
  }
  const auto p = base.string() + ".summary.csv";
  write_file(p, report_csv_summary(report));
  return p;
}

std::vector<std::string> emit_all(const CertificationReport& report, const std::string& dir) {
  std::vector<std::string> paths{emit_report(report, ReportFormat::json, dir),
                                 emit_report(report, ReportFormat::csv_summary, dir)};
  const auto base = (std::filesystem::path(dir) / report.config.name).string();
  auto side = [&](const std::string& suffix, const std::string& content) {
    if (content.empty()) return;
    write_file(base + suffix, content);
    paths.push_back(base + suffix);
  };
  side(".orbits.csv", report.orbits_csv);
  side(".shadowing.csv", report.shadowing_csv);
  side(".conjugacy.csv", report.conjugacy_table);
  side(".splitting.csv", report.splitting_csv);
  return paths;
}

// ---------------------------------------------------------------- lift plot

std::string lift_plot_svg(const MapModel& model) {
  if (!model.is_circle()) throw PreconditionError("lift plot: unsupported for torus models");
  constexpr int kSamples = 1024;
  constexpr double W = 520.0, H = 520.0, pad = 50.0;
  std::vector<double> xs(kSamples + 1), ys(kSamples + 1);
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i <= kSamples; ++i) {
    xs[i] = static_cast<double>(i) / kSamples;
    Vec v(1);
    v(0) = xs[i];
    ys[i] = model.lift(v)(0);
    lo = std::min(lo, ys[i]);
    hi = std::max(hi, ys[i]);
  }
  lo = std::floor(lo);
  hi = std::ceil(hi);
  const double plot_w = W - 2 * pad, plot_h = H - 2 * pad;
  auto px = [&](double x) { return pad + x * plot_w; };
  auto py = [&](double y) { return H - pad - (y - lo) / (hi - lo) * plot_h; };
  auto f3 = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return std::string(buf);
  };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
    << ' ' << H << "\">\n";
  s << "<title>lift of " << model.id() << " on [0,1]</title>\n";
  s << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  s << "<rect x=\"" << pad << "\" y=\"" << pad << "\" width=\"" << plot_w << "\" height=\"" << plot_h
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double k = lo; k <= hi; k += 1.0) {
    s << "<line class=\"level\" x1=\"" << f3(px(0)) << "\" y1=\"" << f3(py(k)) << "\" x2=\"" << f3(px(1))
      << "\" y2=\"" << f3(py(k)) << "\" stroke=\"#bbbbbb\" stroke-dasharray=\"2,3\"/>\n";
    s << "<text x=\"" << f3(pad - 8) << "\" y=\"" << f3(py(k) + 4) << "\" font-size=\"11\" text-anchor=\"end\">"
      << static_cast<int>(k) << "</text>\n";
  }
  for (double c : circle_branch_cuts(model)) {
    s << "<line class=\"cut\" x1=\"" << f3(px(c)) << "\" y1=\"" << f3(py(lo)) << "\" x2=\"" << f3(px(c))
      << "\" y2=\"" << f3(py(hi)) << "\" stroke=\"#d08000\" stroke-dasharray=\"5,4\"/>\n";
  }
  s << "<line class=\"diagonal\" x1=\"" << f3(px(0)) << "\" y1=\"" << f3(py(0)) << "\" x2=\"" << f3(px(1))
    << "\" y2=\"" << f3(py(1)) << "\" stroke=\"#888888\"/>\n";
  s << "<polyline class=\"lift\" fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"1.5\" points=\"";
  for (int i = 0; i <= kSamples; ++i) s << (i ? " " : "") << f3(px(xs[i])) << ',' << f3(py(ys[i]));
  s << "\"/>\n";

  const char* colours[] = {"#c0392b", "#27ae60", "#8e44ad", "#16a085", "#d35400", "#2c3e50"};
  const PeriodicSet set = find_periodic_points(model, 6);
  for (const auto& o : set.orbits) {
    for (const auto& p : o.points) {
      Vec v(1);
      v(0) = p[0];
      const double y = model.lift(v)(0);
      s << "<circle class=\"periodic\" data-period=\"" << o.period << "\" cx=\"" << f3(px(p[0])) << "\" cy=\""
        << f3(py(y)) << "\" r=\"2.5\" fill=\"" << colours[(o.period - 1) % 6] << "\"/>\n";
    }
  }
  for (std::size_t t = 1; t <= 6; ++t) {
    const double ly = pad + 14.0 * static_cast<double>(t);
    s << "<circle cx=\"" << f3(px(0) + 12) << "\" cy=\"" << f3(ly) << "\" r=\"3\" fill=\"" << colours[t - 1]
      << "\"/><text x=\"" << f3(px(0) + 20) << "\" y=\"" << f3(ly + 4) << "\" font-size=\"11\">period " << t
      << "</text>\n";
  }
  s << "<text x=\"" << f3(W / 2) << "\" y=\"" << f3(H - 15) << "\" font-size=\"12\" text-anchor=\"middle\">x</text>\n";
  s << "<text x=\"" << f3(W / 2) << "\" y=\"" << f3(pad - 15)
    << "\" font-size=\"13\" text-anchor=\"middle\">lift of " << model.id() << "</text>\n";
  s << "</svg>\n";
  return s.str();
}

void emit_lift_plot(const MapModel& model, const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  write_file(path, lift_plot_svg(model));
}

}  // namespace hypercert
