#include "hypercert/cocycle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace hypercert {

namespace {

// Neumaier summation; long orbit averages are otherwise off in the last bits.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) comp_ += (sum_ - t) + v;
    else comp_ += (v - t) + sum_;
    sum_ = t;
  }
  [[nodiscard]] double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// t-th root of a positive product, polished so that exact powers come out exact.
double period_root(double product, std::size_t t) {
  if (t == 1) return product;
  const double td = static_cast<double>(t);
  double r = std::pow(product, 1.0 / td);
  for (int i = 0; i < 2; ++i) {
    const double f = std::pow(r, td) - product;
    const double df = td * std::pow(r, td - 1.0);
    if (df == 0.0 || f == 0.0) break;
    r -= f / df;
  }
  return r;
}

double checked_log(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw NumericalError(std::string("log_conorm_sequence: singular Jacobian (") + what + ")");
  }
  return std::log(v);
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string to_string(CocycleKind k) {
  switch (k) {
    case CocycleKind::inverse_norm: return "inverse_norm";
    case CocycleKind::stable_norm: return "stable_norm";
    case CocycleKind::unstable_inverse_norm: return "unstable_inverse_norm";
  }
  return "inverse_norm";
}

CocycleKind cocycle_kind_from_string(const std::string& name) {
  if (name == "inverse_norm") return CocycleKind::inverse_norm;
  if (name == "stable_norm") return CocycleKind::stable_norm;
  if (name == "unstable_inverse_norm") return CocycleKind::unstable_inverse_norm;
  throw PreconditionError("unknown cocycle kind '" + name + "'");
}

double CocycleSequence::mean() const {
  if (values.empty()) return 0.0;
  CompensatedSum s;
  for (double v : values) s.add(v);
  return s.value() / static_cast<double>(values.size());
}

CocycleSequence log_conorm_sequence(const MapModel& model, const OrbitSegment& segment, CocycleKind kind,
                                    const std::vector<Vec>& directions) {
  const std::size_t n = segment.length();
  if (n < 1) throw PreconditionError("log_conorm_sequence: segment must have length >= 1");
  CocycleSequence seq;
  seq.kind = kind;
  seq.source = segment.model_id;
  seq.values.reserve(n);
  if (kind == CocycleKind::inverse_norm) {
    for (std::size_t j = 0; j < n; ++j) {
      seq.values.push_back(-checked_log(conorm(jacobian(model, segment.points[j])), "zero conorm"));
    }
    return seq;
  }
  if (model.dim() == 1) {
    if (kind == CocycleKind::stable_norm) {
      throw PreconditionError("log_conorm_sequence: a circle map has no stable direction");
    }
    for (std::size_t j = 0; j < n; ++j) {
      seq.values.push_back(-checked_log(std::abs(jacobian(model, segment.points[j])(0, 0)), "zero derivative"));
    }
    return seq;
  }
  if (directions.empty()) {
    throw PreconditionError("log_conorm_sequence: restricted kinds need a splitting direction");
  }
  const bool per_point = directions.size() >= n;
  Vec e = directions.front().normalized();
  for (std::size_t j = 0; j < n; ++j) {
    if (per_point) e = directions[j].normalized();
    Vec w = jacobian(model, segment.points[j]) * e;
    if (per_point && directions.size() > j + 1) {
      const Vec next = directions[j + 1].normalized();
      w = next * next.dot(w);
    }
    const double len = checked_log(w.norm(), "restricted derivative vanishes");
    seq.values.push_back(kind == CocycleKind::stable_norm ? len : -len);
    e = w.normalized();
  }
  return seq;
}

CocycleSequence orbit_sequence(const PeriodicOrbit& orbit, CocycleKind kind) {
  CocycleSequence seq;
  seq.kind = kind;
  seq.source = orbit.model_id + " " + orbit_label(orbit);
  if (kind == CocycleKind::inverse_norm || orbit.dim() == 1) {
    if (kind == CocycleKind::stable_norm) {
      throw PreconditionError("orbit_sequence: a circle orbit has no stable direction");
    }
    for (const auto& j : orbit.cocycle) seq.values.push_back(-checked_log(conorm(j), "zero conorm"));
    return seq;
  }
  const EigenSplit split = split_period_map(orbit.period_map);
  if (!split.ok) throw PreconditionError("orbit_sequence: " + split.reason);
  Vec e = kind == CocycleKind::stable_norm ? split.stable_dir : split.unstable_dir;
  for (const auto& j : orbit.cocycle) {
    const Vec w = j * e;
    const double len = checked_log(w.norm(), "restricted derivative vanishes");
    seq.values.push_back(kind == CocycleKind::stable_norm ? len : -len);
    e = w / w.norm();
  }
  return seq;
}

NUECertificate nue_certificate(const std::vector<PeriodicOrbit>& orbits) {
  if (orbits.empty()) throw PreconditionError("nue_certificate: orbit list is empty");
  NUECertificate cert;
  double worst = 0.0;
  for (const auto& o : orbits) {
    const Multipliers m = orbit_multipliers(o);
    const double margin = period_root(m.prod_inv_norm, o.period);
    cert.margins.push_back({orbit_label(o), o.period, margin});
    cert.max_period = std::max(cert.max_period, o.period);
    worst = std::max(worst, margin);
  }
  cert.varsigma = worst;
  cert.eta = std::log(worst);
  cert.pass = worst < 1.0;
  if (!cert.pass) {
    for (const auto& m : cert.margins) {
      if (m.margin >= 1.0) cert.violators.push_back(m.orbit);
    }
  }
  return cert;
}

NUHCertificate nuh_certificate(const std::vector<PeriodicOrbit>& orbits) {
  if (orbits.empty()) throw PreconditionError("nuh_certificate: orbit list is empty");
  NUHCertificate cert;
  double worst = 0.0;
  for (const auto& o : orbits) {
    cert.max_period = std::max(cert.max_period, o.period);
    cert.splittings.push_back(split_period_map(o.period_map));
    const Multipliers m = orbit_multipliers(o);
    if (!m.splitting_issue.empty()) {
      cert.violators.push_back(orbit_label(o) + ": " + m.splitting_issue);
      continue;
    }
    if (m.prod_stable_norm) {
      const double s = period_root(*m.prod_stable_norm, o.period);
      cert.stable_margins.push_back({orbit_label(o), o.period, s});
      worst = std::max(worst, s);
    }
    if (m.prod_unstable_conorm) {
      const double u = period_root(1.0 / *m.prod_unstable_conorm, o.period);
      cert.unstable_margins.push_back({orbit_label(o), o.period, u});
      worst = std::max(worst, u);
    }
  }
  cert.varsigma = worst;
  cert.eta = worst > 0.0 ? std::log(worst) : -std::numeric_limits<double>::infinity();
  for (const auto* list : {&cert.stable_margins, &cert.unstable_margins}) {
    for (const auto& m : *list) {
      if (m.margin >= 1.0) cert.violators.push_back(m.orbit + ": margin " + num(m.margin) + " >= 1");
    }
  }
  cert.pass = cert.violators.empty() && worst < 1.0;
  return cert;
}

std::vector<std::size_t> hyperbolic_times(const CocycleSequence& seq, double varsigma) {
  if (!(varsigma > 0.0 && varsigma < 1.0)) throw PreconditionError("hyperbolic_times: need 0 < varsigma < 1");
  // With S_k = sum_{j<k} (a_j - log varsigma), k qualifies iff S_k <= S_m for all m < k.
  const double level = std::log(varsigma);
  std::vector<std::size_t> out;
  long double prefix = 0.0L;
  long double running_min = 0.0L;
  for (std::size_t k = 1; k <= seq.values.size(); ++k) {
    prefix += static_cast<long double>(seq.values[k - 1]) - static_cast<long double>(level);
    if (prefix <= running_min) out.push_back(k);
    running_min = std::min(running_min, prefix);
  }
  return out;
}

PlissCount pliss_density(const CocycleSequence& seq, double varsigma, double varsigma_prime) {
  if (seq.values.empty()) throw PreconditionError("pliss_density: empty sequence");
  if (!(varsigma > 0.0 && varsigma < varsigma_prime && varsigma_prime < 1.0)) {
    throw PreconditionError("pliss_density: need 0 < varsigma < varsigma' < 1");
  }
  PlissCount c;
  c.mean = seq.mean();
  c.floor = *std::min_element(seq.values.begin(), seq.values.end());
  const double ls = std::log(varsigma), lsp = std::log(varsigma_prime);
  if (c.mean > ls) {
    throw PreconditionError("pliss_density: sequence mean " + num(c.mean) + " exceeds log(varsigma) " + num(ls));
  }
  const double n = static_cast<double>(seq.values.size());
  const double density = (lsp - ls) / (lsp - c.floor);
  // Shave rounding noise so an exact integer bound does not round up.
  const double bound = std::ceil(n * density - 1e-9);
  c.guaranteed = static_cast<std::size_t>(std::clamp(bound, 0.0, n));
  c.actual = hyperbolic_times(seq, varsigma_prime).size();
  return c;
}

PlissCount pliss_density(const CocycleSequence& seq, double varsigma) {
  return pliss_density(seq, varsigma, std::sqrt(varsigma));
}

std::vector<double> lyapunov_spectrum(const MapModel& model, const StatePoint& x, std::size_t n) {
  if (n < 1) throw PreconditionError("lyapunov_spectrum: n must be >= 1");
  const int d = model.dim();
  std::vector<CompensatedSum> sums(static_cast<std::size_t>(d));
  StatePoint p = x;
  Mat q = Mat::Identity(d, d);
  for (std::size_t i = 0; i < n; ++i) {
    const Mat j = jacobian(model, p);
    if (d == 1) {
      sums[0].add(std::log(std::abs(j(0, 0))));
    } else {
      const Mat m = j * q;
      Eigen::HouseholderQR<Mat> qr(m);
      const Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
      q = qr.householderQ();
      for (int k = 0; k < d; ++k) sums[static_cast<std::size_t>(k)].add(std::log(std::abs(r(k, k))));
    }
    p = eval_map(model, p);
  }
  std::vector<double> out;
  for (const auto& s : sums) out.push_back(s.value() / static_cast<double>(n));
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

double AdaptedMetric::weight(double x) const {
  double rho = 0.0, deriv = 1.0, scale = 1.0;
  StatePoint p(x);
  for (std::size_t j = 0; j < horizon; ++j) {
    rho += scale * deriv;
    deriv *= std::abs(jacobian(model, p)(0, 0));
    p = eval_map(model, p);
    scale /= sigma0;
  }
  return rho;
}

double AdaptedMetric::factor_at(double x) const {
  const StatePoint p(x);
  const double rho = weight(x);
  return weight(eval_map(model, p)[0]) * std::abs(jacobian(model, p)(0, 0)) / rho;
}

AdaptedMetric adapted_metric(const MapModel& model, const NUECertificate& cert, std::size_t horizon,
                             std::size_t grid) {
  if (!model.is_circle()) throw PreconditionError("adapted_metric: circle model required");
  if (!cert.pass) throw PreconditionError("adapted_metric: the NUE certificate did not pass");
  if (horizon < 1 || grid < 2) throw PreconditionError("adapted_metric: horizon >= 1 and grid >= 2 required");
  AdaptedMetric m;
  m.model = model;
  m.horizon = horizon;
  m.grid = grid;
  m.sigma0 = 1.0 / std::sqrt(cert.varsigma);
  auto scan = [&](std::size_t g, double& where) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < g; ++i) {
      const double x = static_cast<double>(i) / static_cast<double>(g);
      const double f = m.factor_at(x);
      if (f < best) {
        best = f;
        where = x;
      }
    }
    return best;
  };
  m.sigma = scan(grid, m.argmin);
  double fine_where = 0.0;
  m.refined_sigma = scan(2 * grid, fine_where);
  m.pass = m.sigma > 1.0 && m.refined_sigma > 1.0;
  if (!m.pass) {
    const double worst = std::min(m.sigma, m.refined_sigma);
    const double at = m.sigma <= m.refined_sigma ? m.argmin : fine_where;
    m.failure = "one-step factor " + num(worst) + " <= 1 at x=" + num(at) + " with horizon N=" +
                std::to_string(horizon) + "; increase N";
  }
  return m;
}

ShadowedTimeCheck verify_shadowed_hyperbolic_time(const MapModel& model, const OrbitSegment& p_orbit,
                                                  const OrbitSegment& x_orbit, std::size_t n_prime,
                                                  double varsigma_prime, double max_distance) {
  if (p_orbit.points.size() != x_orbit.points.size()) {
    throw PreconditionError("verify_shadowed_hyperbolic_time: segments of different length");
  }
  if (n_prime < 1 || n_prime > p_orbit.length()) {
    throw PreconditionError("verify_shadowed_hyperbolic_time: n' outside the segment");
  }
  ShadowedTimeCheck out;
  for (std::size_t j = 0; j < p_orbit.points.size(); ++j) {
    out.max_distance = std::max(out.max_distance, flat_distance(p_orbit.points[j], x_orbit.points[j]));
  }
  if (out.max_distance > max_distance) {
    throw PreconditionError("verify_shadowed_hyperbolic_time: segments are " + num(out.max_distance) +
                            " apart, more than the allowed " + num(max_distance));
  }
  const auto p_seq = log_conorm_sequence(model, p_orbit, CocycleKind::inverse_norm);
  const double lp = std::log(varsigma_prime);
  long double acc = 0.0L;
  for (std::size_t i = 1; i <= n_prime; ++i) {
    acc += p_seq.values[n_prime - i];
    if (acc > static_cast<long double>(i) * lp) {
      throw PreconditionError("verify_shadowed_hyperbolic_time: n' is not a hyperbolic time of the p-segment");
    }
  }
  const auto x_seq = log_conorm_sequence(model, x_orbit, CocycleKind::inverse_norm);
  const double lx = 0.5 * lp;
  acc = 0.0L;
  for (std::size_t i = 1; i <= n_prime; ++i) {
    acc += x_seq.values[n_prime - i];
    if (acc > static_cast<long double>(i) * lx) {
      out.failing_prefix = i;
      return out;
    }
  }
  out.pass = true;
  return out;
}

void write_cocycle_csv(std::ostream& out, const CocycleSequence& seq) {
  out << "# kind: " << to_string(seq.kind) << '\n';
  out << "# source: " << seq.source << '\n';
  out << "index,value\n";
  for (std::size_t i = 0; i < seq.values.size(); ++i) out << i << ',' << num(seq.values[i]) << '\n';
}

CocycleSequence read_cocycle_csv(std::istream& in) {
  CocycleSequence seq;
  std::string line;
  bool header = false;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.rfind("# kind:", 0) == 0) {
      auto v = line.substr(7);
      v.erase(0, v.find_first_not_of(' '));
      seq.kind = cocycle_kind_from_string(v);
      continue;
    }
    if (line.rfind("# source:", 0) == 0) {
      seq.source = line.substr(std::min(line.size(), std::size_t{10}));
      continue;
    }
    if (line[0] == '#') continue;
    if (!header) {
      if (line != "index,value") throw PreconditionError("read_cocycle_csv: expected header 'index,value'");
      header = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw PreconditionError("read_cocycle_csv: line " + std::to_string(lineno) + ": expected index,value");
    }
    double v = 0.0;
    try {
      std::size_t used = 0;
      const std::string field = line.substr(comma + 1);
      v = std::stod(field, &used);
      if (used != field.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw PreconditionError("read_cocycle_csv: line " + std::to_string(lineno) + ": bad value");
    }
    if (!std::isfinite(v)) throw PreconditionError("read_cocycle_csv: line " + std::to_string(lineno) + ": non-finite");
    seq.values.push_back(v);
  }
  if (seq.values.empty()) throw PreconditionError("read_cocycle_csv: no values");
  return seq;
}

}  // namespace hypercert
