#include "hypercert/certifier.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace hypercert;
using nlohmann::json;

namespace {

std::string error_of(const std::string& text) {
  try {
    (void)parse_config(text);
  } catch (const PreconditionError& e) {
    return e.what();
  }
  return "";
}

RunConfig quick(const std::string& family, double s = 0.0) {
  RunConfig c;
  c.model.family = family;
  c.model.strength = s;
  c.max_period = 6;
  c.shadowing_trials = 20;
  c.holder_pairs = 200;
  c.conjugacy_resolution = 1u << 12;
  c.metric_grid = 1u << 12;
  c.splitting_max_period = 4;
  c.seed = 99;
  c.name = "quick_" + family;
  return c;
}

CheckRecord rec(CheckStatus s) {
  CheckRecord r;
  r.status = s;
  return r;
}

}  // namespace

TEST_CASE("minimal config gets defaults") {
  const RunConfig c = parse_config(R"({"seed": 3, "model": {"family": "doubling"}})");
  CHECK(c.seed == 3);
  CHECK(c.model.family == "doubling");
  CHECK(c.max_period == 8);
  CHECK(c.shadowing_trials == 100);
  CHECK_FALSE(c.varsigma_prime.has_value());
}

TEST_CASE("seed is mandatory") {
  CHECK(error_of(R"({"model": {"family": "doubling"}})").find("seed") != std::string::npos);
  CHECK(error_of(R"({"seed": -1, "model": {"family": "doubling"}})").find("seed") != std::string::npos);
}

TEST_CASE("schema errors name the field") {
  CHECK(error_of(R"({"seed": 1, "model": {"family": "doubling"}, "max_period": 0})").find("max_period") !=
        std::string::npos);
  CHECK(error_of(R"({"seed": 1, "model": {"family": "doubling"}, "shadowing": {"trails": 5}})")
            .find("shadowing.trails") != std::string::npos);
  CHECK(error_of(R"({"seed": 1, "model": {"family": "tent"}})").find("model.family") != std::string::npos);
  CHECK(error_of(R"({"seed": 1, "model": {"family": "doubling"}, "splitting": {"cone_width": 1.5}})")
            .find("splitting.cone_width") != std::string::npos);
  CHECK(error_of(R"({"seed": 1, "model": {"family": "custom", "lift": "2*x"}})").find("derivative") !=
        std::string::npos);
  CHECK(error_of(R"({"seed": 1, "model": {"family": "doubling"}, "pliss": {"varsigma_prime": "cube"}})")
            .find("pliss.varsigma_prime") != std::string::npos);
}

TEST_CASE("parse errors report the line") {
  const std::string text = "{\n  \"seed\": 1,\n  \"model\": {\"family\": doubling},\n  \"max_period\": 4\n}\n";
  CHECK(error_of(text).find("line 3") != std::string::npos);
}

TEST_CASE("config echo round trips") {
  const RunConfig c = load_config(std::string(HYPERCERT_CONFIG_DIR) + "/perturbed_cat_0.3.json");
  const std::string echo = config_echo(c);
  CHECK(config_echo(parse_config(echo)) == echo);
  RunConfig custom = quick("custom");
  custom.model.lift = "3*x + 0.1*sin(2*pi*x)";
  custom.model.derivative = "3 + 0.2*pi*cos(2*pi*x)";
  custom.model.degree = 3;
  custom.varsigma_prime = 0.8;
  CHECK(config_echo(parse_config(config_echo(custom))) == config_echo(custom));
}

TEST_CASE("shipped configs load") {
  for (const auto& entry : std::filesystem::directory_iterator(HYPERCERT_CONFIG_DIR)) {
    CAPTURE(entry.path().string());
    CHECK_NOTHROW((void)load_config(entry.path().string()));
  }
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), PreconditionError);
}

TEST_CASE("verdict logic for circle maps") {
  std::map<std::string, CheckRecord> c{{"local_diffeo", rec(CheckStatus::pass)},
                                       {"nue", rec(CheckStatus::pass)},
                                       {"shadowing", rec(CheckStatus::pass)},
                                       {"adapted_metric", rec(CheckStatus::pass)}};
  Verdict v = derive_verdict(c, 1);
  CHECK(v.verdict == kVerdictExpanding);
  CHECK(v.hypotheses_verified);
  CHECK(v.conclusion_verified);

  c["adapted_metric"] = rec(CheckStatus::fail);
  v = derive_verdict(c, 1);
  CHECK(v.verdict == kVerdictNotCertified);
  CHECK(v.hypotheses_verified);
  CHECK_FALSE(v.conclusion_verified);

  c["local_diffeo"] = rec(CheckStatus::fail);
  v = derive_verdict(c, 1);
  CHECK(v.verdict == kVerdictHypothesisViolated);

  c["nue"] = rec(CheckStatus::fail);
  CHECK(derive_verdict(c, 1).verdict == kVerdictNotCertified);

  // an errored check is not a failed hypothesis
  c["nue"] = rec(CheckStatus::pass);
  c["local_diffeo"] = rec(CheckStatus::error);
  CHECK(derive_verdict(c, 1).verdict == kVerdictNotCertified);
}

TEST_CASE("verdict logic for torus maps") {
  std::map<std::string, CheckRecord> c{{"diffeo", rec(CheckStatus::pass)},     {"nuh", rec(CheckStatus::pass)},
                                       {"domination", rec(CheckStatus::fail)}, {"continuity", rec(CheckStatus::pass)},
                                       {"shadowing", rec(CheckStatus::pass)},  {"hyperbolic_set", rec(CheckStatus::pass)}};
  CHECK(derive_verdict(c, 2).verdict == kVerdictHyperbolic);
  c["continuity"] = rec(CheckStatus::fail);
  CHECK(derive_verdict(c, 2).verdict == kVerdictNotCertified);
  c["domination"] = rec(CheckStatus::pass);
  c["hyperbolic_set"] = rec(CheckStatus::fail);
  const Verdict v = derive_verdict(c, 2);
  CHECK(v.verdict == kVerdictNotCertified);
  CHECK(v.hypotheses_verified);
}

TEST_CASE("verdict never cites an absent check") {
  std::map<std::string, CheckRecord> c{{"nue", rec(CheckStatus::pass)}};
  const Verdict v = derive_verdict(c, 1);
  CHECK(v.verdict == kVerdictNotCertified);
  for (const auto& b : v.basis) CHECK(c.count(b) == 1);
}

TEST_CASE("doubling pipeline") {
  const CertificationReport r = run_pipeline(quick("doubling"));
  CHECK(r.verdict.verdict == kVerdictExpanding);
  CHECK(r.checks.at("nue").constants.at("varsigma") == 0.5);
  CHECK(r.checks.at("adapted_metric").constants.at("sigma") == doctest::Approx(2.0));
  CHECK(r.checks.at("conjugacy").passed());
  CHECK(r.checks.at("pliss").passed());
  CHECK(r.checks.at("eigenvalue_bound").passed());
  CHECK(derive_verdict(r.checks, r.dim).verdict == r.verdict.verdict);
  for (const auto& b : r.verdict.basis) CHECK(r.checks.count(b) == 1);
  CHECK_FALSE(r.orbits_csv.empty());
  CHECK_FALSE(r.conjugacy_table.empty());
}

TEST_CASE("critical point pipeline") {
  const CertificationReport r = run_pipeline(quick("perturbed_doubling", 2.0));
  CHECK(r.verdict.verdict == kVerdictHypothesisViolated);
  CHECK(r.checks.at("nue").passed());
  CHECK(r.checks.at("local_diffeo").constants.at("min_conorm") < 1e-9);
  CHECK(r.justification.find("not a local diffeomorphism") != std::string::npos);
}

TEST_CASE("cat map pipeline") {
  const CertificationReport r = run_pipeline(quick("cat_map"));
  CHECK(r.verdict.verdict == kVerdictHyperbolic);
  CHECK(r.checks.at("hyperbolic_set").constants.at("lambda") == doctest::Approx(0.381966).epsilon(1e-6));
  CHECK(r.checks.at("domination").constants.at("lambda") == doctest::Approx(0.145898).epsilon(1e-6));
  CHECK(r.checks.count("adapted_metric") == 0);
  CHECK(r.checks.count("conjugacy") == 0);
  CHECK_FALSE(r.splitting_csv.empty());
}

TEST_CASE("custom circle pipeline") {
  RunConfig c = quick("custom");
  c.model.lift = "2*x + 0.05*sin(2*pi*x)";
  c.model.derivative = "2 + 0.1*pi*cos(2*pi*x)";
  const CertificationReport r = run_pipeline(c);
  CHECK(r.verdict.verdict == kVerdictExpanding);
}

TEST_CASE("report json is deterministic, sorted and rounded") {
  const RunConfig c = quick("perturbed_doubling", 0.5);
  const std::string a = report_json(run_pipeline(c));
  const std::string b = report_json(run_pipeline(c));
  CHECK(a == b);
  const json doc = json::parse(a);
  CHECK(doc.at("tool").at("version") == kToolVersion);
  CHECK(doc.at("verdict").at("verdict") == kVerdictExpanding);
  std::string prev;
  for (auto it = doc.at("checks").begin(); it != doc.at("checks").end(); ++it) {
    CHECK(it.key() > prev);
    prev = it.key();
  }
  const double sigma = doc.at("checks").at("adapted_metric").at("constants").at("sigma");
  CHECK(report_round(sigma) == sigma);
  // the echoed config reproduces the run
  const RunConfig again = parse_config(doc.at("config").dump());
  CHECK(config_echo(again) == config_echo(c));
}

TEST_CASE("twelve significant digits") {
  CHECK(report_round(0.38196601125010515) == 0.38196601125);
  CHECK(report_round(2.0) == 2.0);
  CHECK(std::isinf(report_round(INFINITY)));
}

TEST_CASE("csv summary has one row per check") {
  const CertificationReport r = run_pipeline(quick("doubling"));
  const std::string csv = report_csv_summary(r);
  CHECK(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')) == r.checks.size() + 1);
  CHECK(csv.find("nue,pass,varsigma,0.5\n") != std::string::npos);
}

TEST_CASE("emit writes every product") {
  const auto dir = std::filesystem::temp_directory_path() / "hypercert_emit_test";
  std::filesystem::remove_all(dir);
  const CertificationReport r = run_pipeline(quick("doubling"));
  const auto paths = emit_all(r, dir.string());
  CHECK(paths.size() == 5);
  for (const auto& p : paths) CHECK(std::filesystem::file_size(p) > 0);
  std::ifstream in(paths.front());
  std::stringstream buf;
  buf << in.rdbuf();
  CHECK(buf.str() == report_json(r));
  std::filesystem::remove_all(dir);
}

TEST_CASE("lift plot") {
  const std::string d = lift_plot_svg(MapModel::doubling());
  CHECK(d.rfind("<svg", 0) == 0);
  const auto count = [](const std::string& s, const std::string& what) {
    std::size_t n = 0;
    for (auto p = s.find(what); p != std::string::npos; p = s.find(what, p + 1)) ++n;
    return n;
  };
  CHECK(count(d, "class=\"cut\"") == 2);
  CHECK(count(d, "class=\"diagonal\"") == 1);
  // points of least period <= 6 of a degree-2 map: 1 + 2 + 6 + 12 + 30 + 54
  CHECK(count(d, "class=\"periodic\"") == 105);
  CHECK(lift_plot_svg(MapModel::perturbed_doubling(2.0)) == lift_plot_svg(MapModel::perturbed_doubling(2.0)));
  CHECK_THROWS_AS(lift_plot_svg(MapModel::cat_map()), PreconditionError);
}
