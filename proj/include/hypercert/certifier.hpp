#pragma once

#include "hypercert/maps.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace hypercert {

extern const char* const kToolVersion;

struct ModelSpec {
  std::string family = "doubling";
  double strength = 0.0;
  // custom circle maps only
  std::string lift;
  std::string derivative;
  int degree = 2;
  double branch_radius = 0.01;

  [[nodiscard]] MapModel build() const;
};

struct RunConfig {
  ModelSpec model;
  std::size_t max_period = 8;
  std::optional<double> varsigma_prime;  // empty: sqrt(varsigma)
  std::size_t pliss_length = 2000;
  std::size_t pliss_orbits = 8;
  std::size_t metric_horizon = 8;
  std::size_t metric_grid = 1u << 14;
  std::size_t local_diffeo_grid = 1u << 12;
  std::size_t shadowing_trials = 100;
  std::vector<double> shadowing_alphas{0.0, 1e-4, 1e-3, 1e-2};
  std::size_t shadowing_max_period = 6;
  double shadowing_ratio_bound = 1e3;
  bool conjugacy = true;
  std::size_t conjugacy_resolution = 1u << 14;
  std::size_t holder_pairs = 2000;
  std::size_t eigen_max_period = 4;
  double cone_width = 0.5;
  std::size_t cone_steps = 50;
  std::size_t domination_l = 1;
  std::size_t hyperbolic_horizon = 12;
  std::size_t splitting_max_period = 6;
  std::string report_dir = "reports";
  std::string name = "run";
  std::uint64_t seed = 0;
};

/// Strict: unknown keys and missing seed are errors (PreconditionError with
/// the offending field or the line of a parse error).
RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& text);
/// Full config with defaults filled in, as a JSON document.
std::string config_echo(const RunConfig& config);

enum class CheckStatus { pass, fail, skipped, error };
std::string to_string(CheckStatus s);

struct CheckRecord {
  CheckStatus status = CheckStatus::skipped;
  std::map<std::string, double> inputs;
  std::map<std::string, double> constants;
  std::map<std::string, double> margins;
  std::vector<std::string> notes;

  [[nodiscard]] bool passed() const { return status == CheckStatus::pass; }
};

struct Verdict {
  std::string verdict;
  std::vector<std::string> basis;  // checks the verdict was derived from
  bool hypotheses_verified = false;
  bool conclusion_verified = false;
};

inline const char* const kVerdictExpanding = "expanding";
inline const char* const kVerdictHypothesisViolated = "not expanding — hypothesis violated";
inline const char* const kVerdictHyperbolic = "hyperbolic set";
inline const char* const kVerdictNotCertified = "not certified";

/// Pure function of the recorded outcomes.
Verdict derive_verdict(const std::map<std::string, CheckRecord>& checks, int dim);

struct CertificationReport {
  std::string tool_version;
  RunConfig config;
  std::string model_id;
  int dim = 1;
  std::map<std::string, CheckRecord> checks;
  Verdict verdict;
  std::string justification;

  // tabular side products, written next to the report
  std::string orbits_csv;
  std::string shadowing_csv;
  std::string conjugacy_table;
  std::string splitting_csv;
};

CertificationReport run_pipeline(const RunConfig& config);

/// Deterministic JSON: sorted keys, numbers at 12 significant digits.
std::string report_json(const CertificationReport& report);
/// check,status,metric,value
std::string report_csv_summary(const CertificationReport& report);

enum class ReportFormat { json, csv_summary };
/// Writes the requested format into config.report_dir; returns the path.
std::string emit_report(const CertificationReport& report, ReportFormat format, const std::string& dir);
/// Writes the report, the summary and the tabular side products; returns the paths.
std::vector<std::string> emit_all(const CertificationReport& report, const std::string& dir);

/// SVG of the lift on [0, 1] with the diagonal, branch cuts and periodic
/// points of period <= 6. Circle models only.
std::string lift_plot_svg(const MapModel& model);
void emit_lift_plot(const MapModel& model, const std::string& path);

/// Rounds to 12 significant digits (the report precision).
double report_round(double v);

}  // namespace hypercert
