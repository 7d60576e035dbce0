#include "hypercert/acceptance.hpp"
#include "hypercert/certifier.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

using namespace hypercert;

namespace {

int certify(const std::string& path, std::optional<std::uint64_t> seed, const std::string& report_dir) {
  RunConfig config = load_config(path);
  if (seed) config.seed = *seed;
  if (!report_dir.empty()) config.report_dir = report_dir;
  const CertificationReport report = run_pipeline(config);
  for (const auto& [name, rec] : report.checks) {
    std::cout << "  " << name << ": " << to_string(rec.status) << '\n';
  }
  std::cout << "verdict: " << report.verdict.verdict << '\n' << "  " << report.justification << '\n';
  for (const auto& p : emit_all(report, config.report_dir)) std::cout << "wrote " << p << '\n';
  return 0;
}

int plot(const std::string& path, const std::string& out) {
  const RunConfig config = load_config(path);
  emit_lift_plot(config.model.build(), out);
  std::cout << "wrote " << out << '\n';
  return 0;
}

int selftest(const std::vector<int>& only, double scale, std::optional<std::uint64_t> seed) {
  SelftestOptions opt;
  opt.only = only;
  opt.tolerance_scale = scale;
  if (seed) opt.seed = *seed;
  const auto results = run_acceptance(opt);
  std::vector<std::string> failed;
  for (const auto& r : results) {
    std::cout << format_result(r) << '\n';
    if (!r.pass) failed.push_back(std::to_string(r.id) + " " + r.name);
  }
  std::cout << results.size() - failed.size() << "/" << results.size() << " criteria passed\n";
  for (const auto& f : failed) std::cout << "failed: " << f << '\n';
  return failed.empty() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical certification of expanding and hyperbolic behaviour for circle and torus maps"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  std::optional<std::uint64_t> seed;
  std::string report_dir;
  app.add_option("--seed", seed, "Override the config seed");
  app.add_option("--report-dir", report_dir, "Directory for reports and CSV exports");

  auto* cert = app.add_subcommand("certify", "Run the certification pipeline on a config");
  std::string cert_config;
  cert->add_option("config", cert_config, "Config file (JSON)")->required()->check(CLI::ExistingFile);
  cert->fallthrough();

  auto* plt = app.add_subcommand("plot", "Plot the lift of a circle model on [0, 1] as SVG");
  std::string plot_config, plot_out;
  plt->add_option("config", plot_config, "Config file (JSON)")->required()->check(CLI::ExistingFile);
  plt->add_option("--out", plot_out, "Output SVG path")->required();
  plt->fallthrough();

  auto* st = app.add_subcommand("selftest", "Run the acceptance criteria");
  std::vector<int> only;
  double scale = 1.0;
  st->add_option("--only", only, "Criterion ids to run")->delimiter(',')->check(CLI::Range(1, criterion_count()));
  st->add_option("--tolerance-scale", scale, "Multiply every tolerance (0.1 tightens 10x)")
      ->check(CLI::PositiveNumber);
  st->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*cert) return certify(cert_config, seed, report_dir);
    if (*plt) return plot(plot_config, plot_out);
    if (*st) return selftest(only, scale, seed);
  } catch (const PreconditionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
