#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace hypercert {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

struct SelftestOptions {
  std::vector<int> only;         // empty: all criteria
  double tolerance_scale = 1.0;  // multiplies every numeric tolerance; 0.1 tightens 10x
  std::uint64_t seed = 20240611;
};

int criterion_count();
std::string criterion_name(int id);

std::vector<CriterionResult> run_acceptance(const SelftestOptions& options);

/// "PASS  3 lyapunov_spectrum  <detail>"
std::string format_result(const CriterionResult& r);

}  // namespace hypercert
