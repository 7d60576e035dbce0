#include "hypercert/acceptance.hpp"

#include <cstdlib>
#include <iostream>
#include <string>

int main(int argc, char** argv) {
  hypercert::SelftestOptions opt;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--only" && i + 1 < argc) {
      opt.only.push_back(std::atoi(argv[++i]));
    } else if (arg == "--tolerance-scale" && i + 1 < argc) {
      opt.tolerance_scale = std::atof(argv[++i]);
    } else {
      std::cerr << "usage: acceptance [--only id]... [--tolerance-scale x]\n";
      return 2;
    }
  }
  int failed = 0;
  for (const auto& r : hypercert::run_acceptance(opt)) {
    std::cout << hypercert::format_result(r) << '\n';
    if (!r.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
