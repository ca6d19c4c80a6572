#include "pucci/verify.hpp"

#include <iostream>

/// Runs every acceptance criterion and prints one PASS/FAIL line for each.
int main() {
  const auto results = pucci::run_verify({});
  int failed = 0;
  for (const auto& r : results) {
    std::cout << pucci::format_result_line(r) << '\n';
    failed += !r.passed;
  }
  std::cout << (results.size() - static_cast<std::size_t>(failed)) << "/" << results.size()
            << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
