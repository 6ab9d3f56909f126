#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace qkd {

struct SuiteResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double millis = 0.0;
};

/// Available suites: f2, hashball, pauli, protocol, rates.
std::vector<std::string> selftest_suites();

/// Run the named suites (all of them when `names` is empty).
/// Unknown names throw std::invalid_argument.
std::vector<SuiteResult> run_selftest(const std::vector<std::string>& names,
                                      std::uint64_t seed);

}  // namespace qkd
