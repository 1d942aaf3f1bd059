#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace prefix_sampling {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Oracle suites behind the `verify` command. Each closed form is checked
/// against an independent computation such as enumeration or sampling.
std::vector<CheckResult> check_signal_landmarks();
std::vector<CheckResult> check_advantage_oracles(int max_group_size = 12);
std::vector<CheckResult> check_survival_monte_carlo(long long groups = 1'000'000,
                                                    std::uint64_t seed = 7);
std::vector<CheckResult> check_gradient_finite_differences(int instances = 50,
                                                           std::uint64_t seed = 11);
std::vector<CheckResult> check_controller(int sequences = 1000, std::uint64_t seed = 13);
std::vector<CheckResult> check_memory_bounds();

std::vector<CheckResult> run_all_checks();

}  // namespace prefix_sampling
