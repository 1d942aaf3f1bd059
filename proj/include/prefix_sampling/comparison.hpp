#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <vector>

#include "prefix_sampling/experiment.hpp"

namespace prefix_sampling {

struct ComparisonRow {
  Arm arm = Arm::Baseline;
  std::uint64_t seed = 0;
  RunSummary summary;
};

/// Runs every arm on the same seeds; the config's own arm is ignored.
/// With a non-empty `out`, each run's traces go to out/<arm>/seed_<seed>/.
std::vector<ComparisonRow> run_comparison(const ExperimentConfig& base,
                                          const std::vector<std::uint64_t>& seeds,
                                          const std::filesystem::path& out = {});

/// One row per (arm, seed) plus a `mean` row per arm.
void write_summary_csv(std::ostream& out, const std::vector<ComparisonRow>& rows, int group_size);

}  // namespace prefix_sampling
