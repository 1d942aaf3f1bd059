#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "prefix_sampling/advantage_masking.hpp"
#include "prefix_sampling/env_sim.hpp"
#include "prefix_sampling/prefix_controller.hpp"

namespace prefix_sampling {

enum class Arm { Baseline, PSFix, PSAdaHardOnly, PSAda };

std::string to_string(Arm arm);
Arm parse_arm(std::string_view name);

/// When rerollouts from a fresh skewed group are sampled: in the parent's
/// own step, or at the start of the following step.
enum class RerolloutSchedule { SameStep, NextStep };

struct ExperimentConfig {
  Arm arm = Arm::PSAda;
  int group_size = 8;
  int batch_size = 64;
  int steps = 300;
  std::uint64_t seed = 1;
  RerolloutSchedule schedule = RerolloutSchedule::SameStep;

  ControllerParams controller;
  double fixed_ratio = 0.5;  // PSFix only

  std::string population_preset = "hard_skewed";
  PopulationSpec population = PopulationSpec::hard_skewed();

  LossOptions loss;

  // Recorded for provenance only; no optimizer consumes them.
  double clip_high = 0.28;
  bool compact_filtering = true;
};

/// Throws ConfigError naming the first offending key.
void validate(const ExperimentConfig& config);

/// Parses flat `dotted.key = value` lines. `#` starts a comment; unknown
/// keys and malformed values are errors. Keys not present keep their
/// defaults. The result is validated.
ExperimentConfig parse_config(std::string_view text);

ExperimentConfig load_config(const std::filesystem::path& path);

/// The effective controller parameters an arm runs with. PSFix replaces the
/// configured controller by a frozen one holding `fixed_ratio`.
ControllerParams effective_controller_params(const ExperimentConfig& config);

}  // namespace prefix_sampling
