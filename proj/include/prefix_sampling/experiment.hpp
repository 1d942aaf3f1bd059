#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "prefix_sampling/config.hpp"
#include "prefix_sampling/metrics.hpp"

namespace prefix_sampling {

struct ControllerTraceRow {
  int step = 0;
  Bucket bucket;
  double ratio = 0.0;
  double ema = 0.0;
  int cooldown_remaining = 0;
};

struct RunResult {
  int group_size = 0;
  std::vector<Bucket> controlled_buckets;  // empty for the baseline arm
  std::vector<StepMetrics> metrics;
  std::vector<ControllerTraceRow> controller_trace;
  std::vector<TransitionPair> transitions;
  TransitionMatrix transition_matrix;
  std::vector<nlohmann::ordered_json> group_records;  // one per sampled group
};

/// Runs the closed loop for `config.steps` steps. Skewed fresh groups are
/// replayed from a saved prefix and the rerollout pass rates drive the
/// controller. Deterministic in the config.
RunResult run_experiment(const ExperimentConfig& config);

/// Whole-run aggregates used by summaries and acceptance checks.
struct RunSummary {
  double mean_valid_groups = 0.0;
  double mean_fresh_valid = 0.0;
  double mean_rerollout_valid = 0.0;
  CohortMetrics fresh;      // pooled over all steps
  CohortMetrics rerollout;  // pooled over all steps
  /// Pooled rerollout pass rate per parent bucket over the last
  /// `tail_steps` steps (all steps when tail_steps <= 0).
  std::map<Bucket, double> rerollout_pass_rate;
  std::map<Bucket, double> final_ema;
  std::map<Bucket, double> final_ratio;
};

RunSummary summarize(const RunResult& run, int tail_steps = 0);

}  // namespace prefix_sampling
