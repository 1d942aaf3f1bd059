#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "prefix_sampling/group_model.hpp"

namespace prefix_sampling {

/// Pass-count distribution summary of one cohort of groups. Shares are
/// NaN for an empty cohort.
struct CohortMetrics {
  int groups = 0;
  int valid = 0;
  double degenerate_share = 0.0;
  double target_band_share = 0.0;
  double exact_half_share = 0.0;
  double mean_distance = 0.0;  // mean |k - N/2|
};

CohortMetrics compute_cohort_metrics(std::span<const RolloutGroup> groups);

struct StepMetrics {
  int step = 0;
  int valid_groups = 0;
  CohortMetrics fresh;
  CohortMetrics rerollout;
  struct BucketPassRate {
    Bucket bucket;
    int groups = 0;
    double pass_rate = 0.0;  // NaN when groups == 0
  };
  /// Rerollout pass rate per parent bucket.
  std::vector<BucketPassRate> rerollout_pass_rate;

  // Audit of the mixed batch.
  double mean_rloo_energy = 0.0;
  long long masked_steps = 0;
  long long trainable_steps = 0;
  double audit_loss = 0.0;
};

/// Cohort split by origin over every sampled group of a step, degenerate
/// ones included. `buckets` lists the parent buckets to report pass rates
/// for.
StepMetrics compute_step_metrics(std::span<const RolloutGroup> batch,
                                 std::span<const Bucket> buckets, int step = 0);

struct TransitionPair {
  Bucket source;
  int child_pass_count = 0;
};

/// Parent-bucket to child-pass-count transitions of rerollout groups.
struct TransitionMatrix {
  int group_size = 0;
  std::vector<Bucket> sources;
  Eigen::MatrixXd counts;  // sources x (N + 1)

  double row_total(int row) const { return counts.row(row).sum(); }
  bool row_empty(int row) const { return row_total(row) == 0.0; }
  int row_of(const Bucket& b) const;

  /// Row-normalized distribution; empty rows stay zero.
  Eigen::MatrixXd probabilities() const;
  std::optional<double> mean_child_pass_count(int row) const;
  std::optional<double> target_band_share(int row) const;
};

/// Rows default to every skewed bucket at group size N.
TransitionMatrix compute_transition_matrix(std::span<const TransitionPair> pairs, int group_size);
TransitionMatrix compute_transition_matrix(std::span<const TransitionPair> pairs, int group_size,
                                           std::vector<Bucket> sources);

std::vector<Bucket> skewed_buckets(int group_size);

}  // namespace prefix_sampling
