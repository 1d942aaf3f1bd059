#pragma once

#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "prefix_sampling/group_model.hpp"
#include "prefix_sampling/trajectory.hpp"

namespace prefix_sampling {

enum class Outcome { Success, Failure };

/// A saved trajectory from a skewed fresh group. Hard buckets keep a
/// success, Easy buckets keep a failure.
struct PrefixRecord {
  TaskId task_id = 0;
  Bucket source_bucket;
  Outcome outcome = Outcome::Success;
  std::vector<StepId> steps;

  int length() const { return static_cast<int>(steps.size()); }
};

/// Picks the prefix a fresh skewed group seeds: the lowest-index success for
/// Hard buckets, the lowest-index failure for Easy buckets, nothing for
/// Balanced. `trajectories[i]` must belong to rollout i of the group.
std::optional<PrefixRecord> select_prefix(const RolloutGroup& group,
                                          std::span<const Trajectory> trajectories);

/// M = floor(ratio * T) clamped to [1, T-1]. A single-step trajectory has no
/// valid boundary and yields nullopt.
std::optional<int> replay_boundary(double ratio, int length);

enum class CooldownUnit { ControllerUpdates, TrainingSteps };

struct ControllerParams {
  double alpha = 0.05;
  double deadzone = 0.03;
  double step = 0.05;
  double ratio_min = 0.05;
  double ratio_max = 0.95;
  int cooldown = 5;
  double initial_ratio = 0.5;
  double initial_ema = 0.5;
  double target = 0.5;
  CooldownUnit cooldown_unit = CooldownUnit::ControllerUpdates;
};

struct BucketControllerState {
  Bucket bucket;
  double ratio = 0.5;
  double ema = 0.5;
  int cooldown_remaining = 0;
  int updates_seen = 0;

  friend bool operator==(const BucketControllerState&, const BucketControllerState&) = default;
};

BucketControllerState initial_state(const Bucket& bucket, const ControllerParams& params = {});

/// One feedback update from a completed rerollout group's pass rate:
/// EMA first, then (outside cooldown) a ratio step of size `params.step`
/// toward the target whenever the EMA sits outside the deadzone. Hard
/// buckets lower the ratio when the EMA is high; Easy buckets raise it.
BucketControllerState update_controller(const BucketControllerState& state, double observed,
                                        const ControllerParams& params = {});

/// Independent controllers for every enabled skewed bucket at group size N.
class AdaptiveController {
 public:
  AdaptiveController(int group_size, ControllerParams params, bool easy_enabled = true);

  bool controls(const Bucket& b) const { return states_.contains(b); }
  double ratio(const Bucket& b) const;
  const BucketControllerState& state(const Bucket& b) const;
  const ControllerParams& params() const { return params_; }

  void observe(const Bucket& b, double pass_rate);

  /// Advances step-counted cooldowns; no-op for update-counted cooldowns.
  void end_step();

  /// Controlled buckets in ascending pass-count order.
  std::vector<Bucket> buckets() const;

 private:
  ControllerParams params_;
  std::map<Bucket, BucketControllerState> states_;
};

/// Saved prefixes awaiting rerollout: one per (task, bucket), newest wins,
/// removed once consumed.
class PrefixPool {
 public:
  void save(PrefixRecord record);
  std::optional<PrefixRecord> consume(TaskId task, const Bucket& bucket);

  /// Removes and returns all records ordered by (task_id, bucket).
  std::vector<PrefixRecord> drain();

  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

 private:
  std::map<std::pair<TaskId, Bucket>, PrefixRecord> records_;
};

/// Upper bound on text-prefix pool memory in bytes:
/// batch * (max_prompt + 0.95 * max_response) int32 token ids.
double prefix_pool_memory_bound(long long batch_size, long long max_prompt, long long max_response);

inline double to_mebibytes(double bytes) { return bytes / (1024.0 * 1024.0); }

}  // namespace prefix_sampling
