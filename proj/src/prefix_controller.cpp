#include "prefix_sampling/prefix_controller.hpp"

#include <algorithm>
#include <cmath>

#include "prefix_sampling/errors.hpp"

namespace prefix_sampling {

std::optional<PrefixRecord> select_prefix(const RolloutGroup& group,
                                          std::span<const Trajectory> trajectories) {
  if (group.origin != Origin::Fresh)
    throw ContractViolation("select_prefix: rerollout groups never seed prefixes");
  if (is_degenerate(group))
    throw ContractViolation("select_prefix: degenerate groups carry no prefix");
  if (trajectories.size() != group.rewards.size())
    throw ContractViolation("select_prefix: one trajectory per rollout required");

  const Bucket bucket = classify_bucket(pass_count(group), group.size());
  if (!bucket.skewed()) return std::nullopt;

  const bool want_success = bucket.cls == BucketClass::Hard;
  for (std::size_t i = 0; i < trajectories.size(); ++i) {
    if (trajectories[i].success != (group.rewards[i] == 1))
      throw ContractViolation("select_prefix: trajectory outcome disagrees with reward");
    if (trajectories[i].success == want_success) {
      return PrefixRecord{group.task_id, bucket,
                          want_success ? Outcome::Success : Outcome::Failure,
                          trajectories[i].steps};
    }
  }
  return std::nullopt;  // unreachable for a non-degenerate group
}

std::optional<int> replay_boundary(double ratio, int length) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) throw DomainError("replay_boundary: ratio must lie in [0, 1]");
  if (length < 1) throw DomainError("replay_boundary: trajectory length must be positive");
  if (length == 1) return std::nullopt;
  const int m = static_cast<int>(std::floor(ratio * length));
  return std::clamp(m, 1, length - 1);
}

BucketControllerState initial_state(const Bucket& bucket, const ControllerParams& params) {
  return BucketControllerState{bucket, params.initial_ratio, params.initial_ema, 0, 0};
}

BucketControllerState update_controller(const BucketControllerState& state, double observed,
                                        const ControllerParams& params) {
  if (!(observed >= 0.0 && observed <= 1.0))
    throw DomainError("update_controller: observed pass rate must lie in [0, 1]");
  if (!state.bucket.skewed())
    throw ContractViolation("update_controller: only Hard and Easy buckets are controlled");

  BucketControllerState next = state;
  next.updates_seen += 1;
  next.ema = (1.0 - params.alpha) * state.ema + params.alpha * observed;

  if (next.cooldown_remaining > 0) {
    if (params.cooldown_unit == CooldownUnit::ControllerUpdates) next.cooldown_remaining -= 1;
    return next;
  }

  int direction = 0;  // +1 raises the bucket's pass rate
  if (next.ema > params.target + params.deadzone)
    direction = -1;
  else if (next.ema < params.target - params.deadzone)
    direction = +1;
  if (direction == 0) return next;

  // A longer success prefix helps; a longer failure prefix hurts.
  const double sign = state.bucket.cls == BucketClass::Hard ? 1.0 : -1.0;
  const double ratio = std::clamp(state.ratio + sign * direction * params.step, params.ratio_min,
                                  params.ratio_max);
  if (ratio != state.ratio) {
    next.ratio = ratio;
    next.cooldown_remaining = params.cooldown;
  }
  return next;
}

AdaptiveController::AdaptiveController(int group_size, ControllerParams params, bool easy_enabled)
    : params_(params) {
  for (int k = 1; k < group_size; ++k) {
    const Bucket b = classify_bucket(k, group_size);
    if (b.cls == BucketClass::Hard || (easy_enabled && b.cls == BucketClass::Easy))
      states_.emplace(b, initial_state(b, params_));
  }
}

const BucketControllerState& AdaptiveController::state(const Bucket& b) const {
  const auto it = states_.find(b);
  if (it == states_.end())
    throw ContractViolation("adaptive controller: bucket " + b.label() + " is not controlled");
  return it->second;
}

double AdaptiveController::ratio(const Bucket& b) const { return state(b).ratio; }

void AdaptiveController::observe(const Bucket& b, double pass_rate) {
  const auto it = states_.find(b);
  if (it == states_.end())
    throw ContractViolation("adaptive controller: bucket " + b.label() + " is not controlled");
  it->second = update_controller(it->second, pass_rate, params_);
}

void AdaptiveController::end_step() {
  if (params_.cooldown_unit != CooldownUnit::TrainingSteps) return;
  for (auto& [bucket, s] : states_)
    if (s.cooldown_remaining > 0) s.cooldown_remaining -= 1;
}

std::vector<Bucket> AdaptiveController::buckets() const {
  std::vector<Bucket> out;
  for (const auto& [b, s] : states_) out.push_back(b);
  std::sort(out.begin(), out.end(),
            [](const Bucket& a, const Bucket& b) { return a.pass_count < b.pass_count; });
  return out;
}

void PrefixPool::save(PrefixRecord record) {
  auto key = std::make_pair(record.task_id, record.source_bucket);
  records_.insert_or_assign(std::move(key), std::move(record));
}

std::optional<PrefixRecord> PrefixPool::consume(TaskId task, const Bucket& bucket) {
  auto node = records_.extract({task, bucket});
  if (node.empty()) return std::nullopt;
  return std::move(node.mapped());
}

std::vector<PrefixRecord> PrefixPool::drain() {
  std::vector<PrefixRecord> out;
  out.reserve(records_.size());
  for (auto& [key, rec] : records_) out.push_back(std::move(rec));
  records_.clear();
  return out;
}

double prefix_pool_memory_bound(long long batch_size, long long max_prompt,
                                long long max_response) {
  if (batch_size < 0 || max_prompt < 0 || max_response < 0)
    throw DomainError("prefix_pool_memory_bound: sizes must be non-negative");
  constexpr double kBytesPerToken = 4.0;
  return static_cast<double>(batch_size) *
         (static_cast<double>(max_prompt) + 0.95 * static_cast<double>(max_response)) *
         kBytesPerToken;
}

}  // namespace prefix_sampling
