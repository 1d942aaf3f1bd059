#include "prefix_sampling/env_sim.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "prefix_sampling/errors.hpp"
#include "prefix_sampling/random.hpp"

namespace prefix_sampling {

namespace {

int draw_length(Rng& rng, const SyntheticTask& task) {
  return std::uniform_int_distribution<int>(task.min_length, task.max_length)(rng);
}

StepId step_id(TrajectoryHandle handle, int position) {
  return splitmix64(handle ^ splitmix64(static_cast<std::uint64_t>(position)));
}

void check_group_size(int n) {
  if (n < 2) throw DomainError("rollout group size must be at least 2");
}

double uniform_in(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

}  // namespace

double logit(double p) {
  if (p <= 0.0) return -std::numeric_limits<double>::infinity();
  if (p >= 1.0) return std::numeric_limits<double>::infinity();
  return std::log(p / (1.0 - p));
}

void check_task(const SyntheticTask& task) {
  if (std::isnan(task.base_logit)) throw DomainError("synthetic task: base logit is NaN");
  if (!(task.sensitivity >= 0.0)) throw DomainError("synthetic task: sensitivity must be >= 0");
  if (task.min_length < 2 || task.max_length < task.min_length)
    throw DomainError("synthetic task: length range must be nonempty with minimum >= 2");
}

SampledGroup sample_fresh_group(const SyntheticTask& task, int group_size, std::uint64_t seed,
                                int step) {
  check_task(task);
  check_group_size(group_size);
  const double p = task.fresh_pass_probability();

  SampledGroup out;
  out.group.task_id = task.id;
  out.group.origin = Origin::Fresh;
  out.group.step = step;
  for (int i = 0; i < group_size; ++i) {
    const std::initializer_list<std::uint64_t> coords = {static_cast<std::uint64_t>(step), task.id,
                                                         static_cast<std::uint64_t>(i)};
    Rng rng = make_rng(seed, Stream::FreshRollout, coords);
    Trajectory tr;
    tr.handle = stream_seed(seed, Stream::FreshRollout, coords);
    tr.success = bernoulli(rng, p);
    const int length = draw_length(rng, task);
    tr.steps.reserve(length);
    for (int t = 0; t < length; ++t) tr.steps.push_back(step_id(tr.handle, t));

    out.group.rewards.push_back(tr.success ? 1 : 0);
    out.group.trajectory_refs.push_back(tr.handle);
    out.trajectories.push_back(std::move(tr));
  }
  return out;
}

double conditioned_pass_probability(const SyntheticTask& task, Outcome prefix_outcome,
                                    double ratio) {
  if (!(ratio >= 0.0 && ratio <= 1.0))
    throw DomainError("conditioned_pass_probability: ratio must lie in [0, 1]");
  const double shift = task.sensitivity * ratio;
  return logistic(prefix_outcome == Outcome::Success ? task.base_logit + shift
                                                     : task.base_logit - shift);
}

SampledGroup sample_rerollout_group(const SyntheticTask& task, const PrefixRecord& prefix,
                                    int replay_steps, int group_size, std::uint64_t seed,
                                    int step) {
  check_task(task);
  check_group_size(group_size);
  if (prefix.task_id != task.id)
    throw ContractViolation("sample_rerollout_group: prefix belongs to another task");
  if (replay_steps < 1 || replay_steps >= prefix.length())
    throw ContractViolation("sample_rerollout_group: replay boundary must satisfy 1 <= M < T");

  const double ratio = static_cast<double>(replay_steps) / prefix.length();
  const double p = conditioned_pass_probability(task, prefix.outcome, ratio);

  SampledGroup out;
  out.group.task_id = task.id;
  out.group.origin = Origin::Rerollout;
  out.group.parent_bucket = prefix.source_bucket;
  out.group.step = step;
  for (int i = 0; i < group_size; ++i) {
    const std::initializer_list<std::uint64_t> coords = {
        static_cast<std::uint64_t>(step), task.id,
        static_cast<std::uint64_t>(prefix.source_bucket.pass_count),
        static_cast<std::uint64_t>(i)};
    Rng rng = make_rng(seed, Stream::Rerollout, coords);
    Trajectory tr;
    tr.handle = stream_seed(seed, Stream::Rerollout, coords);
    tr.success = bernoulli(rng, p);
    tr.replay_boundary = replay_steps;
    const int continuation = draw_length(rng, task);
    tr.steps.assign(prefix.steps.begin(), prefix.steps.begin() + replay_steps);
    for (int t = 0; t < continuation; ++t) tr.steps.push_back(step_id(tr.handle, t));

    out.group.rewards.push_back(tr.success ? 1 : 0);
    out.group.trajectory_refs.push_back(tr.handle);
    out.trajectories.push_back(std::move(tr));
  }
  return out;
}

PopulationSpec PopulationSpec::hard_skewed(int size) {
  PopulationSpec spec;
  spec.size = size;
  // Sensitivity grows with |logit| so tasks within a bucket reach p = 0.5 at
  // similar prefix ratios (around r = 1 / rel).
  const PopulationComponent hard{0.45, -2.8, 1.2, 0.0, 0.5, 1.3, 2.0};
  const PopulationComponent easy{0.30, 2.8, 1.2, 0.0, 0.5, 1.3, 2.0};
  const PopulationComponent middle{0.25, 0.0, 1.0, 0.0, 0.5, 1.3, 2.0};
  spec.components = {hard, easy, middle};
  return spec;
}

PopulationSpec PopulationSpec::fixed(double p0, double sensitivity, int size) {
  if (!(p0 > 0.0 && p0 < 1.0)) throw DomainError("fixed population: p0 must lie in (0, 1)");
  PopulationSpec spec;
  spec.size = size;
  spec.components = {PopulationComponent{1.0, logit(p0), 0.0, sensitivity, sensitivity, 0.0, 0.0}};
  return spec;
}

std::vector<SyntheticTask> make_task_population(const PopulationSpec& spec, std::uint64_t seed) {
  if (spec.size <= 0 || spec.components.empty())
    throw DomainError("make_task_population: empty population spec");
  double total_weight = 0.0;
  for (const auto& c : spec.components) {
    if (!(c.weight > 0.0)) throw DomainError("make_task_population: weights must be positive");
    if (c.logit_stddev < 0.0 || c.sensitivity_abs_min < 0.0 || c.sensitivity_rel_min < 0.0 ||
        c.sensitivity_abs_max < c.sensitivity_abs_min ||
        c.sensitivity_rel_max < c.sensitivity_rel_min)
      throw DomainError("make_task_population: invalid component ranges");
    total_weight += c.weight;
  }
  if (spec.min_length < 2 || spec.max_length < spec.min_length)
    throw DomainError("make_task_population: length range must be nonempty with minimum >= 2");

  std::vector<SyntheticTask> tasks;
  tasks.reserve(spec.size);
  for (int i = 0; i < spec.size; ++i) {
    Rng rng = make_rng(seed, Stream::Population, {static_cast<std::uint64_t>(i)});
    double pick = uniform01(rng) * total_weight;
    const PopulationComponent* comp = &spec.components.back();
    for (const auto& c : spec.components) {
      if (pick < c.weight) {
        comp = &c;
        break;
      }
      pick -= c.weight;
    }
    double b = comp->logit_mean;
    if (comp->logit_stddev > 0.0)
      b += comp->logit_stddev * std::normal_distribution<double>(0.0, 1.0)(rng);
    const double s = uniform_in(rng, comp->sensitivity_abs_min, comp->sensitivity_abs_max) +
                     uniform_in(rng, comp->sensitivity_rel_min, comp->sensitivity_rel_max) *
                         std::abs(b);
    tasks.push_back(SyntheticTask{static_cast<TaskId>(i), spec.mirrored ? -b : b, s,
                                  spec.min_length, spec.max_length});
  }
  return tasks;
}

}  // namespace prefix_sampling
