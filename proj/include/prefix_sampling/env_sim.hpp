#pragma once

#include <cstdint>
#include <vector>

#include "prefix_sampling/group_model.hpp"
#include "prefix_sampling/prefix_controller.hpp"
#include "prefix_sampling/trajectory.hpp"

namespace prefix_sampling {

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double logit(double p);

/// A task with a latent fresh pass probability logistic(base_logit). A
/// replayed prefix covering a fraction r of its source trajectory shifts the
/// continuation logit by +sensitivity*r (success prefix) or
/// -sensitivity*r (failure prefix).
struct SyntheticTask {
  TaskId id = 0;
  double base_logit = 0.0;
  double sensitivity = 0.0;
  int min_length = 2;
  int max_length = 2;

  double fresh_pass_probability() const { return logistic(base_logit); }
};

void check_task(const SyntheticTask& task);

struct SampledGroup {
  RolloutGroup group;
  std::vector<Trajectory> trajectories;
};

/// N independent fresh rollouts. Rollout i draws from its own stream keyed
/// by (seed, step, task, i), so the result does not depend on call order.
SampledGroup sample_fresh_group(const SyntheticTask& task, int group_size, std::uint64_t seed,
                                int step = 0);

double conditioned_pass_probability(const SyntheticTask& task, Outcome prefix_outcome,
                                    double ratio);

/// N rollouts that each replay the prefix's first M steps and continue with
/// fresh steps. Success is Bernoulli(conditioned_pass_probability(task,
/// prefix.outcome, M / T)). Requires 1 <= M < T.
SampledGroup sample_rerollout_group(const SyntheticTask& task, const PrefixRecord& prefix,
                                    int replay_steps, int group_size, std::uint64_t seed,
                                    int step = 0);

/// One mixture component over task difficulty. The base logit is drawn from
/// Normal(logit_mean, logit_stddev); sensitivity is U[abs] + U[rel] * |logit|.
struct PopulationComponent {
  double weight = 1.0;
  double logit_mean = 0.0;
  double logit_stddev = 0.0;
  double sensitivity_abs_min = 0.0;
  double sensitivity_abs_max = 0.0;
  double sensitivity_rel_min = 0.0;
  double sensitivity_rel_max = 0.0;
};

struct PopulationSpec {
  int size = 0;
  std::vector<PopulationComponent> components;
  int min_length = 16;
  int max_length = 48;
  bool mirrored = false;  // negate every base logit (p0 -> 1 - p0)

  /// Mostly very hard or very easy tasks: about half of all fresh N=8 groups
  /// are degenerate and under a fifth land in 3/8..5/8.
  static PopulationSpec hard_skewed(int size = 1000);

  /// `size` identical tasks with fresh pass probability p0.
  static PopulationSpec fixed(double p0, double sensitivity, int size = 1);
};

std::vector<SyntheticTask> make_task_population(const PopulationSpec& spec, std::uint64_t seed);

}  // namespace prefix_sampling
