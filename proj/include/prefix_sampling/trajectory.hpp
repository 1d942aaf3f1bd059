#pragma once

#include <cstdint>
#include <vector>

#include "prefix_sampling/group_model.hpp"

namespace prefix_sampling {

/// Opaque identifier of one environment-interaction step.
using StepId = std::uint64_t;

/// A T-step rollout. Steps [0, replay_boundary) were copied from a saved
/// prefix; a fresh rollout has replay_boundary 0.
struct Trajectory {
  TrajectoryHandle handle = 0;
  std::vector<StepId> steps;
  bool success = false;
  int replay_boundary = 0;

  int length() const { return static_cast<int>(steps.size()); }
};

}  // namespace prefix_sampling
