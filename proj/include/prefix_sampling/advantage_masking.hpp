#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace prefix_sampling {

/// Leave-one-out advantages: A_i = r_i - mean of the other N-1 rewards.
Eigen::VectorXd rloo_advantages(std::span<const std::uint8_t> rewards);

/// A_i = r_i - k/N.
Eigen::VectorXd mean_centered_advantages(std::span<const std::uint8_t> rewards);

/// A token sequence with a replay boundary. Positions before `t_cont` were
/// replayed from a saved prefix and carry mask 0; the rest were generated by
/// the current policy and carry mask 1.
struct TokenTrajectory {
  std::vector<int> token_ids;
  int t_cont = 0;
  std::vector<std::uint8_t> response_mask;

  int size() const { return static_cast<int>(token_ids.size()); }
  int trainable_tokens() const;
};

/// Builds an unmasked trajectory (t_cont = 0).
TokenTrajectory make_token_trajectory(std::vector<int> tokens);

/// Sets the mask to 0 on [0, t_cont) and 1 on [t_cont, length). Idempotent.
TokenTrajectory apply_prefix_mask(TokenTrajectory trajectory, int t_cont);

/// Categorical policy over a vocabulary, one logit row per context class.
/// Token position t falls into class min(t / positions_per_class, rows - 1).
struct ToyPolicy {
  Eigen::MatrixXd logits;  // context classes x vocabulary
  int positions_per_class = 1;

  int context_classes() const { return static_cast<int>(logits.rows()); }
  int vocabulary() const { return static_cast<int>(logits.cols()); }
  int context_of(int position) const;

  /// Row-wise log-softmax of the logits.
  Eigen::MatrixXd log_probabilities() const;
};

enum class LengthNormalization {
  None,       // plain sum over unmasked tokens
  TokenMean,  // divide by the group's total unmasked token count
};

enum class GroupReduction { Sum, Mean };

struct LossOptions {
  LengthNormalization normalization = LengthNormalization::None;
  GroupReduction reduction = GroupReduction::Sum;
};

/// -sum_i A_i sum_{t >= t_cont,i} log pi(token_{i,t} | context), scaled by
/// the configured normalization and reduction. Masked tokens never enter the
/// sum or the token count; a fully masked trajectory contributes zero.
double masked_grpo_loss(std::span<const TokenTrajectory> group,
                        const Eigen::Ref<const Eigen::VectorXd>& advantages,
                        const ToyPolicy& policy, const LossOptions& options = {});

/// Analytic gradient of masked_grpo_loss with respect to every logit.
Eigen::MatrixXd loss_gradient(std::span<const TokenTrajectory> group,
                              const Eigen::Ref<const Eigen::VectorXd>& advantages,
                              const ToyPolicy& policy, const LossOptions& options = {});

}  // namespace prefix_sampling
