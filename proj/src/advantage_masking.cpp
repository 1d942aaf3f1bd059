#include "prefix_sampling/advantage_masking.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "prefix_sampling/errors.hpp"

namespace prefix_sampling {

namespace {

int count_successes(std::span<const std::uint8_t> rewards) {
  int k = 0;
  for (auto r : rewards) {
    if (r > 1) throw DomainError("advantages: rewards must be binary");
    k += r;
  }
  return k;
}

void check_group(std::span<const TokenTrajectory> group, Eigen::Index n_advantages,
                 const ToyPolicy& policy) {
  if (group.empty()) throw DomainError("masked_grpo_loss: empty group");
  if (static_cast<Eigen::Index>(group.size()) != n_advantages)
    throw DomainError("masked_grpo_loss: one advantage per trajectory required");
  for (const auto& tr : group) {
    if (tr.response_mask.size() != tr.token_ids.size())
      throw DomainError("masked_grpo_loss: mask length differs from token count");
    for (int tok : tr.token_ids)
      if (tok < 0 || tok >= policy.vocabulary())
        throw DomainError("masked_grpo_loss: token id outside vocabulary");
  }
}

// Common scale applied to the raw advantage-weighted log-likelihood sum.
double loss_scale(std::span<const TokenTrajectory> group, const LossOptions& options) {
  double scale = 1.0;
  if (options.normalization == LengthNormalization::TokenMean) {
    int tokens = 0;
    for (const auto& tr : group) tokens += tr.trainable_tokens();
    if (tokens == 0) return 0.0;
    scale /= tokens;
  }
  if (options.reduction == GroupReduction::Mean) scale /= static_cast<double>(group.size());
  return scale;
}

}  // namespace

Eigen::VectorXd rloo_advantages(std::span<const std::uint8_t> rewards) {
  const int n = static_cast<int>(rewards.size());
  if (n < 2) throw DomainError("rloo_advantages: need at least two rollouts");
  const int k = count_successes(rewards);
  const double win = static_cast<double>(n - k) / (n - 1);
  const double loss = -static_cast<double>(k) / (n - 1);
  Eigen::VectorXd a(n);
  for (int i = 0; i < n; ++i) a[i] = rewards[i] ? win : loss;
  return a;
}

Eigen::VectorXd mean_centered_advantages(std::span<const std::uint8_t> rewards) {
  const int n = static_cast<int>(rewards.size());
  if (n < 1) throw DomainError("mean_centered_advantages: empty group");
  const double p_hat = static_cast<double>(count_successes(rewards)) / n;
  Eigen::VectorXd a(n);
  for (int i = 0; i < n; ++i) a[i] = rewards[i] - p_hat;
  return a;
}

int TokenTrajectory::trainable_tokens() const {
  return static_cast<int>(std::count(response_mask.begin(), response_mask.end(), 1));
}

TokenTrajectory make_token_trajectory(std::vector<int> tokens) {
  TokenTrajectory tr;
  tr.response_mask.assign(tokens.size(), 1);
  tr.token_ids = std::move(tokens);
  return tr;
}

TokenTrajectory apply_prefix_mask(TokenTrajectory trajectory, int t_cont) {
  if (t_cont < 0 || t_cont > trajectory.size())
    throw DomainError("apply_prefix_mask: t_cont must lie in [0, length]");
  trajectory.t_cont = t_cont;
  trajectory.response_mask.assign(trajectory.token_ids.size(), 1);
  std::fill_n(trajectory.response_mask.begin(), t_cont, std::uint8_t{0});
  return trajectory;
}

int ToyPolicy::context_of(int position) const {
  return std::min(position / positions_per_class, context_classes() - 1);
}

Eigen::MatrixXd ToyPolicy::log_probabilities() const {
  const Eigen::VectorXd row_max = logits.rowwise().maxCoeff();
  Eigen::MatrixXd shifted = logits.colwise() - row_max;
  const Eigen::VectorXd log_z = shifted.array().exp().rowwise().sum().log().matrix();
  shifted.colwise() -= log_z;
  return shifted;
}

double masked_grpo_loss(std::span<const TokenTrajectory> group,
                        const Eigen::Ref<const Eigen::VectorXd>& advantages,
                        const ToyPolicy& policy, const LossOptions& options) {
  check_group(group, advantages.size(), policy);
  const double scale = loss_scale(group, options);
  if (scale == 0.0) return 0.0;

  const Eigen::MatrixXd log_pi = policy.log_probabilities();
  double total = 0.0;
  for (std::size_t i = 0; i < group.size(); ++i) {
    const auto& tr = group[i];
    double log_lik = 0.0;
    for (int t = 0; t < tr.size(); ++t)
      if (tr.response_mask[t]) log_lik += log_pi(policy.context_of(t), tr.token_ids[t]);
    total += advantages[static_cast<Eigen::Index>(i)] * log_lik;
  }
  return -scale * total;
}

Eigen::MatrixXd loss_gradient(std::span<const TokenTrajectory> group,
                              const Eigen::Ref<const Eigen::VectorXd>& advantages,
                              const ToyPolicy& policy, const LossOptions& options) {
  check_group(group, advantages.size(), policy);
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(policy.context_classes(), policy.vocabulary());
  const double scale = loss_scale(group, options);
  if (scale == 0.0) return grad;

  // d log softmax(z)_a / dz = onehot(a) - softmax(z), accumulated per class.
  const Eigen::MatrixXd pi = policy.log_probabilities().array().exp();
  for (std::size_t i = 0; i < group.size(); ++i) {
    const auto& tr = group[i];
    const double w = -scale * advantages[static_cast<Eigen::Index>(i)];
    if (w == 0.0) continue;
    for (int t = 0; t < tr.size(); ++t) {
      if (!tr.response_mask[t]) continue;
      const int c = policy.context_of(t);
      grad.row(c) -= w * pi.row(c);
      grad(c, tr.token_ids[t]) += w;
    }
  }
  return grad;
}

}  // namespace prefix_sampling
