#pragma once

// Reward-side signal quantities of a grouped binary-reward rollout.
//
// For a group of N rollouts with pass probability p and observed pass
// count k, four quantities measure how much learning signal the rewards
// carry:
//
//   H(p)       = -p log2 p - (1-p) log2 (1-p)      Bernoulli reward entropy
//   S_N(p)     = 1 - p^N - (1-p)^N                  Pr(group survives filtering)
//   E_RLOO(k)  = k (N-k) / (N-1)^2                  mean squared RLOO advantage
//   C(k)       = k (N-k)                            success/failure pairs
//
// The first two peak at p = 1/2, the last two at k = N/2.

#include <cmath>
#include <cstdint>
#include <string>

#include "prefix_sampling/errors.hpp"

namespace prefix_sampling {

namespace detail {

template <typename Scalar>
void require_probability(Scalar p, const char* what) {
  if (!(p >= Scalar(0) && p <= Scalar(1)))
    throw DomainError(std::string(what) + ": probability must lie in [0, 1]");
}

inline void require_count(int k, int n, int min_n, const char* what) {
  if (n < min_n)
    throw DomainError(std::string(what) + ": group size must be at least " +
                      std::to_string(min_n));
  if (k < 0 || k > n)
    throw DomainError(std::string(what) + ": pass count must lie in [0, N]");
}

}  // namespace detail

/// Bernoulli entropy in bits, with 0 log 0 = 0.
template <typename Scalar = double>
Scalar reward_entropy(Scalar p) {
  detail::require_probability(p, "reward_entropy");
  auto term = [](Scalar q) { return q > Scalar(0) ? -q * std::log2(q) : Scalar(0); };
  return term(p) + term(Scalar(1) - p);
}

/// Probability that a Binomial(N, p) group is neither all-fail nor all-pass.
template <typename Scalar = double>
Scalar group_survival_probability(Scalar p, int n) {
  detail::require_probability(p, "group_survival_probability");
  if (n < 1) throw DomainError("group_survival_probability: N must be at least 1");
  return Scalar(1) - std::pow(Scalar(1) - p, n) - std::pow(p, n);
}

template <typename Scalar = double>
Scalar rloo_advantage_energy(int k, int n) {
  detail::require_count(k, n, 2, "rloo_advantage_energy");
  const Scalar nm1 = Scalar(n - 1);
  return Scalar(k) * Scalar(n - k) / (nm1 * nm1);
}

inline std::int64_t contrastive_pair_count(int k, int n) {
  detail::require_count(k, n, 1, "contrastive_pair_count");
  return static_cast<std::int64_t>(k) * (n - k);
}

/// Largest pair count attainable at group size N, reached at k = floor(N/2).
inline std::int64_t max_contrastive_pair_count(int n) {
  return contrastive_pair_count(n / 2, n);
}

/// E[K (N-K)] for K ~ Binomial(N, p).
template <typename Scalar = double>
Scalar expected_pair_count(Scalar p, int n) {
  detail::require_probability(p, "expected_pair_count");
  if (n < 2) throw DomainError("expected_pair_count: N must be at least 2");
  return Scalar(n) * Scalar(n - 1) * p * (Scalar(1) - p);
}

/// Within-group variance of r_i - k/N.
template <typename Scalar = double>
Scalar mean_centered_advantage_variance(int k, int n) {
  detail::require_count(k, n, 1, "mean_centered_advantage_variance");
  const Scalar p_hat = Scalar(k) / Scalar(n);
  return p_hat * (Scalar(1) - p_hat);
}

/// All signal quantities for one observed group, evaluated at p_hat = k/N.
template <typename Scalar = double>
struct SignalReport {
  int pass_count = 0;
  int group_size = 0;
  Scalar entropy_bits = 0;
  Scalar survival_prob = 0;
  Scalar rloo_energy = 0;
  std::int64_t pair_count = 0;
  Scalar pair_count_relative = 0;
};

template <typename Scalar = double>
SignalReport<Scalar> signal_report(int k, int n) {
  detail::require_count(k, n, 2, "signal_report");
  const Scalar p_hat = Scalar(k) / Scalar(n);
  SignalReport<Scalar> r;
  r.pass_count = k;
  r.group_size = n;
  r.entropy_bits = reward_entropy(p_hat);
  r.survival_prob = group_survival_probability(p_hat, n);
  r.rloo_energy = rloo_advantage_energy<Scalar>(k, n);
  r.pair_count = contrastive_pair_count(k, n);
  r.pair_count_relative =
      Scalar(r.pair_count) / Scalar(max_contrastive_pair_count(n));
  return r;
}

}  // namespace prefix_sampling
