#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "prefix_sampling/errors.hpp"
#include "prefix_sampling/signal_math.hpp"

namespace ps = prefix_sampling;

TEST(RewardEntropy, Landmarks) {
  EXPECT_DOUBLE_EQ(ps::reward_entropy(0.5), 1.0);
  EXPECT_NEAR(ps::reward_entropy(0.25), 0.8113, 1e-4);
  EXPECT_NEAR(ps::reward_entropy(0.125), 0.5436, 1e-4);
  EXPECT_EQ(ps::reward_entropy(0.0), 0.0);
  EXPECT_EQ(ps::reward_entropy(1.0), 0.0);
}

TEST(RewardEntropy, RejectsOutOfRange) {
  EXPECT_THROW(ps::reward_entropy(-0.1), ps::DomainError);
  EXPECT_THROW(ps::reward_entropy(1.5), ps::DomainError);
  EXPECT_THROW(ps::reward_entropy(std::nan("")), ps::DomainError);
}

TEST(RewardEntropy, TemplatedOnScalar) {
  EXPECT_NEAR(ps::reward_entropy(0.25f), 0.8113f, 1e-4f);
  EXPECT_NEAR(static_cast<double>(ps::reward_entropy(0.125L)), 0.5436, 1e-4);
}

TEST(GroupSurvival, Landmarks) {
  EXPECT_NEAR(ps::group_survival_probability(0.5, 8), 0.9922, 1e-4);
  EXPECT_NEAR(ps::group_survival_probability(0.25, 8), 0.8999, 1e-4);
  EXPECT_NEAR(ps::group_survival_probability(0.125, 8), 0.6564, 1e-4);
  EXPECT_EQ(ps::group_survival_probability(0.0, 8), 0.0);
  EXPECT_THROW(ps::group_survival_probability(0.5, 0), ps::DomainError);
  EXPECT_THROW(ps::group_survival_probability(1.1, 8), ps::DomainError);
}

TEST(RlooEnergy, ReferenceValues) {
  EXPECT_NEAR(ps::rloo_advantage_energy(4, 8), 16.0 / 49.0, 1e-12);
  EXPECT_NEAR(ps::rloo_advantage_energy(2, 8), 12.0 / 49.0, 1e-12);
  EXPECT_NEAR(ps::rloo_advantage_energy(1, 8), 7.0 / 49.0, 1e-12);
  EXPECT_EQ(ps::rloo_advantage_energy(0, 8), 0.0);
  EXPECT_THROW(ps::rloo_advantage_energy(9, 8), ps::DomainError);
  EXPECT_THROW(ps::rloo_advantage_energy(-1, 8), ps::DomainError);
}

TEST(ContrastivePairs, TableForEightRollouts) {
  const long long expected[] = {0, 7, 12, 15, 16, 15, 12, 7, 0};
  const double relative[] = {0.00, 0.44, 0.75, 0.94, 1.00, 0.94, 0.75, 0.44, 0.00};
  for (int k = 0; k <= 8; ++k) {
    EXPECT_EQ(ps::contrastive_pair_count(k, 8), expected[k]) << k;
    EXPECT_NEAR(ps::signal_report(k, 8).pair_count_relative, relative[k], 0.005) << k;
  }
  EXPECT_THROW(ps::contrastive_pair_count(9, 8), ps::DomainError);
}

TEST(ExpectedPairCount, MatchesMonteCarloMean) {
  std::mt19937_64 rng(2024);
  for (double p : {0.5, 0.25}) {
    std::binomial_distribution<int> draw(8, p);
    double sum = 0.0;
    constexpr int kDraws = 1'000'000;
    for (int i = 0; i < kDraws; ++i) {
      const int k = draw(rng);
      sum += k * (8 - k);
    }
    EXPECT_NEAR(ps::expected_pair_count(p, 8), sum / kDraws, 0.05) << p;
  }
  EXPECT_DOUBLE_EQ(ps::expected_pair_count(0.5, 8), 14.0);
  EXPECT_DOUBLE_EQ(ps::expected_pair_count(0.25, 8), 10.5);
  EXPECT_EQ(ps::expected_pair_count(0.0, 8), 0.0);
  EXPECT_THROW(ps::expected_pair_count(0.5, 1), ps::DomainError);
}

TEST(CenteredVariance, BruteForce) {
  for (int n = 1; n <= 12; ++n) {
    for (int k = 0; k <= n; ++k) {
      const double mean = static_cast<double>(k) / n;
      double sq = 0.0;
      for (int i = 0; i < n; ++i) {
        const double a = (i < k ? 1.0 : 0.0) - mean;
        sq += a * a;
      }
      EXPECT_NEAR(ps::mean_centered_advantage_variance(k, n), sq / n, 1e-12);
    }
  }
  EXPECT_DOUBLE_EQ(ps::mean_centered_advantage_variance(4, 8), 0.25);
  EXPECT_DOUBLE_EQ(ps::mean_centered_advantage_variance(2, 8), 0.1875);
  EXPECT_EQ(ps::mean_centered_advantage_variance(0, 8), 0.0);
}

TEST(SignalReport, BalancedSkewedAndDegenerate) {
  const auto balanced = ps::signal_report(4, 8);
  EXPECT_DOUBLE_EQ(balanced.entropy_bits, 1.0);
  EXPECT_NEAR(balanced.survival_prob, 0.9922, 1e-4);
  EXPECT_NEAR(balanced.rloo_energy, 16.0 / 49.0, 1e-12);
  EXPECT_EQ(balanced.pair_count, 16);
  EXPECT_DOUBLE_EQ(balanced.pair_count_relative, 1.0);

  const auto full = ps::signal_report(8, 8);
  EXPECT_EQ(full.entropy_bits, 0.0);
  EXPECT_EQ(full.rloo_energy, 0.0);
  EXPECT_EQ(full.pair_count, 0);

  const auto two = ps::signal_report(2, 8);
  EXPECT_NEAR(two.entropy_bits, 0.8113, 1e-4);
  EXPECT_NEAR(two.rloo_energy, 12.0 / 49.0, 1e-12);
  EXPECT_EQ(two.pair_count, 12);
  EXPECT_DOUBLE_EQ(two.pair_count_relative, 0.75);

  EXPECT_THROW(ps::signal_report(1, 1), ps::DomainError);
}

TEST(SignalReport, SymmetricInPassCount) {
  for (int n = 2; n <= 16; ++n) {
    for (int k = 0; k <= n; ++k) {
      const auto a = ps::signal_report(k, n);
      const auto b = ps::signal_report(n - k, n);
      EXPECT_NEAR(a.entropy_bits, b.entropy_bits, 1e-12);
      EXPECT_NEAR(a.survival_prob, b.survival_prob, 1e-12);
      EXPECT_EQ(a.rloo_energy, b.rloo_energy);
      EXPECT_EQ(a.pair_count, b.pair_count);
    }
  }
}

TEST(SignalQuantities, UniqueMaximumAtHalf) {
  for (int n = 2; n <= 16; n += 2) {
    for (int k = 0; k <= n; ++k) {
      if (k == n / 2) continue;
      EXPECT_LT(ps::rloo_advantage_energy(k, n), ps::rloo_advantage_energy(n / 2, n));
      EXPECT_LT(ps::contrastive_pair_count(k, n), ps::contrastive_pair_count(n / 2, n));
    }
  }
  for (int i = 1; i <= 99; ++i) {
    if (i == 50) continue;
    const double p = i / 100.0;
    EXPECT_LT(ps::reward_entropy(p), ps::reward_entropy(0.5));
    EXPECT_LT(ps::group_survival_probability(p, 8), ps::group_survival_probability(0.5, 8));
    EXPECT_LT(ps::expected_pair_count(p, 8), ps::expected_pair_count(0.5, 8));
  }
}
