#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "prefix_sampling/errors.hpp"
#include "prefix_sampling/prefix_controller.hpp"

namespace ps = prefix_sampling;

namespace {

struct Fixture {
  ps::RolloutGroup group;
  std::vector<ps::Trajectory> trajectories;
};

Fixture fresh_group(std::vector<std::uint8_t> rewards, ps::TaskId id = 3) {
  Fixture f;
  f.group.task_id = id;
  f.group.rewards = rewards;
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    ps::Trajectory tr;
    tr.handle = i;
    tr.success = rewards[i] == 1;
    for (int t = 0; t < 5; ++t) tr.steps.push_back(100 * i + t);
    f.trajectories.push_back(tr);
  }
  return f;
}

const ps::Bucket kHard1 = ps::classify_bucket(1, 8);
const ps::Bucket kHard2 = ps::classify_bucket(2, 8);
const ps::Bucket kEasy6 = ps::classify_bucket(6, 8);
const ps::Bucket kEasy7 = ps::classify_bucket(7, 8);

}  // namespace

TEST(SelectPrefix, HardBucketKeepsFirstSuccess) {
  const auto f = fresh_group({0, 0, 1, 0, 1, 0, 0, 0});
  const auto rec = ps::select_prefix(f.group, f.trajectories);
  ASSERT_TRUE(rec);
  EXPECT_EQ(rec->outcome, ps::Outcome::Success);
  EXPECT_EQ(rec->source_bucket, kHard2);
  EXPECT_EQ(rec->steps, f.trajectories[2].steps);
  EXPECT_EQ(rec->task_id, 3u);
}

TEST(SelectPrefix, EasyBucketKeepsFirstFailure) {
  const auto f = fresh_group({1, 1, 1, 1, 1, 0, 1, 1});
  const auto rec = ps::select_prefix(f.group, f.trajectories);
  ASSERT_TRUE(rec);
  EXPECT_EQ(rec->outcome, ps::Outcome::Failure);
  EXPECT_EQ(rec->source_bucket, kEasy7);
  EXPECT_EQ(rec->steps, f.trajectories[5].steps);
}

TEST(SelectPrefix, BalancedGroupNeedsNoReplay) {
  const auto f = fresh_group({1, 1, 1, 1, 0, 0, 0, 0});
  EXPECT_FALSE(ps::select_prefix(f.group, f.trajectories));
}

TEST(SelectPrefix, ContractViolations) {
  const auto degenerate = fresh_group({0, 0, 0, 0, 0, 0, 0, 0});
  EXPECT_THROW(ps::select_prefix(degenerate.group, degenerate.trajectories), ps::ContractViolation);

  auto reroll = fresh_group({1, 0, 0, 0, 0, 0, 0, 0});
  reroll.group.origin = ps::Origin::Rerollout;
  reroll.group.parent_bucket = kHard1;
  EXPECT_THROW(ps::select_prefix(reroll.group, reroll.trajectories), ps::ContractViolation);

  auto mismatched = fresh_group({1, 0, 0, 0, 0, 0, 0, 0});
  mismatched.trajectories.pop_back();
  EXPECT_THROW(ps::select_prefix(mismatched.group, mismatched.trajectories),
               ps::ContractViolation);
}

TEST(ReplayBoundary, FloorAndClamp) {
  EXPECT_EQ(ps::replay_boundary(0.5, 10), 5);
  EXPECT_EQ(ps::replay_boundary(0.5, 7), 3);
  EXPECT_EQ(ps::replay_boundary(0.05, 4), 1);
  EXPECT_EQ(ps::replay_boundary(0.95, 4), 3);
  EXPECT_EQ(ps::replay_boundary(0.95, 2), 1);
  EXPECT_FALSE(ps::replay_boundary(0.5, 1));
  EXPECT_THROW(ps::replay_boundary(0.5, 0), ps::DomainError);
  EXPECT_THROW(ps::replay_boundary(1.5, 5), ps::DomainError);
}

TEST(ReplayBoundary, AlwaysLeavesReplayedAndFreshSteps) {
  for (int t = 2; t <= 200; ++t) {
    for (int i = 1; i <= 19; ++i) {
      const double r = 0.05 * i;
      const int m = *ps::replay_boundary(r, t);
      EXPECT_GE(m, 1);
      EXPECT_LE(m, t - 1);
      const int floor_m = static_cast<int>(std::floor(r * t));
      if (floor_m >= 1 && floor_m <= t - 1) EXPECT_EQ(m, floor_m);
    }
  }
}

TEST(UpdateController, HardBucketAboveDeadzoneLowersRatio) {
  ps::BucketControllerState s = ps::initial_state(kHard1);
  s.ema = 0.60;
  const auto next = ps::update_controller(s, 0.60);  // EMA stays at 0.60
  EXPECT_NEAR(next.ema, 0.60, 1e-15);
  EXPECT_NEAR(next.ratio, 0.45, 1e-12);
  EXPECT_EQ(next.cooldown_remaining, 5);
  EXPECT_EQ(next.updates_seen, 1);
}

TEST(UpdateController, DirectionsPerBucketSide) {
  for (const auto& b : {kHard1, kHard2, kEasy6, kEasy7}) {
    const bool hard = b.cls == ps::BucketClass::Hard;
    ps::BucketControllerState high = ps::initial_state(b);
    high.ema = 0.9;
    EXPECT_NEAR(ps::update_controller(high, 0.9).ratio, hard ? 0.45 : 0.55, 1e-12);
    ps::BucketControllerState low = ps::initial_state(b);
    low.ema = 0.1;
    EXPECT_NEAR(ps::update_controller(low, 0.1).ratio, hard ? 0.55 : 0.45, 1e-12);
  }
}

TEST(UpdateController, FixedPointInsideDeadzone) {
  ps::BucketControllerState s = ps::initial_state(kHard2);
  s.ema = 0.52;
  auto next = ps::update_controller(s, 0.52);
  EXPECT_EQ(next.ema, s.ema);
  EXPECT_EQ(next.ratio, s.ratio);
  EXPECT_EQ(next.cooldown_remaining, 0);
  EXPECT_EQ(next.updates_seen, 1);
}

TEST(UpdateController, EmaHalfCrossing) {
  ps::BucketControllerState s = ps::initial_state(kEasy6);
  s.ema = 1.0;
  for (int u = 1; u <= 13; ++u) s = ps::update_controller(s, 0.0);
  EXPECT_NEAR(s.ema, std::pow(0.95, 13), 1e-12);
  EXPECT_GT(s.ema, 0.5);
  s = ps::update_controller(s, 0.0);
  EXPECT_LT(s.ema, 0.5);
}

TEST(UpdateController, ClampsAtBounds) {
  ps::BucketControllerState s = ps::initial_state(kHard1);
  s.ratio = 0.07;
  s.ema = 0.9;
  const auto next = ps::update_controller(s, 0.9);
  EXPECT_DOUBLE_EQ(next.ratio, 0.05);

  // Already at the bound: no change, no cooldown.
  const auto pinned = ps::update_controller(next, 0.9);
  EXPECT_EQ(pinned.cooldown_remaining, next.cooldown_remaining - 1);
  auto at_bound = next;
  at_bound.cooldown_remaining = 0;
  const auto stay = ps::update_controller(at_bound, 0.9);
  EXPECT_DOUBLE_EQ(stay.ratio, 0.05);
  EXPECT_EQ(stay.cooldown_remaining, 0);
}

TEST(UpdateController, CooldownBlocksAndCountsDown) {
  ps::BucketControllerState s = ps::initial_state(kHard1);
  s.ema = 0.0;
  s = ps::update_controller(s, 0.0);
  EXPECT_NEAR(s.ratio, 0.55, 1e-12);
  for (int i = 5; i >= 1; --i) {
    EXPECT_EQ(s.cooldown_remaining, i);
    s = ps::update_controller(s, 0.0);
    EXPECT_NEAR(s.ratio, 0.55, 1e-12);
  }
  EXPECT_EQ(s.cooldown_remaining, 0);
  s = ps::update_controller(s, 0.0);
  EXPECT_NEAR(s.ratio, 0.60, 1e-12);
}

TEST(UpdateController, Errors) {
  const auto s = ps::initial_state(kHard1);
  EXPECT_THROW(ps::update_controller(s, 1.2), ps::DomainError);
  EXPECT_THROW(ps::update_controller(s, -0.1), ps::DomainError);
  EXPECT_THROW(ps::update_controller(ps::initial_state(ps::classify_bucket(4, 8)), 0.5),
               ps::ContractViolation);
}

TEST(UpdateController, RandomizedInvariants) {
  const ps::ControllerParams params;
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (const auto& b : {kHard1, kHard2, kEasy6, kEasy7}) {
    for (int seq = 0; seq < 2000; ++seq) {
      // Biased inputs push the EMA out of the deadzone often enough to
      // exercise adjustments in both directions.
      const double bias = unit(rng);
      auto s = ps::initial_state(b);
      int last_change = -100;
      for (int u = 0; u < 80; ++u) {
        const double obs = unit(rng) < bias ? 1.0 : 0.0;
        const auto next = ps::update_controller(s, obs, params);
        EXPECT_NEAR(std::abs(next.ema - obs), 0.95 * std::abs(s.ema - obs), 1e-12);
        ASSERT_GE(next.ratio, params.ratio_min);
        ASSERT_LE(next.ratio, params.ratio_max);
        ASSERT_LE(next.cooldown_remaining, params.cooldown);
        const bool in_deadzone = std::abs(next.ema - 0.5) <= params.deadzone;
        if (in_deadzone) ASSERT_EQ(next.ratio, s.ratio);
        if (next.ratio != s.ratio) {
          ASSERT_GT(u - last_change, params.cooldown);
          const double delta = next.ratio - s.ratio;
          const bool raises_pass_rate = (b.cls == ps::BucketClass::Hard) == (delta > 0);
          ASSERT_EQ(raises_pass_rate, next.ema < 0.5);
          last_change = u;
        }
        s = next;
      }
    }
  }
}

TEST(UpdateController, StepCountedCooldown) {
  ps::ControllerParams params;
  params.cooldown_unit = ps::CooldownUnit::TrainingSteps;
  ps::AdaptiveController ctl(8, params);
  for (int i = 0; i < 3; ++i) ctl.observe(kHard1, 0.0);
  // First update changes the ratio; further updates in the same step do not
  // consume the cooldown.
  EXPECT_EQ(ctl.state(kHard1).cooldown_remaining, 5);
  ctl.end_step();
  EXPECT_EQ(ctl.state(kHard1).cooldown_remaining, 4);
}

TEST(AdaptiveController, BucketsAreIndependent) {
  ps::AdaptiveController ctl(8, {});
  EXPECT_EQ(ctl.buckets(), (std::vector<ps::Bucket>{kHard1, kHard2, kEasy6, kEasy7}));
  const auto before = ctl.state(kHard2);
  for (int i = 0; i < 30; ++i) ctl.observe(kHard1, 0.0);
  EXPECT_EQ(ctl.state(kHard2), before);
  EXPECT_EQ(ctl.state(kEasy6), ps::initial_state(kEasy6));
  EXPECT_GT(ctl.ratio(kHard1), 0.5);
  EXPECT_THROW(ctl.observe(ps::classify_bucket(4, 8), 0.5), ps::ContractViolation);
}

TEST(AdaptiveController, HardOnlyDisablesEasyBuckets) {
  ps::AdaptiveController ctl(8, {}, /*easy_enabled=*/false);
  EXPECT_TRUE(ctl.controls(kHard1));
  EXPECT_FALSE(ctl.controls(kEasy7));
  EXPECT_EQ(ctl.buckets().size(), 2u);
}

TEST(PrefixPool, NewestWinsAndConsumeOnce) {
  ps::PrefixPool pool;
  pool.save({5, kHard1, ps::Outcome::Success, {1, 2, 3}});
  pool.save({5, kHard1, ps::Outcome::Success, {7, 8, 9}});
  pool.save({2, kEasy6, ps::Outcome::Failure, {4, 5}});
  EXPECT_EQ(pool.size(), 2u);
  const auto rec = pool.consume(5, kHard1);
  ASSERT_TRUE(rec);
  EXPECT_EQ(rec->steps, (std::vector<ps::StepId>{7, 8, 9}));
  EXPECT_FALSE(pool.consume(5, kHard1));

  pool.save({1, kHard2, ps::Outcome::Success, {6, 6}});
  const auto drained = pool.drain();
  ASSERT_EQ(drained.size(), 2u);
  EXPECT_EQ(drained[0].task_id, 1u);
  EXPECT_EQ(drained[1].task_id, 2u);
  EXPECT_TRUE(pool.empty());
}

TEST(PrefixPoolMemory, DeploymentSizes) {
  EXPECT_NEAR(ps::to_mebibytes(ps::prefix_pool_memory_bound(128, 2048, 16384)), 8.6, 0.05);
  EXPECT_NEAR(ps::to_mebibytes(ps::prefix_pool_memory_bound(64, 4096, 32768)), 8.6, 0.05);
  EXPECT_NEAR(ps::to_mebibytes(ps::prefix_pool_memory_bound(64, 4096, 65536)), 16.2, 0.05);
  EXPECT_EQ(ps::prefix_pool_memory_bound(0, 4096, 65536), 0.0);
  EXPECT_DOUBLE_EQ(ps::prefix_pool_memory_bound(1, 10, 100), (10 + 95) * 4.0);
}
