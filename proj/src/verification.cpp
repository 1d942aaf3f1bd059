#include "prefix_sampling/verification.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "prefix_sampling/advantage_masking.hpp"
#include "prefix_sampling/prefix_controller.hpp"
#include "prefix_sampling/signal_math.hpp"

namespace prefix_sampling {

namespace {

std::string str(double x) {
  std::ostringstream os;
  os.precision(10);
  os << x;
  return os.str();
}

CheckResult near(std::string name, double got, double want, double tol) {
  const bool ok = std::abs(got - want) <= tol;
  return {std::move(name), ok, "got " + str(got) + ", want " + str(want) + " +- " + str(tol)};
}

std::vector<std::uint8_t> rewards_with(int k, int n) {
  std::vector<std::uint8_t> r(n, 0);
  std::fill_n(r.begin(), k, std::uint8_t{1});
  return r;
}

}  // namespace

std::vector<CheckResult> check_signal_landmarks() {
  std::vector<CheckResult> out;
  out.push_back(near("entropy H(0.5)", reward_entropy(0.5), 1.0, 1e-12));
  out.push_back(near("entropy H(0.25)", reward_entropy(0.25), 0.8113, 1e-4));
  out.push_back(near("entropy H(0.125)", reward_entropy(0.125), 0.5436, 1e-4));
  out.push_back(near("survival S_8(0.5)", group_survival_probability(0.5, 8), 0.9922, 1e-4));
  out.push_back(near("survival S_8(0.25)", group_survival_probability(0.25, 8), 0.8999, 1e-4));
  out.push_back(near("survival S_8(0.125)", group_survival_probability(0.125, 8), 0.6564, 1e-4));
  out.push_back(near("RLOO energy k=4", rloo_advantage_energy(4, 8), 16.0 / 49.0, 1e-12));
  out.push_back(near("RLOO energy k=2", rloo_advantage_energy(2, 8), 12.0 / 49.0, 1e-12));
  out.push_back(near("RLOO energy k=1", rloo_advantage_energy(1, 8), 7.0 / 49.0, 1e-12));
  const int pairs[] = {0, 7, 12, 15, 16, 15, 12, 7, 0};
  bool ok = true;
  for (int k = 0; k <= 8; ++k) ok = ok && contrastive_pair_count(k, 8) == pairs[k];
  out.push_back({"pair counts N=8", ok, "{0,7,12,15,16,15,12,7,0}"});
  return out;
}

std::vector<CheckResult> check_advantage_oracles(int max_group_size) {
  double worst_energy = 0.0, worst_variance = 0.0;
  for (int n = 2; n <= max_group_size; ++n) {
    for (int k = 0; k <= n; ++k) {
      const auto r = rewards_with(k, n);
      const Eigen::VectorXd a = rloo_advantages(r);
      worst_energy = std::max(worst_energy,
                              std::abs(a.squaredNorm() / n - rloo_advantage_energy(k, n)));
      const Eigen::VectorXd c = mean_centered_advantages(r);
      const double mean = c.mean();
      const double var = (c.array() - mean).square().mean();
      worst_variance =
          std::max(worst_variance, std::abs(var - mean_centered_advantage_variance(k, n)));
    }
  }
  return {{"RLOO energy = mean squared advantage (N<=" + std::to_string(max_group_size) + ")",
           worst_energy <= 1e-12, "max abs error " + str(worst_energy)},
          {"centered variance = p(1-p) (N<=" + std::to_string(max_group_size) + ")",
           worst_variance <= 1e-12, "max abs error " + str(worst_variance)}};
}

std::vector<CheckResult> check_survival_monte_carlo(long long groups, std::uint64_t seed) {
  std::vector<CheckResult> out;
  std::mt19937_64 rng(seed);
  constexpr int n = 8;
  for (double p : {0.125, 0.25, 0.5}) {
    std::binomial_distribution<int> draw(n, p);
    long long survived = 0;
    double pairs = 0.0;
    for (long long g = 0; g < groups; ++g) {
      const int k = draw(rng);
      survived += (k > 0 && k < n);
      pairs += static_cast<double>(k) * (n - k);
    }
    const double s = group_survival_probability(p, n);
    const double se = std::sqrt(s * (1.0 - s) / static_cast<double>(groups));
    out.push_back(near("MC survival p=" + str(p), static_cast<double>(survived) / groups, s, 3 * se));
    out.push_back(near("MC E[K(N-K)] p=" + str(p), pairs / groups, expected_pair_count(p, n), 0.05));
  }
  return out;
}

std::vector<CheckResult> check_gradient_finite_differences(int instances, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double worst = 0.0;
  bool masked_zero = true;
  for (int inst = 0; inst < instances; ++inst) {
    const int vocab = 3 + static_cast<int>(rng() % 4);
    const int per_class = 2;
    const int classes = 4;
    ToyPolicy policy{Eigen::MatrixXd(classes, vocab), per_class};
    for (int i = 0; i < classes; ++i)
      for (int j = 0; j < vocab; ++j) policy.logits(i, j) = gauss(rng);

    const int n = 2 + static_cast<int>(rng() % 5);
    // Every prefix covers class 0 entirely, so its gradient row must vanish.
    const int length = 2 * per_class + 1 + static_cast<int>(rng() % 6);
    std::vector<TokenTrajectory> group;
    std::vector<std::uint8_t> rewards;
    for (int i = 0; i < n; ++i) {
      std::vector<int> toks(length);
      for (int& t : toks) t = static_cast<int>(rng() % vocab);
      const int t_cont = per_class + static_cast<int>(rng() % (length - per_class + 1));
      group.push_back(apply_prefix_mask(make_token_trajectory(std::move(toks)), t_cont));
      rewards.push_back(static_cast<std::uint8_t>(rng() % 2));
    }
    const Eigen::VectorXd adv = rloo_advantages(rewards);
    LossOptions opts;
    opts.normalization = inst % 2 ? LengthNormalization::TokenMean : LengthNormalization::None;
    opts.reduction = inst % 3 ? GroupReduction::Sum : GroupReduction::Mean;

    const Eigen::MatrixXd g = loss_gradient(group, adv, policy, opts);
    masked_zero = masked_zero && (g.row(0).array() == 0.0).all();
    constexpr double h = 1e-5;
    for (int i = 0; i < classes; ++i) {
      for (int j = 0; j < vocab; ++j) {
        ToyPolicy plus = policy, minus = policy;
        plus.logits(i, j) += h;
        minus.logits(i, j) -= h;
        const double fd = (masked_grpo_loss(group, adv, plus, opts) -
                           masked_grpo_loss(group, adv, minus, opts)) /
                          (2 * h);
        const double scale = std::max({std::abs(fd), std::abs(g(i, j)), 1e-3});
        worst = std::max(worst, std::abs(fd - g(i, j)) / scale);
      }
    }
  }
  return {{"gradient vs central differences (" + std::to_string(instances) + " instances)",
           worst <= 1e-4, "max relative error " + str(worst)},
          {"prefix-only context rows have zero gradient", masked_zero, ""}};
}

std::vector<CheckResult> check_controller(int sequences, std::uint64_t seed) {
  std::vector<CheckResult> out;
  const ControllerParams params;
  const Bucket hard = classify_bucket(1, 8);

  BucketControllerState s = initial_state(hard, params);
  s.ema = 1.0;
  int crossing = 0;
  for (int u = 1; u <= 100 && crossing == 0; ++u) {
    s = update_controller(s, 0.0, params);
    if (s.ema < 0.5) crossing = u;
  }
  out.push_back({"EMA half crossing between updates 13 and 14", crossing == 14,
                 "first update below 0.5: " + std::to_string(crossing)});

  // Each sequence draws its own success probability so that some walk the
  // ratio into a bound and stay there.
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  bool bounds = true, cooldown = true, deadzone = true, direction = true, liveness = true;
  long long clamped = 0;
  for (int seq = 0; seq < sequences; ++seq) {
    const double q = unit(rng);
    for (int kk : {1, 2, 6, 7}) {
      const Bucket b = classify_bucket(kk, 8);
      const double sign = b.cls == BucketClass::Hard ? 1.0 : -1.0;
      BucketControllerState st = initial_state(b, params);
      int last_change = -1000;
      for (int u = 0; u < 60; ++u) {
        const double observed =
            std::binomial_distribution<int>(8, q)(rng) / 8.0;
        const auto next = update_controller(st, observed, params);
        const double high = params.target + params.deadzone, low = params.target - params.deadzone;
        if (next.ratio != st.ratio) {
          cooldown = cooldown && (u - last_change) > params.cooldown;
          last_change = u;
          deadzone = deadzone && (next.ema > high || next.ema < low);
          const double want = next.ema > high ? -1.0 : 1.0;  // desired pass-rate move
          direction = direction && (next.ratio - st.ratio) * sign * want > 0.0 &&
                      std::abs(next.ratio - st.ratio) <= params.step + 1e-12;
        } else if (st.cooldown_remaining == 0 && (next.ema > high || next.ema < low)) {
          // Outside the band with no cooldown, only a bound may stop the move.
          const double target_ratio =
              st.ratio + sign * (next.ema > high ? -1.0 : 1.0) * params.step;
          const bool at_bound =
              target_ratio < params.ratio_min || target_ratio > params.ratio_max;
          liveness = liveness && at_bound && st.ratio == std::clamp(target_ratio, params.ratio_min,
                                                                     params.ratio_max);
          clamped += at_bound;
        }
        bounds = bounds && next.ratio >= params.ratio_min && next.ratio <= params.ratio_max;
        st = next;
      }
    }
  }
  const std::string per_bucket = std::to_string(sequences) + " sequences per bucket";
  out.push_back({"ratio bounds hold", bounds && clamped > 0,
                 per_bucket + ", " + std::to_string(clamped) + " clamped updates"});
  out.push_back({"at least cooldown updates between ratio changes", cooldown, per_bucket});
  out.push_back({"no ratio change inside the deadzone", deadzone, per_bucket});
  out.push_back({"ratio moves by one step toward the target", direction, per_bucket});
  out.push_back({"outside the deadzone the ratio moves unless cooling down or clamped", liveness,
                 per_bucket});
  return out;
}

std::vector<CheckResult> check_memory_bounds() {
  return {near("prefix pool (128, 2048, 16384)", to_mebibytes(prefix_pool_memory_bound(128, 2048, 16384)),
               8.6, 0.05),
          near("prefix pool (64, 4096, 32768)", to_mebibytes(prefix_pool_memory_bound(64, 4096, 32768)),
               8.6, 0.05),
          near("prefix pool (64, 4096, 65536)", to_mebibytes(prefix_pool_memory_bound(64, 4096, 65536)),
               16.2, 0.05)};
}

std::vector<CheckResult> run_all_checks() {
  std::vector<CheckResult> all;
  for (auto&& batch : {check_signal_landmarks(), check_advantage_oracles(),
                       check_survival_monte_carlo(), check_gradient_finite_differences(),
                       check_controller(), check_memory_bounds()})
    all.insert(all.end(), batch.begin(), batch.end());
  return all;
}

}  // namespace prefix_sampling
