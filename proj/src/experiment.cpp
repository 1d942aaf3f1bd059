#include "prefix_sampling/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>

#include "prefix_sampling/advantage_masking.hpp"
#include "prefix_sampling/env_sim.hpp"
#include "prefix_sampling/prefix_controller.hpp"
#include "prefix_sampling/random.hpp"
#include "prefix_sampling/signal_math.hpp"

namespace prefix_sampling {

namespace {

constexpr int kAuditVocabulary = 16;
constexpr int kAuditContextClasses = 4;
constexpr int kAuditPositionsPerClass = 16;

// Distinct task indices for one step, returned in ascending order.
std::vector<std::size_t> select_tasks(std::size_t population, int batch, std::uint64_t seed,
                                      int step) {
  std::vector<std::size_t> idx(population);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng = make_rng(seed, Stream::TaskSelection, {static_cast<std::uint64_t>(step)});
  for (int i = 0; i < batch; ++i) {
    std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(i), population - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(batch);
  std::sort(idx.begin(), idx.end());
  return idx;
}

TokenTrajectory to_tokens(const Trajectory& tr) {
  std::vector<int> tokens;
  tokens.reserve(tr.steps.size());
  for (StepId s : tr.steps) tokens.push_back(static_cast<int>(s % kAuditVocabulary));
  return apply_prefix_mask(make_token_trajectory(std::move(tokens)), tr.replay_boundary);
}

nlohmann::ordered_json group_record(const SampledGroup& sg) {
  auto j = to_json(sg.group);
  const int k = pass_count(sg.group);
  j["pass_count"] = k;
  j["bucket"] = classify_bucket(k, sg.group.size()).label();
  j["valid"] = !is_degenerate(sg.group);
  std::vector<int> lengths;
  for (const auto& tr : sg.trajectories) lengths.push_back(tr.length());
  j["lengths"] = lengths;
  j["replay_boundary"] = sg.trajectories.empty() ? 0 : sg.trajectories.front().replay_boundary;
  return j;
}

// Advantage and masked-surrogate audit of the mixed batch; no update is taken.
void audit_mixed_batch(const std::vector<const SampledGroup*>& mixed, const ToyPolicy& policy,
                       const LossOptions& loss, StepMetrics& m) {
  double energy = 0.0;
  for (const SampledGroup* sg : mixed) {
    const Eigen::VectorXd adv = rloo_advantages(sg->group.rewards);
    energy += adv.squaredNorm() / static_cast<double>(adv.size());
    std::vector<TokenTrajectory> tokens;
    tokens.reserve(sg->trajectories.size());
    for (const auto& tr : sg->trajectories) {
      tokens.push_back(to_tokens(tr));
      m.masked_steps += tr.replay_boundary;
      m.trainable_steps += tokens.back().trainable_tokens();
    }
    m.audit_loss += masked_grpo_loss(tokens, adv, policy, loss);
  }
  m.mean_rloo_energy =
      mixed.empty() ? std::numeric_limits<double>::quiet_NaN() : energy / mixed.size();
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& config) {
  validate(config);
  const int n = config.group_size;
  const auto tasks = make_task_population(config.population, config.seed);

  std::optional<AdaptiveController> controller;
  if (config.arm != Arm::Baseline)
    controller.emplace(n, effective_controller_params(config), config.arm != Arm::PSAdaHardOnly);

  RunResult result;
  result.group_size = n;
  if (controller) result.controlled_buckets = controller->buckets();
  const std::vector<Bucket> report_buckets = skewed_buckets(n);

  ToyPolicy audit_policy{Eigen::MatrixXd::Zero(kAuditContextClasses, kAuditVocabulary),
                         kAuditPositionsPerClass};

  PrefixPool pool;
  for (int step = 0; step < config.steps; ++step) {
    std::vector<SampledGroup> fresh;
    for (std::size_t t : select_tasks(tasks.size(), config.batch_size, config.seed, step))
      fresh.push_back(sample_fresh_group(tasks[t], n, config.seed, step));

    std::vector<PrefixRecord> to_replay;
    if (controller && config.schedule == RerolloutSchedule::NextStep) to_replay = pool.drain();
    if (controller) {
      for (const auto& sg : fresh) {
        if (is_degenerate(sg.group)) continue;
        if (!controller->controls(classify_bucket(pass_count(sg.group), n))) continue;
        if (auto rec = select_prefix(sg.group, sg.trajectories)) pool.save(std::move(*rec));
      }
      if (config.schedule == RerolloutSchedule::SameStep) to_replay = pool.drain();
    }

    // Rerollouts use the ratios in force at the start of the step; feedback
    // is applied afterwards in task order.
    std::vector<SampledGroup> rerollouts;
    for (const auto& rec : to_replay) {
      const auto m = replay_boundary(controller->ratio(rec.source_bucket), rec.length());
      if (!m) continue;
      rerollouts.push_back(
          sample_rerollout_group(tasks[rec.task_id], rec, *m, n, config.seed, step));
    }
    for (const auto& sg : rerollouts) {
      const int k = pass_count(sg.group);
      controller->observe(*sg.group.parent_bucket, static_cast<double>(k) / n);
      result.transitions.push_back({*sg.group.parent_bucket, k});
    }
    if (controller) {
      controller->end_step();
      for (const Bucket& b : result.controlled_buckets) {
        const auto& s = controller->state(b);
        result.controller_trace.push_back({step, b, s.ratio, s.ema, s.cooldown_remaining});
      }
    }

    std::vector<RolloutGroup> all;
    std::vector<const SampledGroup*> mixed;
    for (const auto* cohort : {&fresh, &rerollouts}) {
      for (const auto& sg : *cohort) {
        all.push_back(sg.group);
        if (!is_degenerate(sg.group)) mixed.push_back(&sg);
        result.group_records.push_back(group_record(sg));
      }
    }
    StepMetrics metrics = compute_step_metrics(all, report_buckets, step);
    audit_mixed_batch(mixed, audit_policy, config.loss, metrics);
    result.metrics.push_back(std::move(metrics));
  }

  result.transition_matrix = compute_transition_matrix(result.transitions, n);
  return result;
}

RunSummary summarize(const RunResult& run, int tail_steps) {
  RunSummary s;
  const double steps = static_cast<double>(run.metrics.size());
  if (run.metrics.empty()) return s;

  struct Pool {
    double groups = 0, degenerate = 0, band = 0, half = 0, distance = 0;
    void add(const CohortMetrics& c) {
      if (c.groups == 0) return;
      groups += c.groups;
      degenerate += c.degenerate_share * c.groups;
      band += c.target_band_share * c.groups;
      half += c.exact_half_share * c.groups;
      distance += c.mean_distance * c.groups;
    }
    CohortMetrics finish() const {
      CohortMetrics c;
      c.groups = static_cast<int>(groups);
      c.valid = static_cast<int>(std::lround(groups - degenerate));
      const double nan = std::numeric_limits<double>::quiet_NaN();
      c.degenerate_share = groups > 0 ? degenerate / groups : nan;
      c.target_band_share = groups > 0 ? band / groups : nan;
      c.exact_half_share = groups > 0 ? half / groups : nan;
      c.mean_distance = groups > 0 ? distance / groups : nan;
      return c;
    }
  } fresh, reroll;

  std::map<Bucket, std::pair<double, double>> rate;  // (sum of rates * groups, groups)
  const int first_tail =
      tail_steps > 0 ? std::max(0, static_cast<int>(run.metrics.size()) - tail_steps) : 0;
  for (std::size_t i = 0; i < run.metrics.size(); ++i) {
    const auto& m = run.metrics[i];
    s.mean_valid_groups += m.valid_groups / steps;
    s.mean_fresh_valid += m.fresh.valid / steps;
    s.mean_rerollout_valid += m.rerollout.valid / steps;
    fresh.add(m.fresh);
    reroll.add(m.rerollout);
    if (static_cast<int>(i) < first_tail) continue;
    for (const auto& r : m.rerollout_pass_rate) {
      if (r.groups == 0) continue;
      rate[r.bucket].first += r.pass_rate * r.groups;
      rate[r.bucket].second += r.groups;
    }
  }
  s.fresh = fresh.finish();
  s.rerollout = reroll.finish();
  for (const auto& [b, acc] : rate) s.rerollout_pass_rate[b] = acc.first / acc.second;

  for (const auto& row : run.controller_trace) {
    s.final_ema[row.bucket] = row.ema;
    s.final_ratio[row.bucket] = row.ratio;
  }
  return s;
}

}  // namespace prefix_sampling
