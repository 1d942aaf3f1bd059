#include "prefix_sampling/comparison.hpp"

#include <map>

#include "prefix_sampling/trace_io.hpp"

namespace prefix_sampling {

namespace {

constexpr Arm kArms[] = {Arm::Baseline, Arm::PSFix, Arm::PSAdaHardOnly, Arm::PSAda};

const char* replay_column(Arm a) { return a == Arm::Baseline ? "no" : "yes"; }
const char* adaptive_column(Arm a) {
  return a == Arm::PSAda || a == Arm::PSAdaHardOnly ? "yes" : "no";
}
const char* buckets_column(Arm a) {
  switch (a) {
    case Arm::Baseline: return "none";
    case Arm::PSAdaHardOnly: return "hard";
    default: return "all";
  }
}

void write_row(std::ostream& out, Arm arm, const std::string& seed, const RunSummary& s,
               const std::vector<Bucket>& buckets) {
  out << to_string(arm) << ',' << seed << ',' << replay_column(arm) << ',' << adaptive_column(arm)
      << ',' << buckets_column(arm) << ',' << format_real(s.mean_valid_groups) << ','
      << format_real(s.mean_fresh_valid) << ',' << format_real(s.mean_rerollout_valid) << ','
      << format_real(s.fresh.degenerate_share) << ',' << format_real(s.rerollout.degenerate_share)
      << ',' << format_real(s.fresh.target_band_share) << ','
      << format_real(s.rerollout.target_band_share) << ',' << format_real(s.fresh.mean_distance)
      << ',' << format_real(s.rerollout.mean_distance);
  for (const Bucket& b : buckets) {
    const auto it = s.rerollout_pass_rate.find(b);
    out << ',' << (it == s.rerollout_pass_rate.end() ? std::string{} : format_real(it->second));
  }
  out << '\n';
}

}  // namespace

std::vector<ComparisonRow> run_comparison(const ExperimentConfig& base,
                                          const std::vector<std::uint64_t>& seeds,
                                          const std::filesystem::path& out) {
  std::vector<ComparisonRow> rows;
  for (Arm arm : kArms) {
    for (std::uint64_t seed : seeds) {
      ExperimentConfig cfg = base;
      cfg.arm = arm;
      cfg.seed = seed;
      const RunResult run = run_experiment(cfg);
      if (!out.empty())
        emit_traces(run, out / to_string(arm) / ("seed_" + std::to_string(seed)));
      rows.push_back({arm, seed, summarize(run)});
    }
  }
  return rows;
}

void write_summary_csv(std::ostream& out, const std::vector<ComparisonRow>& rows, int group_size) {
  const auto buckets = skewed_buckets(group_size);
  out << "arm,seed,replay,adaptive,buckets,mean_valid_groups,mean_fresh_valid,"
         "mean_rerollout_valid,fresh_degenerate_share,rerollout_degenerate_share,"
         "fresh_target_band_share,rerollout_target_band_share,fresh_mean_distance,"
         "rerollout_mean_distance";
  for (const Bucket& b : buckets) out << ",rerollout_pass_rate_k" << b.pass_count;
  out << '\n';

  for (Arm arm : kArms) {
    RunSummary mean;
    std::map<Bucket, std::pair<double, int>> rate;
    int count = 0;
    for (const auto& r : rows) {
      if (r.arm != arm) continue;
      write_row(out, arm, std::to_string(r.seed), r.summary, buckets);
      ++count;
      const auto& s = r.summary;
      mean.mean_valid_groups += s.mean_valid_groups;
      mean.mean_fresh_valid += s.mean_fresh_valid;
      mean.mean_rerollout_valid += s.mean_rerollout_valid;
      mean.fresh.degenerate_share += s.fresh.degenerate_share;
      mean.rerollout.degenerate_share += s.rerollout.degenerate_share;
      mean.fresh.target_band_share += s.fresh.target_band_share;
      mean.rerollout.target_band_share += s.rerollout.target_band_share;
      mean.fresh.mean_distance += s.fresh.mean_distance;
      mean.rerollout.mean_distance += s.rerollout.mean_distance;
      for (const auto& [b, p] : s.rerollout_pass_rate) {
        rate[b].first += p;
        rate[b].second += 1;
      }
    }
    if (count == 0) continue;
    for (double* f : {&mean.mean_valid_groups, &mean.mean_fresh_valid, &mean.mean_rerollout_valid,
                      &mean.fresh.degenerate_share, &mean.rerollout.degenerate_share,
                      &mean.fresh.target_band_share, &mean.rerollout.target_band_share,
                      &mean.fresh.mean_distance, &mean.rerollout.mean_distance})
      *f /= count;
    for (const auto& [b, acc] : rate) mean.rerollout_pass_rate[b] = acc.first / acc.second;
    write_row(out, arm, "mean", mean, buckets);
  }
}

}  // namespace prefix_sampling
