#include "prefix_sampling/metrics.hpp"

#include <algorithm>
#include <limits>

#include "prefix_sampling/errors.hpp"

namespace prefix_sampling {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

CohortMetrics compute_cohort_metrics(std::span<const RolloutGroup> groups) {
  CohortMetrics m;
  m.groups = static_cast<int>(groups.size());
  if (groups.empty()) {
    m.degenerate_share = m.target_band_share = m.exact_half_share = m.mean_distance = kNaN;
    return m;
  }
  int degenerate = 0, band = 0, half = 0;
  double distance = 0.0;
  for (const auto& g : groups) {
    const int n = g.size();
    const int k = pass_count(g);
    const Bucket b = classify_bucket(k, n);
    degenerate += b.cls == BucketClass::Degenerate;
    band += b.cls == BucketClass::Balanced;
    half += 2 * k == n;
    distance += pass_count_distance(k, n);
  }
  const double total = m.groups;
  m.valid = m.groups - degenerate;
  m.degenerate_share = degenerate / total;
  m.target_band_share = band / total;
  m.exact_half_share = half / total;
  m.mean_distance = distance / total;
  return m;
}

StepMetrics compute_step_metrics(std::span<const RolloutGroup> batch,
                                 std::span<const Bucket> buckets, int step) {
  std::vector<RolloutGroup> fresh, reroll;
  for (const auto& g : batch) {
    if (!batch.empty() && g.size() != batch.front().size())
      throw ContractViolation("compute_step_metrics: mixed group sizes in batch");
    (g.origin == Origin::Fresh ? fresh : reroll).push_back(g);
  }
  StepMetrics m;
  m.step = step;
  m.fresh = compute_cohort_metrics(fresh);
  m.rerollout = compute_cohort_metrics(reroll);
  m.valid_groups = m.fresh.valid + m.rerollout.valid;
  for (const auto& b : buckets) {
    int groups = 0;
    double passes = 0.0, rollouts = 0.0;
    for (const auto& g : reroll) {
      if (g.parent_bucket != b) continue;
      ++groups;
      passes += pass_count(g);
      rollouts += g.size();
    }
    m.rerollout_pass_rate.push_back({b, groups, rollouts > 0 ? passes / rollouts : kNaN});
  }
  return m;
}

std::vector<Bucket> skewed_buckets(int group_size) {
  std::vector<Bucket> out;
  for (int k = 1; k < group_size; ++k)
    if (const Bucket b = classify_bucket(k, group_size); b.skewed()) out.push_back(b);
  return out;
}

int TransitionMatrix::row_of(const Bucket& b) const {
  const auto it = std::find(sources.begin(), sources.end(), b);
  return it == sources.end() ? -1 : static_cast<int>(it - sources.begin());
}

Eigen::MatrixXd TransitionMatrix::probabilities() const {
  Eigen::MatrixXd p = counts;
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    const double total = p.row(r).sum();
    if (total > 0.0) p.row(r) /= total;
  }
  return p;
}

std::optional<double> TransitionMatrix::mean_child_pass_count(int row) const {
  if (row_empty(row)) return std::nullopt;
  const Eigen::VectorXd ks = Eigen::VectorXd::LinSpaced(group_size + 1, 0, group_size);
  return counts.row(row).dot(ks) / row_total(row);
}

std::optional<double> TransitionMatrix::target_band_share(int row) const {
  if (row_empty(row)) return std::nullopt;
  double band = 0.0;
  for (int k = 0; k <= group_size; ++k)
    if (in_target_band(k, group_size)) band += counts(row, k);
  return band / row_total(row);
}

TransitionMatrix compute_transition_matrix(std::span<const TransitionPair> pairs, int group_size) {
  return compute_transition_matrix(pairs, group_size, skewed_buckets(group_size));
}

TransitionMatrix compute_transition_matrix(std::span<const TransitionPair> pairs, int group_size,
                                           std::vector<Bucket> sources) {
  TransitionMatrix m;
  m.group_size = group_size;
  m.sources = std::move(sources);
  m.counts = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m.sources.size()), group_size + 1);
  for (const auto& p : pairs) {
    if (p.child_pass_count < 0 || p.child_pass_count > group_size)
      throw DomainError("compute_transition_matrix: child pass count out of range");
    const int row = m.row_of(p.source);
    if (row < 0)
      throw DomainError("compute_transition_matrix: unknown source bucket " + p.source.label());
    m.counts(row, p.child_pass_count) += 1.0;
  }
  return m;
}

}  // namespace prefix_sampling
