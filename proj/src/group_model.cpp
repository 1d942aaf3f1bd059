#include "prefix_sampling/group_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "prefix_sampling/errors.hpp"

namespace prefix_sampling {

namespace {

int hard_limit(int n) { return (n + 3) / 4; }

}  // namespace

std::string Bucket::label() const {
  return std::to_string(pass_count) + "/" + std::to_string(group_size);
}

std::string to_string(BucketClass c) {
  switch (c) {
    case BucketClass::Degenerate: return "Degenerate";
    case BucketClass::Hard: return "Hard";
    case BucketClass::Balanced: return "Balanced";
    case BucketClass::Easy: return "Easy";
  }
  return "?";
}

std::string to_string(const Bucket& b) { return to_string(b.cls) + std::to_string(b.pass_count); }

Bucket classify_bucket(int k, int n) {
  if (n < 4 || n % 2 != 0) throw DomainError("classify_bucket: N must be even and at least 4");
  if (k < 0 || k > n) throw DomainError("classify_bucket: pass count out of range");
  const int h = hard_limit(n);
  BucketClass cls = BucketClass::Balanced;
  if (k == 0 || k == n)
    cls = BucketClass::Degenerate;
  else if (k <= h)
    cls = BucketClass::Hard;
  else if (k >= n - h)
    cls = BucketClass::Easy;
  return Bucket{cls, k, n};
}

Bucket parse_bucket_label(const std::string& label) {
  const auto slash = label.find('/');
  if (slash == std::string::npos) throw DomainError("bad bucket label '" + label + "'");
  try {
    return classify_bucket(std::stoi(label.substr(0, slash)), std::stoi(label.substr(slash + 1)));
  } catch (const std::invalid_argument&) {
    throw DomainError("bad bucket label '" + label + "'");
  }
}

std::string to_string(Origin o) { return o == Origin::Fresh ? "fresh" : "rerollout"; }

void check_well_formed(const RolloutGroup& g) {
  if (std::any_of(g.rewards.begin(), g.rewards.end(), [](auto r) { return r > 1; }))
    throw ContractViolation("rollout group: rewards must be binary");
  if (!g.trajectory_refs.empty() && g.trajectory_refs.size() != g.rewards.size())
    throw ContractViolation("rollout group: one trajectory handle per reward required");
  if ((g.origin == Origin::Rerollout) != g.parent_bucket.has_value())
    throw ContractViolation("rollout group: parent bucket must be set exactly for rerollouts");
}

int pass_count(const RolloutGroup& g) {
  return std::accumulate(g.rewards.begin(), g.rewards.end(), 0);
}

bool is_degenerate(const RolloutGroup& g) {
  const int k = pass_count(g);
  return k == 0 || k == g.size();
}

FilterResult filter_groups(std::span<const RolloutGroup> batch) {
  FilterResult out;
  if (batch.empty()) return out;
  const int n = batch.front().size();
  for (const auto& g : batch) {
    if (g.size() != n) throw ContractViolation("filter_groups: mixed group sizes in batch");
    (is_degenerate(g) ? out.discarded : out.valid).push_back(g);
  }
  return out;
}

double pass_count_distance(int k, int n) {
  return std::abs(static_cast<double>(k) - static_cast<double>(n) / 2.0);
}

bool in_target_band(int k, int n) { return classify_bucket(k, n).cls == BucketClass::Balanced; }

nlohmann::ordered_json to_json(const RolloutGroup& g) {
  nlohmann::ordered_json j;
  j["task_id"] = g.task_id;
  j["rewards"] = g.rewards;
  j["origin"] = to_string(g.origin);
  j["parent_bucket"] = g.parent_bucket ? nlohmann::ordered_json(g.parent_bucket->label())
                                       : nlohmann::ordered_json(nullptr);
  j["step"] = g.step;
  return j;
}

}  // namespace prefix_sampling
