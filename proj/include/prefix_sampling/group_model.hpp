#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace prefix_sampling {

using TaskId = std::uint64_t;
using TrajectoryHandle = std::uint64_t;

enum class BucketClass { Degenerate, Hard, Balanced, Easy };

/// Routing class of a group with `pass_count` successes out of `group_size`.
///
/// Degenerate {0, N}, Hard {1 .. ceil(N/4)}, Easy {N - ceil(N/4) .. N-1},
/// Balanced otherwise. At N = 8 this is {0,8} / {1,2} / {3,4,5} / {6,7}.
struct Bucket {
  BucketClass cls = BucketClass::Degenerate;
  int pass_count = 0;
  int group_size = 0;

  bool skewed() const { return cls == BucketClass::Hard || cls == BucketClass::Easy; }

  /// "k/N", as used in trace files.
  std::string label() const;

  friend auto operator<=>(const Bucket&, const Bucket&) = default;
};

/// Variant name such as "Hard2" or "Degenerate0".
std::string to_string(const Bucket& b);
std::string to_string(BucketClass c);

Bucket classify_bucket(int k, int n);

/// Parses "k/N" back into a bucket.
Bucket parse_bucket_label(const std::string& label);

enum class Origin { Fresh, Rerollout };

std::string to_string(Origin o);

/// One task's N binary rewards plus where the group came from.
struct RolloutGroup {
  TaskId task_id = 0;
  std::vector<std::uint8_t> rewards;
  Origin origin = Origin::Fresh;
  std::optional<Bucket> parent_bucket;  // set iff origin == Rerollout
  std::vector<TrajectoryHandle> trajectory_refs;
  int step = 0;

  int size() const { return static_cast<int>(rewards.size()); }
};

/// Throws ContractViolation if rewards are non-binary, handles mismatch the
/// rewards, or parent_bucket disagrees with origin.
void check_well_formed(const RolloutGroup& g);

int pass_count(const RolloutGroup& g);

bool is_degenerate(const RolloutGroup& g);

struct FilterResult {
  std::vector<RolloutGroup> valid;
  std::vector<RolloutGroup> discarded;
};

/// Splits a batch into non-degenerate and degenerate groups, preserving order.
FilterResult filter_groups(std::span<const RolloutGroup> batch);

/// |k - N/2|; the target is real-valued for odd N.
double pass_count_distance(int k, int n);

/// Pass counts 3..5 at N = 8; in general the Balanced bucket.
bool in_target_band(int k, int n);

nlohmann::ordered_json to_json(const RolloutGroup& g);

}  // namespace prefix_sampling
