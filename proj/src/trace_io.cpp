#include "prefix_sampling/trace_io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>

#include "prefix_sampling/errors.hpp"

namespace prefix_sampling {

std::string format_real(double x) {
  if (!std::isfinite(x)) return {};
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), ptr);
}

namespace {

std::string format_optional(const std::optional<double>& x) {
  return x ? format_real(*x) : std::string{};
}

// Column label for a bucket, e.g. "k1" for 1/8.
std::string bucket_column(const Bucket& b) { return "k" + std::to_string(b.pass_count); }

void write_cohort_header(std::ostream& out, const char* prefix) {
  for (const char* field : {"groups", "valid", "degenerate_share", "target_band_share",
                            "exact_half_share", "mean_distance"})
    out << ',' << prefix << '_' << field;
}

void write_cohort(std::ostream& out, const CohortMetrics& c) {
  out << ',' << c.groups << ',' << c.valid << ',' << format_real(c.degenerate_share) << ','
      << format_real(c.target_band_share) << ',' << format_real(c.exact_half_share) << ','
      << format_real(c.mean_distance);
}

}  // namespace

void write_metrics_csv(std::ostream& out, const RunResult& run) {
  out << "step,valid_groups";
  write_cohort_header(out, "fresh");
  write_cohort_header(out, "rerollout");
  for (const Bucket& b : skewed_buckets(run.group_size))
    out << ",rerollout_pass_rate_" << bucket_column(b);
  out << ",mean_rloo_energy,masked_steps,trainable_steps,audit_loss\n";
  for (const auto& m : run.metrics) {
    out << m.step << ',' << m.valid_groups;
    write_cohort(out, m.fresh);
    write_cohort(out, m.rerollout);
    for (const auto& r : m.rerollout_pass_rate) out << ',' << format_real(r.pass_rate);
    out << ',' << format_real(m.mean_rloo_energy) << ',' << m.masked_steps << ','
        << m.trainable_steps << ',' << format_real(m.audit_loss) << '\n';
  }
}

void write_controller_csv(std::ostream& out, const RunResult& run) {
  out << "step,bucket,r_b,ema,cooldown_remaining\n";
  for (const auto& row : run.controller_trace)
    out << row.step << ',' << row.bucket.label() << ',' << format_real(row.ratio) << ','
        << format_real(row.ema) << ',' << row.cooldown_remaining << '\n';
}

void write_transitions_csv(std::ostream& out, const RunResult& run) {
  const auto& tm = run.transition_matrix;
  const int n = run.group_size;
  out << "source_bucket";
  for (int k = 0; k <= n; ++k) out << ",child_" << k;
  out << ",groups,mean_child_pass_count,target_band_share\n";
  const Eigen::MatrixXd p = tm.probabilities();
  for (int r = 0; r < static_cast<int>(tm.sources.size()); ++r) {
    out << tm.sources[r].label();
    for (int k = 0; k <= n; ++k) out << ',' << format_real(p(r, k));
    out << ',' << static_cast<long long>(tm.row_total(r)) << ','
        << format_optional(tm.mean_child_pass_count(r)) << ','
        << format_optional(tm.target_band_share(r)) << '\n';
  }
}

void write_run_jsonl(std::ostream& out, const RunResult& run) {
  for (const auto& rec : run.group_records) out << rec.dump() << '\n';
}

void emit_traces(const RunResult& run, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());

  using Writer = void (*)(std::ostream&, const RunResult&);
  const std::array<std::pair<const char*, Writer>, 4> files = {{
      {"metrics.csv", &write_metrics_csv},
      {"controller.csv", &write_controller_csv},
      {"transitions.csv", &write_transitions_csv},
      {"run.jsonl", &write_run_jsonl},
  }};
  for (const auto& [name, write] : files) {
    const auto path = dir / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    write(out, run);
    out.flush();
    if (!out) throw IoError("failed writing '" + path.string() + "'");
  }
}

}  // namespace prefix_sampling
