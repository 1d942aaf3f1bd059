#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "prefix_sampling/experiment.hpp"

namespace prefix_sampling {

/// Shortest representation that parses back to the same double; NaN and
/// infinities print as an empty field.
std::string format_real(double x);

void write_metrics_csv(std::ostream& out, const RunResult& run);
void write_controller_csv(std::ostream& out, const RunResult& run);
void write_transitions_csv(std::ostream& out, const RunResult& run);
void write_run_jsonl(std::ostream& out, const RunResult& run);

/// Writes metrics.csv, controller.csv, transitions.csv and run.jsonl into
/// `dir`, creating it if needed. Throws IoError if anything cannot be
/// written.
void emit_traces(const RunResult& run, const std::filesystem::path& dir);

inline const std::vector<std::string>& trace_file_names() {
  static const std::vector<std::string> names = {"metrics.csv", "controller.csv",
                                                 "transitions.csv", "run.jsonl"};
  return names;
}

}  // namespace prefix_sampling
