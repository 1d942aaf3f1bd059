// Command-line driver: signal tables, single-arm simulation, oracle
// verification and matched-seed arm comparison.
//
// Exit codes: 0 success, 1 verification or property failure, 2 bad
// configuration, arguments or output location.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "prefix_sampling/comparison.hpp"
#include "prefix_sampling/config.hpp"
#include "prefix_sampling/errors.hpp"
#include "prefix_sampling/experiment.hpp"
#include "prefix_sampling/signal_math.hpp"
#include "prefix_sampling/trace_io.hpp"
#include "prefix_sampling/verification.hpp"

namespace ps = prefix_sampling;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;

int run_signal(int n) {
  if (n < 2) throw ps::ConfigError("--n", "group size must be at least 2");
  std::printf("%3s %9s %10s %10s %12s %7s %9s\n", "k", "pass", "H(p)", "S_N(p)", "E_RLOO", "C(k)",
              "C/max");
  for (int k = 0; k <= n; ++k) {
    const auto r = ps::signal_report(k, n);
    std::printf("%3d %4d/%-4d %10.4f %10.4f %12.6f %7lld %9.2f\n", k, k, n, r.entropy_bits,
                r.survival_prob, r.rloo_energy, static_cast<long long>(r.pair_count),
                r.pair_count_relative);
  }
  std::printf("\nlandmarks (N=%d)\n", n);
  for (double p : {0.5, 0.25, 0.125})
    std::printf("  p=%-6g H=%.4f bits  S_N=%.4f  E[K(N-K)]=%.4f\n", p, ps::reward_entropy(p),
                ps::group_survival_probability(p, n), ps::expected_pair_count(p, n));
  return 0;
}

int run_simulate(const std::string& config_path, const std::string& out) {
  const auto config = ps::load_config(config_path);
  const auto run = ps::run_experiment(config);
  ps::emit_traces(run, out);
  const auto s = ps::summarize(run);
  std::cout << "arm " << ps::to_string(config.arm) << ", " << config.steps << " steps, seed "
            << config.seed << "\n"
            << "mean valid groups per step: " << ps::format_real(s.mean_valid_groups) << "\n"
            << "traces written to " << out << "\n";
  return 0;
}

int run_verify() {
  bool ok = true;
  for (const auto& c : ps::run_all_checks()) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name;
    if (!c.detail.empty()) std::cout << "  [" << c.detail << "]";
    std::cout << "\n";
    ok = ok && c.passed;
  }
  return ok ? 0 : kExitFailure;
}

int run_compare(const std::string& config_path, const std::string& arms, const std::string& out,
                int seeds) {
  if (arms != "all") throw ps::ConfigError("--arms", "only 'all' is supported");
  if (seeds < 1) throw ps::ConfigError("--seeds", "must be positive");
  const auto config = ps::load_config(config_path);
  std::vector<std::uint64_t> seed_list;
  for (int i = 0; i < seeds; ++i) seed_list.push_back(config.seed + static_cast<std::uint64_t>(i));
  const auto rows = ps::run_comparison(config, seed_list, out);

  std::ostringstream csv;
  ps::write_summary_csv(csv, rows, config.group_size);
  std::ofstream f(std::filesystem::path(out) / "summary.csv", std::ios::binary);
  if (!(f << csv.str())) throw ps::IoError("cannot write summary.csv under " + out);
  std::cout << csv.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rollout pass-rate control and prefix sampling simulator"};
  app.require_subcommand(1);

  int n = 8;
  auto* signal = app.add_subcommand("signal", "Print signal quantities for every pass count");
  signal->add_option("--n", n, "Group size")->capture_default_str();

  std::string config_path, out;
  auto* simulate = app.add_subcommand("simulate", "Run one arm and write traces");
  simulate->add_option("--config", config_path, "Experiment configuration file")->required();
  simulate->add_option("--out", out, "Output directory")->required();

  auto* verify = app.add_subcommand("verify", "Run the oracle suites");

  std::string arms = "all";
  int seeds = 5;
  auto* compare = app.add_subcommand("compare", "Run all arms on matched seeds");
  compare->add_option("--config", config_path, "Experiment configuration file")->required();
  compare->add_option("--arms", arms, "Arms to run")->capture_default_str();
  compare->add_option("--out", out, "Output directory")->required();
  compare->add_option("--seeds", seeds, "Number of consecutive seeds from the config seed")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*signal) return run_signal(n);
    if (*simulate) return run_simulate(config_path, out);
    if (*verify) return run_verify();
    if (*compare) return run_compare(config_path, arms, out, seeds);
  } catch (const ps::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ps::IoError& e) {
    std::cerr << "output error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return 0;
}
