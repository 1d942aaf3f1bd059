#include "prefix_sampling/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "prefix_sampling/errors.hpp"

namespace prefix_sampling {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_double(const std::string& key, std::string_view v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError(key, "expected a real number, got '" + std::string(v) + "'");
  return out;
}

long long to_integer(const std::string& key, std::string_view v) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError(key, "expected an integer, got '" + std::string(v) + "'");
  return out;
}

int to_int(const std::string& key, std::string_view v) {
  const long long x = to_integer(key, v);
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
    throw ConfigError(key, "integer out of range");
  return static_cast<int>(x);
}

bool to_bool(const std::string& key, std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(key, "expected true or false, got '" + std::string(v) + "'");
}

// Population keys are collected first and assembled once all are known.
struct PopulationKeys {
  std::string preset = "hard_skewed";
  int size = 1000;
  double pass_prob = 0.5;
  double sensitivity = 0.0;
  std::optional<int> min_length;
  std::optional<int> max_length;
  bool mirrored = false;
};

using Setter = std::function<void(ExperimentConfig&, PopulationKeys&, const std::string&,
                                  std::string_view)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"arm",
       [](auto& c, auto&, const auto& k, auto v) {
         try {
           c.arm = parse_arm(v);
         } catch (const DomainError& e) {
           throw ConfigError(k, e.what());
         }
       }},
      {"group_size", [](auto& c, auto&, const auto& k, auto v) { c.group_size = to_int(k, v); }},
      {"batch_size", [](auto& c, auto&, const auto& k, auto v) { c.batch_size = to_int(k, v); }},
      {"steps", [](auto& c, auto&, const auto& k, auto v) { c.steps = to_int(k, v); }},
      {"seed",
       [](auto& c, auto&, const auto& k, auto v) {
         const long long s = to_integer(k, v);
         if (s < 0) throw ConfigError(k, "seed must be non-negative");
         c.seed = static_cast<std::uint64_t>(s);
       }},
      {"schedule",
       [](auto& c, auto&, const auto& k, auto v) {
         if (v == "same_step")
           c.schedule = RerolloutSchedule::SameStep;
         else if (v == "next_step")
           c.schedule = RerolloutSchedule::NextStep;
         else
           throw ConfigError(k, "expected same_step or next_step");
       }},
      {"fixed_ratio", [](auto& c, auto&, const auto& k, auto v) { c.fixed_ratio = to_double(k, v); }},
      {"controller.alpha",
       [](auto& c, auto&, const auto& k, auto v) { c.controller.alpha = to_double(k, v); }},
      {"controller.deadzone",
       [](auto& c, auto&, const auto& k, auto v) { c.controller.deadzone = to_double(k, v); }},
      {"controller.step",
       [](auto& c, auto&, const auto& k, auto v) { c.controller.step = to_double(k, v); }},
      {"controller.ratio_min",
       [](auto& c, auto&, const auto& k, auto v) { c.controller.ratio_min = to_double(k, v); }},
      {"controller.ratio_max",
       [](auto& c, auto&, const auto& k, auto v) { c.controller.ratio_max = to_double(k, v); }},
      {"controller.cooldown",
       [](auto& c, auto&, const auto& k, auto v) { c.controller.cooldown = to_int(k, v); }},
      {"controller.cooldown_unit",
       [](auto& c, auto&, const auto& k, auto v) {
         if (v == "updates")
           c.controller.cooldown_unit = CooldownUnit::ControllerUpdates;
         else if (v == "steps")
           c.controller.cooldown_unit = CooldownUnit::TrainingSteps;
         else
           throw ConfigError(k, "expected updates or steps");
       }},
      {"controller.initial_ratio",
       [](auto& c, auto&, const auto& k, auto v) { c.controller.initial_ratio = to_double(k, v); }},
      {"controller.initial_ema",
       [](auto& c, auto&, const auto& k, auto v) { c.controller.initial_ema = to_double(k, v); }},
      {"controller.target",
       [](auto& c, auto&, const auto& k, auto v) { c.controller.target = to_double(k, v); }},
      {"population.preset",
       [](auto&, auto& p, const auto& k, auto v) {
         if (v != "hard_skewed" && v != "fixed")
           throw ConfigError(k, "expected hard_skewed or fixed");
         p.preset = std::string(v);
       }},
      {"population.size", [](auto&, auto& p, const auto& k, auto v) { p.size = to_int(k, v); }},
      {"population.pass_prob",
       [](auto&, auto& p, const auto& k, auto v) { p.pass_prob = to_double(k, v); }},
      {"population.sensitivity",
       [](auto&, auto& p, const auto& k, auto v) { p.sensitivity = to_double(k, v); }},
      {"population.min_length",
       [](auto&, auto& p, const auto& k, auto v) { p.min_length = to_int(k, v); }},
      {"population.max_length",
       [](auto&, auto& p, const auto& k, auto v) { p.max_length = to_int(k, v); }},
      {"population.mirrored",
       [](auto&, auto& p, const auto& k, auto v) { p.mirrored = to_bool(k, v); }},
      {"loss.normalization",
       [](auto& c, auto&, const auto& k, auto v) {
         if (v == "none")
           c.loss.normalization = LengthNormalization::None;
         else if (v == "token_mean")
           c.loss.normalization = LengthNormalization::TokenMean;
         else
           throw ConfigError(k, "expected none or token_mean");
       }},
      {"loss.group_reduction",
       [](auto& c, auto&, const auto& k, auto v) {
         if (v == "sum")
           c.loss.reduction = GroupReduction::Sum;
         else if (v == "mean")
           c.loss.reduction = GroupReduction::Mean;
         else
           throw ConfigError(k, "expected sum or mean");
       }},
      {"optimizer.clip_high",
       [](auto& c, auto&, const auto& k, auto v) { c.clip_high = to_double(k, v); }},
      {"optimizer.compact_filtering",
       [](auto& c, auto&, const auto& k, auto v) { c.compact_filtering = to_bool(k, v); }},
  };
  return table;
}

PopulationSpec build_population(const PopulationKeys& keys) {
  PopulationSpec spec;
  if (keys.preset == "hard_skewed") {
    spec = PopulationSpec::hard_skewed(keys.size);
  } else {
    if (!(keys.pass_prob > 0.0 && keys.pass_prob < 1.0))
      throw ConfigError("population.pass_prob", "must lie in (0, 1)");
    if (!(keys.sensitivity >= 0.0))
      throw ConfigError("population.sensitivity", "must be non-negative");
    spec = PopulationSpec::fixed(keys.pass_prob, keys.sensitivity, keys.size);
  }
  if (keys.min_length) spec.min_length = *keys.min_length;
  if (keys.max_length) spec.max_length = *keys.max_length;
  spec.mirrored = keys.mirrored;
  return spec;
}

}  // namespace

std::string to_string(Arm arm) {
  switch (arm) {
    case Arm::Baseline: return "baseline";
    case Arm::PSFix: return "ps_fix";
    case Arm::PSAdaHardOnly: return "ps_ada_hard_only";
    case Arm::PSAda: return "ps_ada";
  }
  return "?";
}

Arm parse_arm(std::string_view name) {
  for (Arm a : {Arm::Baseline, Arm::PSFix, Arm::PSAdaHardOnly, Arm::PSAda})
    if (name == to_string(a)) return a;
  throw DomainError("unknown arm '" + std::string(name) +
                    "' (expected baseline, ps_fix, ps_ada_hard_only or ps_ada)");
}

void validate(const ExperimentConfig& c) {
  if (c.group_size < 4 || c.group_size % 2 != 0)
    throw ConfigError("group_size", "must be even and at least 4");
  if (c.batch_size < 1) throw ConfigError("batch_size", "must be positive");
  if (c.steps < 0) throw ConfigError("steps", "must be non-negative");
  if (c.population.size < 1) throw ConfigError("population.size", "must be positive");
  if (c.batch_size > c.population.size)
    throw ConfigError("batch_size", "exceeds population.size (tasks are drawn without replacement)");
  if (c.population.min_length < 2)
    throw ConfigError("population.min_length", "must be at least 2");
  if (c.population.max_length < c.population.min_length)
    throw ConfigError("population.max_length", "must be >= population.min_length");

  const auto& p = c.controller;
  if (!(p.alpha > 0.0 && p.alpha <= 1.0)) throw ConfigError("controller.alpha", "must lie in (0, 1]");
  if (!(p.deadzone >= 0.0 && p.deadzone < 0.5))
    throw ConfigError("controller.deadzone", "must lie in [0, 0.5)");
  if (!(p.step >= 0.0 && p.step <= 1.0)) throw ConfigError("controller.step", "must lie in [0, 1]");
  if (!(p.ratio_min >= 0.0 && p.ratio_min <= 1.0))
    throw ConfigError("controller.ratio_min", "must lie in [0, 1]");
  if (!(p.ratio_max >= p.ratio_min && p.ratio_max <= 1.0))
    throw ConfigError("controller.ratio_max", "must lie in [ratio_min, 1]");
  if (p.cooldown < 0) throw ConfigError("controller.cooldown", "must be non-negative");
  if (!(p.initial_ratio >= p.ratio_min && p.initial_ratio <= p.ratio_max))
    throw ConfigError("controller.initial_ratio", "must lie within the ratio bounds");
  if (!(p.initial_ema >= 0.0 && p.initial_ema <= 1.0))
    throw ConfigError("controller.initial_ema", "must lie in [0, 1]");
  if (!(p.target > 0.0 && p.target < 1.0)) throw ConfigError("controller.target", "must lie in (0, 1)");
  if (!(c.fixed_ratio >= 0.0 && c.fixed_ratio <= 1.0))
    throw ConfigError("fixed_ratio", "must lie in [0, 1]");
  if (!(c.clip_high >= 0.0)) throw ConfigError("optimizer.clip_high", "must be non-negative");
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig config;
  PopulationKeys pop;
  std::map<std::string, int, std::less<>> seen;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("line " + std::to_string(line_no), "expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError(key, "unknown configuration key");
    if (seen.contains(key))
      throw ConfigError(key, "duplicate key (first set on line " + std::to_string(seen[key]) + ")");
    seen[key] = line_no;
    if (value.empty()) throw ConfigError(key, "missing value");
    it->second(config, pop, key, value);
  }
  config.population_preset = pop.preset;
  config.population = build_population(pop);
  validate(config);
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot read '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

ControllerParams effective_controller_params(const ExperimentConfig& config) {
  if (config.arm != Arm::PSFix) return config.controller;
  ControllerParams frozen;
  frozen.step = 0.0;
  frozen.initial_ratio = config.fixed_ratio;
  frozen.ratio_min = std::min(frozen.ratio_min, config.fixed_ratio);
  frozen.ratio_max = std::max(frozen.ratio_max, config.fixed_ratio);
  return frozen;
}

}  // namespace prefix_sampling
