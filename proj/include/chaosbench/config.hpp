#pragma once

// Line-oriented experiment config:
//
//   # comment
//   [section]
//   key = value
//
// Every key must be known; the resolved config (defaults + experiment
// defaults + file) is written back out verbatim so a run can be repeated.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "chaosbench/errors.hpp"

namespace chaosbench {

enum class ExperimentKind {
  Simulate,
  Horizon,
  Lyapunov,
  EntropyClassical,
  EntropyQuantum,
  AnalogNc,
  SampleCompare,
  SupremacyReport,
  Figure,
};

inline constexpr std::string_view experiment_name(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::Simulate: return "simulate";
    case ExperimentKind::Horizon: return "horizon";
    case ExperimentKind::Lyapunov: return "lyapunov";
    case ExperimentKind::EntropyClassical: return "entropy-classical";
    case ExperimentKind::EntropyQuantum: return "entropy-quantum";
    case ExperimentKind::AnalogNc: return "analog-nc";
    case ExperimentKind::SampleCompare: return "sample-compare";
    case ExperimentKind::SupremacyReport: return "supremacy-report";
    case ExperimentKind::Figure: return "figure";
  }
  return "";
}

inline const std::vector<ExperimentKind>& all_experiments() {
  static const std::vector<ExperimentKind> v{
      ExperimentKind::Simulate,        ExperimentKind::Horizon,       ExperimentKind::Lyapunov,
      ExperimentKind::EntropyClassical, ExperimentKind::EntropyQuantum, ExperimentKind::AnalogNc,
      ExperimentKind::SampleCompare,   ExperimentKind::SupremacyReport, ExperimentKind::Figure};
  return v;
}

inline std::optional<ExperimentKind> parse_experiment(std::string_view name) {
  for (auto k : all_experiments()) {
    if (experiment_name(k) == name) return k;
  }
  return std::nullopt;
}

namespace detail {

struct KeyDefault {
  const char* key;
  const char* value;
};

// Empty values mean "take it from the preset".
inline const std::vector<KeyDefault>& key_table() {
  static const std::vector<KeyDefault> t{
      {"run.experiment", ""},
      {"run.seed", "1"},
      {"run.tag", ""},
      {"system.preset", "lorenz-classic"},
      {"system.x0", ""},
      {"system.alpha", ""},
      {"system.beta", ""},
      {"system.delta", ""},
      {"system.gamma", ""},
      {"system.omega", ""},
      {"system.sigma", ""},
      {"system.R", ""},
      {"system.b", ""},
      {"precision.bits", "53"},
      {"precision.order", "12"},
      {"precision.step", ""},
      {"precision.steps_per_cycle", "0"},
      {"simulate.duration", "10"},
      {"simulate.stride", "1"},
      {"horizon.ladder", "53,113,175,237,453,797"},
      {"horizon.tolerance", "1e-3"},
      {"horizon.duration", "700"},
      {"horizon.stride", "10"},
      {"horizon.check_truncation", "false"},
      {"lyapunov.t_total", "1000"},
      {"lyapunov.renorm_interval", "0.5"},
      {"lyapunov.burn_in", "-1"},
      {"lyapunov.frame_seed", "0"},
      {"lyapunov.history_points", "100"},
      {"entropy.eps", "0.5"},
      {"entropy.members", "10000"},
      {"entropy.duration", "10"},
      {"entropy.sample_dt", "0.1"},
      {"entropy.initial_cells", "48"},
      {"entropy.cell_spacing", "3.7"},
      {"entropy.settle", "50"},
      {"entropy.kick_interval", "0"},
      {"entropy.refinements", "2"},
      {"entropy.tail_fraction", "0.2"},
      {"quantum.N", "128"},
      {"quantum.M", "8"},
      {"quantum.steps", "60"},
      {"quantum.state", "coherent"},
      {"quantum.q0", "0.29"},
      {"quantum.p0", "0.17"},
      {"quantum.fit_samples", "5"},
      {"noise.alpha", "0"},
      {"noise.gamma", "0"},
      {"noise.omega", "0"},
      {"noise.tau_alpha", "1"},
      {"noise.tau_gamma", "1"},
      {"noise.tau_omega", "1"},
      {"analog.max_cycles", "10000"},
      {"analog.pairs", "10"},
      {"analog.criterion", "twin"},
      {"analog.diameter_cycles", "2000"},
      {"analog.diameter_burn_in", "100"},
      {"sampling.cycles", "10000"},
      {"sampling.burn_in", "100"},
      {"sampling.grid", "32"},
      {"sampling.box", "-2,2,-2,2"},
      {"sampling.pairs", "4"},
      {"sampling.spread", "0.05"},
      {"supremacy.digital_ladder", "53,113"},
      {"supremacy.digital_order", "12"},
      {"supremacy.digital_steps_per_cycle", "64"},
      {"supremacy.digital_tolerance", "1e-3"},
      {"supremacy.digital_cycles", "300"},
      {"guard.wall_seconds", "900"},
      {"guard.memory_mib", "4096"},
  };
  return t;
}

// Calibrated device: relative noise 1e-339 on every channel, emulated at 1200
// bits so roundoff stays well below the noise floor.
inline const std::vector<KeyDefault>& device_defaults() {
  static const std::vector<KeyDefault> t{
      {"system.preset", "duffing-holmes"}, {"precision.bits", "1200"}, {"precision.order", "8"},
      {"precision.steps_per_cycle", "48"}, {"noise.alpha", "1e-339"},  {"noise.gamma", "1e-339"},
      {"noise.omega", "1e-339"},
  };
  return t;
}

inline std::vector<KeyDefault> experiment_defaults(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::EntropyClassical:
    case ExperimentKind::Figure:
      return {{"precision.order", "8"}};
    case ExperimentKind::AnalogNc:
    case ExperimentKind::SupremacyReport:
      return device_defaults();
    case ExperimentKind::SampleCompare:
      return {{"system.preset", "duffing-holmes"}, {"precision.steps_per_cycle", "64"}};
    default:
      return {};
  }
}

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace detail

/// Fully resolved key -> value map for one experiment.
class ExperimentConfig {
 public:
  explicit ExperimentConfig(ExperimentKind kind) : kind_(kind) {
    for (const auto& kd : detail::key_table()) values_[kd.key] = kd.value;
    for (const auto& kd : detail::experiment_defaults(kind)) values_[kd.key] = kd.value;
    values_["run.experiment"] = std::string(experiment_name(kind));
  }

  ExperimentKind kind() const { return kind_; }

  static bool known(const std::string& key) {
    const auto& t = detail::key_table();
    return std::any_of(t.begin(), t.end(), [&](const auto& kd) { return key == kd.key; });
  }

  void set(const std::string& key, const std::string& value) {
    if (!known(key)) throw ConfigError("unknown config key '" + key + "'");
    if (key == "run.experiment" && !value.empty() && value != experiment_name(kind_))
      throw ConfigError("config is for experiment '" + value + "', not '" + std::string(experiment_name(kind_)) + "'");
    values_[key] = key == "run.experiment" ? std::string(experiment_name(kind_)) : value;
  }

  /// Applies `key = value` lines; a key may appear at most once per text.
  void merge_text(std::string_view text, const std::string& source = "config") {
    std::istringstream in{std::string(text)};
    std::string line, section;
    std::map<std::string, int> seen;
    for (int lineno = 1; std::getline(in, line); ++lineno) {
      const std::string where = source + ":" + std::to_string(lineno);
      std::string s = detail::trim(line);
      if (s.empty() || s[0] == '#' || s[0] == ';') continue;
      if (s.front() == '[') {
        if (s.back() != ']') throw ConfigError(where + ": malformed section header");
        section = detail::trim(std::string_view(s).substr(1, s.size() - 2));
        if (section.empty()) throw ConfigError(where + ": empty section name");
        continue;
      }
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
      const std::string name = detail::trim(std::string_view(s).substr(0, eq));
      const std::string value = detail::trim(std::string_view(s).substr(eq + 1));
      if (name.empty()) throw ConfigError(where + ": missing key");
      if (section.empty()) throw ConfigError(where + ": key '" + name + "' outside any [section]");
      const std::string key = section + "." + name;
      if (!known(key)) throw ConfigError(where + ": unknown key '" + key + "'");
      if (seen.count(key)) throw ConfigError(where + ": duplicate key '" + key + "'");
      seen[key] = lineno;
      set(key, value);
    }
  }

  void merge_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    merge_text(ss.str(), path);
  }

  const std::string& str(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
    return it->second;
  }
  bool has_value(const std::string& key) const { return !str(key).empty(); }

  double real(const std::string& key) const { return parse_real(key, str(key)); }

  std::int64_t integer(const std::string& key) const {
    const std::string& v = str(key);
    std::int64_t out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError(key + ": expected an integer, got '" + v + "'");
    return out;
  }
  std::uint64_t count(const std::string& key) const {
    const auto v = integer(key);
    if (v < 0) throw ConfigError(key + ": must be non-negative");
    return static_cast<std::uint64_t>(v);
  }
  std::uint64_t u64(const std::string& key) const {
    const std::string& v = str(key);
    std::uint64_t out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError(key + ": expected an unsigned integer, got '" + v + "'");
    return out;
  }
  bool boolean(const std::string& key) const {
    const std::string& v = str(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(key + ": expected true or false, got '" + v + "'");
  }
  std::vector<double> reals(const std::string& key) const {
    std::vector<double> out;
    std::istringstream in(str(key));
    std::string item;
    while (std::getline(in, item, ',')) out.push_back(parse_real(key, detail::trim(item)));
    return out;
  }
  std::vector<int> integers(const std::string& key) const {
    std::vector<int> out;
    for (double v : reals(key)) {
      if (v != static_cast<int>(v)) throw ConfigError(key + ": expected integers");
      out.push_back(static_cast<int>(v));
    }
    return out;
  }

  /// `[section]` blocks in table order; parsing this back gives the same config.
  std::string resolved_text() const {
    std::ostringstream os;
    std::string section;
    for (const auto& kd : detail::key_table()) {
      const std::string key = kd.key;
      const auto dot = key.find('.');
      const std::string sec = key.substr(0, dot);
      if (sec != section) {
        os << (section.empty() ? "" : "\n") << "[" << sec << "]\n";
        section = sec;
      }
      os << key.substr(dot + 1) << " = " << values_.at(key) << "\n";
    }
    return os.str();
  }

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  static double parse_real(const std::string& key, const std::string& v) {
    try {
      std::size_t used = 0;
      const double d = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return d;
    } catch (const std::exception&) {
      throw ConfigError(key + ": expected a number, got '" + v + "'");
    }
  }

  ExperimentKind kind_;
  std::map<std::string, std::string> values_;
};

}  // namespace chaosbench
