#pragma once

// Experiment runners behind the command-line tool. Each runner reads a
// resolved ExperimentConfig, computes, and writes its artifacts into one
// directory: <out_root>/<experiment>-<tag or timestamp>/.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"

#include "chaosbench/analog.hpp"
#include "chaosbench/config.hpp"
#include "chaosbench/dynamics.hpp"
#include "chaosbench/entropy_classical.hpp"
#include "chaosbench/errors.hpp"
#include "chaosbench/figure.hpp"
#include "chaosbench/integrate.hpp"
#include "chaosbench/lyapunov.hpp"
#include "chaosbench/presets.hpp"
#include "chaosbench/quantum.hpp"
#include "chaosbench/random.hpp"
#include "chaosbench/stats.hpp"

namespace chaosbench {

using Json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "0.1.0";

struct RunOptions {
  std::filesystem::path out_root = "runs";
  std::size_t jobs = 0;
  std::string timestamp;  // manifest only; also the directory suffix when no tag is set
  std::ostream* log = nullptr;
};

struct RunResult {
  std::filesystem::path dir;
  Json summary;
};

// ---- config resolution ---------------------------------------------------------

struct ResolvedSystem {
  SystemSpec system;
  std::vector<double> x0;
  double step = 0.01;
};

inline ResolvedSystem resolve_system(const ExperimentConfig& cfg) {
  const Preset& preset = find_preset(cfg.str("system.preset"));
  ResolvedSystem r{preset.system, preset.x0, preset.step};
  auto override_param = [&](const char* name, double& slot, bool applies) {
    const std::string key = std::string("system.") + name;
    if (!cfg.has_value(key)) return;
    if (!applies) throw ConfigError(key + " does not apply to preset '" + preset.name + "'");
    slot = cfg.real(key);
  };
  if (r.system.is_duffing()) {
    DuffingParams p = r.system.duffing();
    override_param("alpha", p.alpha, true);
    override_param("beta", p.beta, true);
    override_param("delta", p.delta, true);
    override_param("gamma", p.gamma, true);
    override_param("omega", p.omega, true);
    for (const char* k : {"sigma", "R", "b"}) override_param(k, p.alpha, false);
    try {
      r.system = make_duffing(p, preset.name);
    } catch (const InvalidInput& e) {
      throw ConfigError(e.what());
    }
    r.step = forcing_period(p) / 64.0;
  } else if (std::holds_alternative<LorenzSystem>(r.system.system)) {
    LorenzParams p = r.system.lorenz();
    override_param("sigma", p.sigma, true);
    override_param("R", p.R, true);
    override_param("b", p.b, true);
    for (const char* k : {"alpha", "beta", "delta", "gamma", "omega"}) override_param(k, p.sigma, false);
    try {
      r.system = make_lorenz(p, preset.name);
    } catch (const InvalidInput& e) {
      throw ConfigError(e.what());
    }
  } else {
    for (const char* k : {"alpha", "beta", "delta", "gamma", "omega", "sigma", "R", "b"}) {
      double unused = 0.0;
      override_param(k, unused, false);
    }
  }
  if (cfg.has_value("system.x0")) {
    r.x0 = cfg.reals("system.x0");
    if (r.x0.size() != r.system.dimension())
      throw ConfigError("system.x0 needs " + std::to_string(r.system.dimension()) + " components");
  }
  if (cfg.has_value("precision.step")) r.step = cfg.real("precision.step");
  const auto spc = cfg.count("precision.steps_per_cycle");
  if (spc > 0) {
    if (!r.system.is_duffing()) throw ConfigError("precision.steps_per_cycle applies to Duffing presets only");
    r.step = forcing_period(r.system.duffing()) / static_cast<double>(spc);
  }
  return r;
}

inline PrecisionConfig precision_config(const ExperimentConfig& cfg, double step, std::size_t stride = 1) {
  PrecisionConfig p;
  p.mantissa_bits = static_cast<int>(cfg.integer("precision.bits"));
  p.method_order = static_cast<int>(cfg.integer("precision.order"));
  p.step_size = step;
  p.output_stride = stride;
  try {
    p.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError(std::string("precision: ") + e.what());
  }
  return p;
}

inline NoiseSpec noise_spec(const ExperimentConfig& cfg, std::uint64_t seed) {
  NoiseSpec n;
  auto channel = [&](const char* name) {
    NoiseChannel ch;
    const std::string key = std::string("noise.") + name;
    try {
      ch.sigma = Magnitude::parse(cfg.str(key));
    } catch (const InvalidInput& e) {
      throw ConfigError(key + ": " + e.what());
    }
    ch.tau = cfg.real(std::string("noise.tau_") + name);
    if (!(ch.tau > 0.0)) throw ConfigError(std::string("noise.tau_") + name + " must be positive");
    return ch;
  };
  n.alpha = channel("alpha");
  n.gamma = channel("gamma");
  n.omega = channel("omega");
  n.seed = seed;
  return n;
}

inline std::uint64_t run_seed(const ExperimentConfig& cfg) { return cfg.u64("run.seed"); }

inline const DuffingParams& require_duffing(const ResolvedSystem& rs, std::string_view experiment) {
  if (!rs.system.is_duffing())
    throw ConfigError(std::string(experiment) + " needs a Duffing preset, got '" + rs.system.name + "'");
  return rs.system.duffing();
}

// ---- resource estimate ---------------------------------------------------------

namespace detail {

inline double value_bytes(int bits) { return bits <= kDoubleMantissaBits ? 8.0 : 48.0 + bits / 8.0; }

inline double trajectory_bytes(double duration, double step, double stride, std::size_t dim, int bits) {
  return (duration / step / stride + 2.0) * (static_cast<double>(dim) * value_bytes(bits) + 8.0);
}

}  // namespace detail

/// Rough peak memory of an experiment, used to refuse runs before they start.
inline double estimate_memory_bytes(const ExperimentConfig& cfg) {
  const double base = 16.0 * 1024 * 1024;
  switch (cfg.kind()) {
    case ExperimentKind::Simulate: {
      const auto rs = resolve_system(cfg);
      return base + detail::trajectory_bytes(cfg.real("simulate.duration"), rs.step,
                                             static_cast<double>(cfg.count("simulate.stride")), rs.system.dimension(),
                                             static_cast<int>(cfg.integer("precision.bits")));
    }
    case ExperimentKind::Horizon: {
      const auto rs = resolve_system(cfg);
      double total = base;
      const auto ladder = cfg.integers("horizon.ladder");
      for (int bits : ladder)
        total += detail::trajectory_bytes(cfg.real("horizon.duration"), rs.step,
                                          static_cast<double>(cfg.count("horizon.stride")), rs.system.dimension(), bits);
      if (!ladder.empty())
        total += 2.0 * detail::trajectory_bytes(cfg.real("horizon.duration"), rs.step,
                                                static_cast<double>(cfg.count("horizon.stride")),
                                                rs.system.dimension(), 2 * ladder.back());
      return total;
    }
    case ExperimentKind::EntropyClassical:
    case ExperimentKind::Figure: {
      const double samples = cfg.real("entropy.duration") / cfg.real("entropy.sample_dt") + 2.0;
      const double quantum = 5.0 * 16.0 * std::pow(static_cast<double>(cfg.count("quantum.N")), 2.0);
      return base + static_cast<double>(cfg.count("entropy.members")) * samples * (3.0 * 8.0 + 16.0) + quantum;
    }
    case ExperimentKind::EntropyQuantum:
      return base + 5.0 * 16.0 * std::pow(static_cast<double>(cfg.count("quantum.N")), 2.0);
    case ExperimentKind::SampleCompare: {
      const double pairs = static_cast<double>(cfg.count("sampling.pairs"));
      const double cycles = 2.0 * static_cast<double>(cfg.count("sampling.cycles") + cfg.count("sampling.burn_in"));
      return base + 2.0 * pairs * cycles * 2.0 * (3.0 * 8.0 + 8.0);
    }
    default:
      return base;
  }
}

// ---- artifacts -----------------------------------------------------------------

class ArtifactDir {
 public:
  explicit ArtifactDir(std::filesystem::path dir) : dir_(std::move(dir)) { std::filesystem::create_directories(dir_); }
  const std::filesystem::path& path() const { return dir_; }

  std::ofstream open(const std::string& name) {
    files_.push_back(name);
    std::ofstream os(dir_ / name, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + (dir_ / name).string());
    return os;
  }
  void write(const std::string& name, const std::string& text) {
    auto os = open(name);
    os << text;
  }
  void write_json(const std::string& name, const Json& j) { write(name, j.dump(2) + "\n"); }
  const std::vector<std::string>& files() const { return files_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> files_;
};

inline std::filesystem::path artifact_dir_for(const ExperimentConfig& cfg, const RunOptions& opts) {
  std::string suffix = cfg.str("run.tag");
  if (suffix.empty()) suffix = opts.timestamp.empty() ? "untagged" : opts.timestamp;
  return opts.out_root / (std::string(experiment_name(cfg.kind())) + "-" + suffix);
}

namespace detail {

inline Json curve_json_head(const EntropyCurve& c) {
  Json m = Json::object();
  for (const auto& [k, v] : c.metadata) m[k] = v;
  return m;
}

inline std::string to_csv(const EntropyCurve& c) {
  std::ostringstream os;
  write_entropy_csv(os, c);
  return os.str();
}

inline void say(const RunOptions& opts, const std::string& line) {
  if (opts.log) *opts.log << line << "\n";
}

// ---- individual experiments ----

inline Json run_simulate(const ExperimentConfig& cfg, const RunOptions& opts, ArtifactDir& out) {
  const auto rs = resolve_system(cfg);
  const auto pc = precision_config(cfg, rs.step, cfg.count("simulate.stride"));
  const double T = cfg.real("simulate.duration");
  if (!(T > 0.0)) throw ConfigError("simulate.duration must be positive");
  const NoiseSpec noise = noise_spec(cfg, derive_seed(run_seed(cfg), 1));
  AnyTrajectory tr;
  bool noisy = !noise.is_zero();
  if (noisy) {
    const auto& p = require_duffing(rs, "noisy simulate");
    tr = simulate_noisy(p, noise, rs.x0, T / forcing_period(p), pc, rs.system.name);
  } else {
    tr = integrate_any(rs.system, rs.x0, T, pc, false);
  }
  {
    auto os = out.open("trajectory.csv");
    write_trajectory_csv(os, tr);
  }
  Json j;
  j["system"] = rs.system.name;
  j["mantissa_bits"] = pc.mantissa_bits;
  j["method_order"] = pc.method_order;
  j["step"] = pc.step_size;
  j["duration"] = T;
  j["noisy"] = noisy;
  std::visit(
      [&](const auto& t) {
        j["samples"] = t.size();
        Json fs = Json::array();
        for (const auto& v : t.final_state()) fs.push_back(to_decimal(v));
        j["final_state"] = fs;
        if (t.failure_time) {
          j["failure_time"] = *t.failure_time;
          out.write_json("simulate.json", j);
          throw DivergedTrajectory(*t.failure_time, "simulate: trajectory diverged");
        }
      },
      tr);
  say(opts, "simulated " + rs.system.name + " for " + to_decimal(T));
  out.write_json("simulate.json", j);
  return j;
}

inline std::vector<PrecisionConfig> ladder_configs(const std::vector<int>& bits, int order, double step,
                                                   std::size_t stride) {
  std::vector<PrecisionConfig> ladder;
  for (int b : bits) {
    PrecisionConfig p{b, order, step, stride};
    try {
      p.validate();
    } catch (const InvalidInput& e) {
      throw ConfigError(std::string("ladder: ") + e.what());
    }
    ladder.push_back(p);
  }
  return ladder;
}

inline Json horizon_json(const HorizonReport& r) {
  Json j;
  j["tolerance"] = r.tolerance;
  j["duration"] = r.duration;
  j["reference_bits"] = r.reference_config.mantissa_bits;
  Json entries = Json::array();
  std::vector<double> digits, tc;
  for (const auto& e : r.entries) {
    entries.push_back({{"mantissa_bits", e.mantissa_bits},
                       {"decimal_digits", decimal_digits(e.mantissa_bits)},
                       {"method_order", e.method_order},
                       {"step", e.step_size},
                       {"T_c", e.reliable_horizon},
                       {"horizon_cycles", e.horizon_cycles},
                       {"flagged", e.flagged},
                       {"note", e.note}});
    digits.push_back(decimal_digits(e.mantissa_bits));
    tc.push_back(e.reliable_horizon);
  }
  j["entries"] = entries;
  bool increasing = true;
  for (std::size_t i = 1; i < tc.size(); ++i) increasing = increasing && tc[i] > tc[i - 1];
  j["strictly_increasing"] = increasing;
  if (tc.size() >= 2) {
    const auto f = fit_line(digits, tc);
    j["fit_vs_digits"] = {{"slope", f.slope}, {"intercept", f.intercept}, {"r_squared", f.r_squared}};
  }
  if (r.truncation_horizon) j["truncation_horizon"] = *r.truncation_horizon;
  return j;
}

inline Json run_horizon(const ExperimentConfig& cfg, const RunOptions& opts, ArtifactDir& out) {
  const auto rs = resolve_system(cfg);
  const int order = static_cast<int>(cfg.integer("precision.order"));
  const auto ladder = ladder_configs(cfg.integers("horizon.ladder"), order, rs.step, cfg.count("horizon.stride"));
  HorizonOptions ho;
  ho.duration = cfg.real("horizon.duration");
  ho.jobs = opts.jobs;
  ho.check_truncation = cfg.boolean("horizon.check_truncation");
  const auto report = reliable_horizon(rs.system, rs.x0, cfg.real("horizon.tolerance"), ladder, ho);
  {
    auto os = out.open("horizon.csv");
    write_horizon_csv(os, report);
  }
  Json full{{"system", rs.system.name}, {"cycle_time", rs.system.cycle_time()}};
  full.update(horizon_json(report));
  full["supercomputer_anchor_ltu"] = kSupercomputerLorenzHorizonLtu;
  out.write_json("horizon.json", full);
  say(opts, "horizon: top rung T_c = " + to_decimal(report.entries.back().reliable_horizon));
  return full;
}

inline Json run_lyapunov(const ExperimentConfig& cfg, const RunOptions& opts, ArtifactDir& out) {
  const auto rs = resolve_system(cfg);
  const auto pc = precision_config(cfg, rs.step);
  LyapunovOptions lo;
  lo.t_total = cfg.real("lyapunov.t_total");
  lo.renorm_interval = cfg.real("lyapunov.renorm_interval");
  lo.burn_in = cfg.real("lyapunov.burn_in");
  lo.frame_seed = cfg.u64("lyapunov.frame_seed");
  lo.history_points = cfg.count("lyapunov.history_points");
  const auto s = lyapunov_spectrum(rs.system, rs.x0, lo, pc);
  {
    auto os = out.open("lyapunov_history.csv");
    write_lyapunov_history_csv(os, s);
  }
  Json j{{"system", rs.system.name},
         {"mantissa_bits", pc.mantissa_bits},
         {"method_order", pc.method_order},
         {"step", pc.step_size},
         {"t_total", s.t_total},
         {"renorm_interval", s.renorm_interval},
         {"burn_in", s.burn_in},
         {"exponents", s.exponents},
         {"sum", s.sum()},
         {"ks_entropy", ks_entropy(s)},
         {"converged", s.converged},
         {"note", s.note}};
  out.write_json("lyapunov.json", j);
  say(opts, "lyapunov: lambda_max = " + to_decimal(s.exponents.front()));
  return j;
}

struct ClassicalSetup {
  ResolvedSystem rs;
  PrecisionConfig pc;
  EnsembleOptions eo;
  std::vector<PartitionSpec> partitions;
  std::vector<std::vector<double>> centers;
  double time_unit = 1.0;
};

// For Duffing, durations and spacings are counted in forcing cycles.
inline ClassicalSetup classical_setup(const ExperimentConfig& cfg, const RunOptions& opts) {
  ClassicalSetup s{resolve_system(cfg), {}, {}, {}, {}, 1.0};
  s.pc = precision_config(cfg, s.rs.step);
  s.time_unit = s.rs.system.is_duffing() ? s.rs.system.cycle_time() : 1.0;
  s.eo.members = cfg.count("entropy.members");
  s.eo.duration = cfg.real("entropy.duration") * s.time_unit;
  s.eo.sample_dt = cfg.real("entropy.sample_dt") * s.time_unit;
  s.eo.kick_interval = cfg.real("entropy.kick_interval") * s.time_unit;
  s.eo.seed = derive_seed(run_seed(cfg), 2);
  s.eo.jobs = opts.jobs;
  const double eps = cfg.real("entropy.eps");
  const auto refinements = cfg.count("entropy.refinements");
  try {
    for (std::uint64_t k = 0; k <= refinements; ++k)
      s.partitions.push_back(default_partition(s.rs.system, eps / std::pow(2.0, static_cast<double>(k))));
  } catch (const InvalidInput& e) {
    throw ConfigError(std::string("entropy: ") + e.what());
  }
  s.centers = attractor_points(s.rs.system, s.rs.x0, cfg.count("entropy.initial_cells"),
                               cfg.real("entropy.settle") * s.time_unit, cfg.real("entropy.cell_spacing") * s.time_unit,
                               s.pc);
  return s;
}

inline Json slope_json(const EntropyCurve& c) {
  try {
    const auto w = auto_slope_window(c);
    return {{"t_start", w.t_start}, {"t_end", w.t_end}, {"slope", w.fit.slope}, {"intercept", w.fit.intercept},
            {"r_squared", w.fit.r_squared}};
  } catch (const InvalidInput& e) {
    return {{"error", e.what()}};
  }
}

inline Json run_entropy_classical(const ExperimentConfig& cfg, const RunOptions& opts, ArtifactDir& out) {
  const auto s = classical_setup(cfg, opts);
  const auto curves = mean_entropy_curves(s.rs.system, s.partitions, s.centers, s.eo, s.pc);
  const double tail = cfg.real("entropy.tail_fraction");
  out.write("entropy.csv", to_csv(curves[0]));
  std::ostringstream ceil_csv;
  ceil_csv << "eps,ceiling_nats,rise_nats\n";
  Json ceilings = Json::array();
  double prev = 0.0;
  for (std::size_t k = 0; k < curves.size(); ++k) {
    if (k > 0) out.write("entropy_refined_" + std::to_string(k) + ".csv", to_csv(curves[k]));
    const double c = curve_ceiling(curves[k], tail);
    const double rise = k > 0 ? c - prev : 0.0;
    ceil_csv << to_decimal(s.partitions[k].eps()) << "," << to_decimal(c) << "," << to_decimal(rise) << "\n";
    ceilings.push_back({{"eps", s.partitions[k].eps()}, {"ceiling", c}, {"rise", k > 0 ? Json(rise) : Json(nullptr)}});
    prev = c;
  }
  out.write("ceilings.csv", ceil_csv.str());
  Json j{{"system", s.rs.system.name},
         {"metadata", curve_json_head(curves[0])},
         {"time_unit", s.time_unit},
         {"slope_window", slope_json(curves[0])},
         {"ceilings", ceilings},
         {"ln_members", std::log(static_cast<double>(s.eo.members))},
         {"flagged", curves[0].flagged},
         {"note", curves[0].note}};
  out.write_json("entropy_summary.json", j);
  say(opts, "entropy-classical: " + std::to_string(s.centers.size()) + " initial cells averaged");
  return j;
}

inline DensityMatrix initial_quantum_state(const ExperimentConfig& cfg, const MeasurementPartition& part) {
  const std::size_t N = part.N;
  const std::string kind = cfg.str("quantum.state");
  const double q0 = cfg.real("quantum.q0") * static_cast<double>(N);
  const double p0 = cfg.real("quantum.p0") * static_cast<double>(N);
  if (kind == "coherent") return DensityMatrix::coherent_state(N, q0, p0);
  if (kind == "mixed") return DensityMatrix::maximally_mixed(N);
  if (kind == "position") {
    const auto q = static_cast<std::size_t>(std::llround(q0)) % N;
    return DensityMatrix::position_state(N, q);
  }
  if (kind == "position-block") {
    ComplexVector psi = ComplexVector::Zero(static_cast<Eigen::Index>(N));
    const std::size_t b = part.block_of(static_cast<std::size_t>(std::llround(q0)) % N);
    for (std::size_t q = b * part.block_size(); q < (b + 1) * part.block_size(); ++q)
      psi(static_cast<Eigen::Index>(q)) = 1.0;
    return DensityMatrix::pure(psi);
  }
  throw ConfigError("quantum.state must be coherent, position, position-block or mixed; got '" + kind + "'");
}

struct QuantumRun {
  QuantumModel model;
  EntropyCurve curve;
  std::size_t M = 0;
};

inline QuantumRun quantum_run(const ExperimentConfig& cfg, std::size_t steps) {
  const auto N = cfg.count("quantum.N");
  const auto M = cfg.count("quantum.M");
  QuantumModel model;
  std::optional<MeasurementPartition> part;
  try {
    model = cat_map_unitary(N);
    part.emplace(N, M);
  } catch (const InvalidInput& e) {
    throw ConfigError(std::string("quantum: ") + e.what());
  }
  const auto rho0 = initial_quantum_state(cfg, *part);
  auto curve = quantum_entropy_curve(model, *part, rho0, steps);
  curve.metadata.emplace_back("state", cfg.str("quantum.state"));
  return {std::move(model), std::move(curve), M};
}

inline Json run_entropy_quantum(const ExperimentConfig& cfg, const RunOptions& opts, ArtifactDir& out) {
  const auto run = quantum_run(cfg, cfg.count("quantum.steps"));
  const auto& c = run.curve;
  out.write("entropy.csv", to_csv(c));
  const auto fit_n = cfg.count("quantum.fit_samples");
  Json initial = Json::object();
  if (fit_n >= 5 && fit_n <= c.size()) {
    const auto f = fit_entropy_slope(c, c.times[0], c.times[fit_n - 1]);
    initial = {{"t_start", c.times[0]}, {"t_end", c.times[fit_n - 1]}, {"slope", f.slope}, {"r_squared", f.r_squared}};
  }
  double peak = 0.0;
  for (double h : c.entropy) peak = std::max(peak, h);
  Json j{{"N", run.model.N},
         {"M", run.M},
         {"model", "cat"},
         {"hbar_eff", run.model.hbar_eff},
         {"omega_vol", run.model.omega_vol},
         {"ceiling_lnN", run.model.max_entropy()},
         {"final_entropy", c.entropy.back()},
         {"max_entropy", peak},
         {"initial_slope", initial},
         {"slope_window", slope_json(c)},
         {"classical_ks_entropy", cat_map_ks_entropy()}};
  out.write_json("entropy_summary.json", j);
  say(opts, "entropy-quantum: final S = " + to_decimal(c.entropy.back()) + " of ln N = " + to_decimal(run.model.max_entropy()));
  return j;
}

inline DecorrelationOptions decorrelation_options(const ExperimentConfig& cfg, const RunOptions& opts) {
  DecorrelationOptions d;
  const std::string crit = cfg.str("analog.criterion");
  if (crit == "twin") d.criterion = DecorrelationCriterion::TwinSeparation;
  else if (crit == "autocorrelation") d.criterion = DecorrelationCriterion::Autocorrelation;
  else throw ConfigError("analog.criterion must be twin or autocorrelation; got '" + crit + "'");
  d.diameter_cycles = cfg.count("analog.diameter_cycles");
  d.diameter_burn_in = cfg.count("analog.diameter_burn_in");
  d.jobs = opts.jobs;
  return d;
}

inline Json noise_json(const NoiseSpec& n) {
  auto ch = [](const NoiseChannel& c) { return Json{{"sigma", c.sigma.str()}, {"tau", c.tau}}; };
  return {{"alpha", ch(n.alpha)}, {"gamma", ch(n.gamma)}, {"omega", ch(n.omega)}, {"seed", n.seed}};
}

inline std::pair<Json, DecorrelationResult> analog_nc(const ExperimentConfig& cfg, const RunOptions& opts) {
  const auto rs = resolve_system(cfg);
  const auto& params = require_duffing(rs, "analog-nc");
  const auto pc = precision_config(cfg, rs.step);
  const NoiseSpec noise = noise_spec(cfg, derive_seed(run_seed(cfg), 3));
  const auto d = decorrelation_options(cfg, opts);
  const auto r = decorrelation_cycles(params, noise, rs.x0, cfg.count("analog.max_cycles"), cfg.count("analog.pairs"),
                                      pc, d);
  Json j{{"system", rs.system.name},
         {"criterion", cfg.str("analog.criterion")},
         {"mantissa_bits", pc.mantissa_bits},
         {"method_order", pc.method_order},
         {"steps_per_cycle", detail::steps_per_cycle(params, pc.step_size)},
         {"noise", noise_json(noise)},
         {"N_c", r.cycles},
         {"at_ceiling", r.at_ceiling},
         {"max_cycles", cfg.count("analog.max_cycles")},
         {"attractor_diameter", r.attractor_diameter},
         {"pair_cycles", r.pair_cycles},
         {"pair_seeds", r.pair_seeds},
         {"quartz_anchor_cycles", kQuartzDeviceCycles}};
  return {j, r};
}

inline Json run_analog_nc(const ExperimentConfig& cfg, const RunOptions& opts, ArtifactDir& out) {
  const auto [j, r] = analog_nc(cfg, opts);
  std::ostringstream csv;
  csv << "pair,seed,cycles\n";
  for (std::size_t i = 0; i < r.pair_cycles.size(); ++i)
    csv << i << "," << r.pair_seeds[i] << "," << to_decimal(r.pair_cycles[i]) << "\n";
  out.write("pairs.csv", csv.str());
  out.write_json("nc.json", j);
  say(opts, "analog-nc: N_c = " + to_decimal(r.cycles) + (r.at_ceiling ? " (ceiling)" : ""));
  return j;
}

inline SectionBox parse_box(const ExperimentConfig& cfg) {
  const auto v = cfg.reals("sampling.box");
  if (v.size() != 4 || !(v[1] > v[0]) || !(v[3] > v[2])) throw ConfigError("sampling.box must be x_lo,x_hi,y_lo,y_hi");
  return {v[0], v[1], v[2], v[3]};
}

inline Json run_sample_compare(const ExperimentConfig& cfg, const RunOptions& opts, ArtifactDir& out) {
  const auto rs = resolve_system(cfg);
  const auto& params = require_duffing(rs, "sample-compare");
  const auto n = cfg.count("sampling.cycles");
  const auto burn = cfg.count("sampling.burn_in");
  const auto G = cfg.count("sampling.grid");
  const auto pairs = cfg.count("sampling.pairs");
  const double spread = cfg.real("sampling.spread");
  if (n == 0 || pairs == 0) throw ConfigError("sampling.cycles and sampling.pairs must be positive");
  if (G < 2) throw ConfigError("sampling.grid must be at least 2");
  const SectionBox box = parse_box(cfg);
  const auto spc = detail::steps_per_cycle(params, rs.step);
  const auto pc = precision_config(cfg, forcing_period(params) / static_cast<double>(spc), spc);
  const std::uint64_t base = derive_seed(run_seed(cfg), 4);

  // Run 2*pairs independent sets of 2n cycles; the first n points of each form the short set.
  auto sets = parallel_map(2 * pairs, opts.jobs, [&](std::size_t i) {
    const std::uint64_t seed = derive_seed(base, i);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-spread, spread);
    std::vector<double> x0 = rs.x0;
    x0[0] += u(rng);
    x0[1] += u(rng);
    const NoiseSpec noise = noise_spec(cfg, seed);
    const auto tr = simulate_noisy(params, noise, x0, static_cast<double>(2 * n + burn), pc, rs.system.name);
    auto s = stroboscopic_samples(tr, params, burn);
    s.seed = seed;
    return s;
  });
  auto first = [&](const SampleSet& s) {
    SampleSet h = s;
    h.points.resize(std::min<std::size_t>(n, s.points.size()));
    return h;
  };
  Json per_pair = Json::array();
  double tv_short = 0.0, tv_long = 0.0;
  for (std::size_t p = 0; p < pairs; ++p) {
    const auto a = first(sets[2 * p]), b = first(sets[2 * p + 1]);
    const auto ha = histogram(a, G, box), hb = histogram(b, G, box);
    const auto d = distribution_distance(ha, hb);
    const auto d2 = distribution_distance(histogram(sets[2 * p], G, box), histogram(sets[2 * p + 1], G, box));
    tv_short += d.tv;
    tv_long += d2.tv;
    per_pair.push_back({{"seed_a", a.seed},
                        {"seed_b", b.seed},
                        {"count", a.points.size()},
                        {"tv", d.tv},
                        {"kl_sym", d.kl_sym},
                        {"count_doubled", sets[2 * p].points.size()},
                        {"tv_doubled", d2.tv},
                        {"kl_sym_doubled", d2.kl_sym}});
    if (p == 0) {
      std::ostringstream sa, sb, ga, gb;
      write_samples_csv(sa, a);
      write_samples_csv(sb, b);
      write_histogram_csv(ga, ha);
      write_histogram_csv(gb, hb);
      out.write("samples_a.csv", sa.str());
      out.write("samples_b.csv", sb.str());
      out.write("histogram_a.csv", ga.str());
      out.write("histogram_b.csv", gb.str());
    }
  }
  tv_short /= static_cast<double>(pairs);
  tv_long /= static_cast<double>(pairs);
  Json j{{"system", rs.system.name},
         {"grid", G},
         {"box", {box.x_lo, box.x_hi, box.y_lo, box.y_hi}},
         {"cycles", n},
         {"burn_in", burn},
         {"tv", per_pair[0]["tv"]},
         {"kl_sym", per_pair[0]["kl_sym"]},
         {"mean_tv", tv_short},
         {"mean_tv_doubled", tv_long},
         {"tv_ratio_on_doubling", tv_long > 0.0 ? Json(tv_short / tv_long) : Json(nullptr)},
         {"pairs", per_pair}};
  out.write_json("compare.json", j);
  say(opts, "sample-compare: tv = " + to_decimal(tv_short) + " (" + std::to_string(n) + " cycles)");
  return j;
}

inline Json run_supremacy_report(const ExperimentConfig& cfg, const RunOptions& opts, ArtifactDir& out) {
  const auto rs = resolve_system(cfg);
  const auto& params = require_duffing(rs, "supremacy-report");
  const double period = forcing_period(params);
  const auto spc = cfg.count("supremacy.digital_steps_per_cycle");
  if (spc == 0) throw ConfigError("supremacy.digital_steps_per_cycle must be positive");
  const auto ladder = ladder_configs(cfg.integers("supremacy.digital_ladder"),
                                     static_cast<int>(cfg.integer("supremacy.digital_order")),
                                     period / static_cast<double>(spc), spc);
  HorizonOptions ho;
  ho.duration = cfg.real("supremacy.digital_cycles") * period;
  ho.jobs = opts.jobs;
  const auto report = reliable_horizon(rs.system, rs.x0, cfg.real("supremacy.digital_tolerance"), ladder, ho);
  {
    auto os = out.open("digital_horizon.csv");
    write_horizon_csv(os, report);
  }
  const auto [analog, r] = analog_nc(cfg, opts);
  const double digital = report.entries.front().horizon_cycles;
  const auto ratio = supremacy_ratio(r.cycles, digital, r.at_ceiling);
  Json j{{"system", rs.system.name},
         {"digital",
          {{"mantissa_bits", report.entries.front().mantissa_bits},
           {"horizon_cycles", digital},
           {"horizon_time", report.entries.front().reliable_horizon},
           {"ladder", horizon_json(report)}}},
         {"analog", analog},
         {"ratio", ratio.ratio},
         {"ratio_is_lower_bound", ratio.lower_bound},
         {"extrapolation",
          {{"quartz_device_cycles", kQuartzDeviceCycles},
           {"supercomputer_cycles", kSupercomputerDuffingCycles},
           {"ratio", kQuartzSupremacyRatio},
           {"asserted", false}}}};
  out.write_json("supremacy.json", j);
  say(opts, "supremacy-report: N_c = " + to_decimal(r.cycles) + ", digital = " + to_decimal(digital) +
                " cycles, ratio = " + to_decimal(ratio.ratio));
  return j;
}

inline Json run_figure(const ExperimentConfig& cfg, const RunOptions& opts, ArtifactDir& out) {
  auto s = classical_setup(cfg, opts);
  s.partitions.erase(s.partitions.begin() + 1, s.partitions.end());
  const auto classical = mean_entropy_curves(s.rs.system, s.partitions, s.centers, s.eo, s.pc)[0];
  const auto run = quantum_run(cfg, classical.size() - 1);
  const auto fig = emit_figure_data(classical, run.curve, run.model.max_entropy());
  out.write("figure.csv", fig.csv);
  out.write("figure.gp", fig.script);
  out.write("entropy_classical.csv", to_csv(classical));
  out.write("entropy_quantum.csv", to_csv(run.curve));
  Json j{{"rows", fig.rows},
         {"ceiling_lnN", run.model.max_entropy()},
         {"classical_final", classical.entropy.back()},
         {"quantum_final", run.curve.entropy.back()}};
  out.write_json("figure.json", j);
  say(opts, "figure: " + std::to_string(fig.rows) + " rows");
  return j;
}

}  // namespace detail

/// Runs one experiment and writes its artifacts plus manifest.json and
/// resolved.cfg. Exceptions propagate; artifacts written before a failure stay.
inline RunResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
  const double mem = estimate_memory_bytes(cfg);
  const double cap = static_cast<double>(cfg.count("guard.memory_mib")) * 1024.0 * 1024.0;
  if (mem > cap)
    throw ResourceExceeded("estimated memory " + std::to_string(static_cast<long long>(mem / 1048576.0)) +
                           " MiB exceeds guard.memory_mib");
  ArtifactDir out(artifact_dir_for(cfg, opts));
  out.write("resolved.cfg", cfg.resolved_text());
  auto manifest = [&](const Json& summary) {
    Json m{{"experiment", std::string(experiment_name(cfg.kind()))},
           {"version", kVersion},
           {"timestamp", opts.timestamp},
           {"rerun", "chaosbench " + std::string(experiment_name(cfg.kind())) + " --config resolved.cfg"},
           {"config", cfg.values()},
           {"artifacts", out.files()},
           {"summary", summary}};
    std::ofstream os(out.path() / "manifest.json", std::ios::binary | std::ios::trunc);
    os << m.dump(2) << "\n";
  };
  Json summary;
  try {
    switch (cfg.kind()) {
      case ExperimentKind::Simulate: summary = detail::run_simulate(cfg, opts, out); break;
      case ExperimentKind::Horizon: summary = detail::run_horizon(cfg, opts, out); break;
      case ExperimentKind::Lyapunov: summary = detail::run_lyapunov(cfg, opts, out); break;
      case ExperimentKind::EntropyClassical: summary = detail::run_entropy_classical(cfg, opts, out); break;
      case ExperimentKind::EntropyQuantum: summary = detail::run_entropy_quantum(cfg, opts, out); break;
      case ExperimentKind::AnalogNc: summary = detail::run_analog_nc(cfg, opts, out); break;
      case ExperimentKind::SampleCompare: summary = detail::run_sample_compare(cfg, opts, out); break;
      case ExperimentKind::SupremacyReport: summary = detail::run_supremacy_report(cfg, opts, out); break;
      case ExperimentKind::Figure: summary = detail::run_figure(cfg, opts, out); break;
    }
  } catch (...) {
    manifest(Json{{"status", "failed"}});
    throw;
  }
  manifest(summary);
  return {out.path(), summary};
}

}  // namespace chaosbench
