#pragma once

// Fixed-step Taylor integration of a SystemSpec at a chosen mantissa width,
// and the reliable-simulation horizon measured over a ladder of precisions.
//
// A run at precision p is trusted up to the first time its state leaves a
// tol-ball around the run at the next rung of the ladder (same method order
// and step, more bits). At fixed order and step both runs evaluate the same
// discrete map, so the horizon isolates the effect of finite precision.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "chaosbench/dynamics.hpp"
#include "chaosbench/errors.hpp"
#include "chaosbench/parallel.hpp"
#include "chaosbench/real.hpp"
#include "chaosbench/taylor.hpp"

namespace chaosbench {

struct PrecisionConfig {
  int mantissa_bits = 53;
  int method_order = 12;
  double step_size = 0.01;
  std::size_t output_stride = 1;

  void validate() const {
    if (mantissa_bits < 53) throw InvalidInput("mantissa_bits must be >= 53");
    if (method_order < 4 || method_order % 2 != 0) throw InvalidInput("method_order must be even and >= 4");
    if (!(step_size > 0.0) || !std::isfinite(step_size)) throw InvalidInput("step_size must be positive");
    if (output_stride == 0) throw InvalidInput("output_stride must be positive");
  }
  bool operator==(const PrecisionConfig&) const = default;
};

/// Runs `fn.template operator()<Real>()` with Real = double for 53 bits and
/// BigFloat (at exactly `bits` bits) otherwise.
template <class Fn>
decltype(auto) with_precision(int bits, Fn&& fn) {
  if (bits == kDoubleMantissaBits) return fn.template operator()<double>();
  PrecisionScope scope(bits);
  return fn.template operator()<BigFloat>();
}

/// States sampled from one integration run.
template <class Real>
struct Trajectory {
  SystemSpec system;
  PrecisionConfig config;
  std::uint64_t seed = 0;
  std::size_t dim = 0;
  std::vector<double> times;
  std::vector<Real> states;  // row-major, dim per sample
  std::optional<double> failure_time;

  std::size_t size() const { return times.size(); }
  std::span<const Real> state(std::size_t i) const { return {states.data() + i * dim, dim}; }
  std::span<const Real> final_state() const { return state(size() - 1); }
  double duration() const { return times.empty() ? 0.0 : times.back(); }
};

using AnyTrajectory = std::variant<Trajectory<double>, Trajectory<BigFloat>>;

namespace detail {

template <class Real>
bool state_ok(std::span<const Real> s) {
  for (const auto& v : s) {
    if (!is_finite(v)) return false;
    if (std::fabs(to_double(v)) > 1e150) return false;
  }
  return true;
}

template <class Real>
void append_sample(Trajectory<Real>& tr, double t, std::span<const Real> s) {
  tr.times.push_back(t);
  tr.states.insert(tr.states.end(), s.begin(), s.end());
}

/// Number of full steps and the length of a final partial step (0 if none).
inline std::pair<std::size_t, double> step_plan(double T, double h) {
  const double ratio = T / h;
  const double nearest = std::round(ratio);
  if (std::fabs(ratio - nearest) <= 1e-9 * std::max(1.0, ratio)) return {static_cast<std::size_t>(nearest), 0.0};
  const auto full = static_cast<std::size_t>(std::floor(ratio));
  return {full, T - static_cast<double>(full) * h};
}

struct NoStepHook {
  template <class Kernel>
  void operator()(Kernel&, std::size_t, double) const {}
};

/// Core fixed-step loop. `hook(kernel, step_index, h)` runs before every step
/// (step_index counts from 0), which lets callers vary parameters in time.
template <class Real, class System, class Hook = NoStepHook>
Trajectory<Real> run_system(const SystemSpec& spec, const System& sys, std::span<const Real> x0, double T,
                            const PrecisionConfig& cfg, bool throw_on_divergence, Hook&& hook = {}) {
  Trajectory<Real> tr{spec, cfg, 0, sys.dimension(), {}, {}, std::nullopt};
  std::vector<Real> state(x0.begin(), x0.end());
  for (auto& v : state) round_to_working(v);
  if (!state_ok<Real>(state)) throw InvalidInput("integrate: initial state is not finite");
  const auto [n_full, tail] = step_plan(T, cfg.step_size);
  const std::size_t order = static_cast<std::size_t>(cfg.method_order);
  TaylorStepper<typename KernelFor<System, Real>::type, Real> stepper(make_kernel<System, Real>(sys, order),
                                                                      cfg.step_size);
  tr.times.reserve(n_full / cfg.output_stride + 2);
  tr.states.reserve((n_full / cfg.output_stride + 2) * state.size());
  append_sample<Real>(tr, 0.0, state);
  auto fail = [&](double t) {
    if (throw_on_divergence) throw DivergedTrajectory(t, "integrate: state became non-finite or overflowed");
    tr.failure_time = t;
  };
  for (std::size_t n = 1; n <= n_full; ++n) {
    hook(stepper.kernel(), n - 1, cfg.step_size);
    stepper.step(state);
    const double t = static_cast<double>(n) * cfg.step_size;
    if (!state_ok<Real>(state)) {
      fail(t);
      return tr;
    }
    if (n % cfg.output_stride == 0 || (n == n_full && tail == 0.0)) append_sample<Real>(tr, t, state);
  }
  if (tail > 0.0) {
    TaylorStepper<typename KernelFor<System, Real>::type, Real> last(make_kernel<System, Real>(sys, order), tail);
    hook(last.kernel(), n_full, tail);
    last.step(state);
    if (!state_ok<Real>(state)) {
      fail(T);
      return tr;
    }
    append_sample<Real>(tr, T, state);
  }
  return tr;
}

}  // namespace detail

/// Integrates `system` from x0 over [0, T]. Bit-reproducible for identical
/// inputs. Throws DivergedTrajectory if the state stops being finite.
template <class Real>
Trajectory<Real> integrate(const SystemSpec& system, std::span<const Real> x0, double T, const PrecisionConfig& cfg) {
  cfg.validate();
  system.validate();
  if (!(T > 0.0) || !std::isfinite(T)) throw InvalidInput("integrate: T must be positive");
  if (x0.size() != system.dimension()) throw InvalidInput("integrate: x0 has the wrong dimension");
  return std::visit(
      [&](const auto& sys) { return detail::run_system<Real>(system, sys, x0, T, cfg, true); }, system.system);
}

/// Runtime-precision entry point: doubles for 53 bits, BigFloat otherwise.
inline AnyTrajectory integrate_any(const SystemSpec& system, std::span<const double> x0, double T,
                                   const PrecisionConfig& cfg, bool throw_on_divergence = true) {
  cfg.validate();
  system.validate();
  if (!(T > 0.0) || !std::isfinite(T)) throw InvalidInput("integrate: T must be positive");
  if (x0.size() != system.dimension()) throw InvalidInput("integrate: x0 has the wrong dimension");
  return with_precision(cfg.mantissa_bits, [&]<class Real>() -> AnyTrajectory {
    std::vector<Real> start(x0.begin(), x0.end());
    return std::visit(
        [&](const auto& sys) {
          return AnyTrajectory(detail::run_system<Real>(system, sys, start, T, cfg, throw_on_divergence));
        },
        system.system);
  });
}

namespace detail {

inline double difference(double a, double b) { return a - b; }
inline double difference(const BigFloat& a, const BigFloat& b) {
  PrecisionScope scope(std::max(a.bits(), b.bits()));
  return to_double(a - b);
}
inline double difference(const BigFloat& a, double b) {
  PrecisionScope scope(std::max(a.bits(), kDoubleMantissaBits));
  return to_double(a - BigFloat(b));
}
inline double difference(double a, const BigFloat& b) { return -difference(b, a); }

}  // namespace detail

/// Earliest common sample time at which |a - b| (Euclidean) exceeds tol, or
/// the last common time if it never does. The grids must share sample times
/// (identical grids, or one a refinement of the other).
template <class RA, class RB>
double divergence_time(const Trajectory<RA>& a, const Trajectory<RB>& b, double tol) {
  if (!(tol > 0.0)) throw InvalidInput("divergence_time: tol must be positive");
  if (a.dim != b.dim) throw InvalidInput("divergence_time: dimension mismatch");
  if (a.size() == 0 || b.size() == 0) throw InvalidInput("divergence_time: empty trajectory");
  const double eps = 1e-9 * std::max(a.config.step_size, b.config.step_size);
  std::size_t i = 0, j = 0;
  bool any_common = false;
  double last_common = 0.0;
  while (i < a.size() && j < b.size()) {
    const double ta = a.times[i];
    const double tb = b.times[j];
    if (std::fabs(ta - tb) <= eps) {
      any_common = true;
      last_common = ta;
      double sq = 0.0;
      for (std::size_t k = 0; k < a.dim; ++k) {
        const double d = detail::difference(a.state(i)[k], b.state(j)[k]);
        sq += d * d;
      }
      if (!(std::sqrt(sq) <= tol)) return ta;
      ++i;
      ++j;
    } else if (ta < tb) {
      ++i;
    } else {
      ++j;
    }
  }
  if (!any_common) throw InvalidInput("divergence_time: trajectories share no sample times");
  return last_common;
}

inline double divergence_time(const AnyTrajectory& a, const AnyTrajectory& b, double tol) {
  return std::visit([&](const auto& x, const auto& y) { return divergence_time(x, y, tol); }, a, b);
}

// ---- precision ladder ------------------------------------------------------------

struct HorizonEntry {
  int mantissa_bits = 0;
  int method_order = 0;
  double step_size = 0.0;
  double reliable_horizon = 0.0;  // T_c in system time units
  double horizon_cycles = 0.0;    // T_c / forcing period (Duffing) or T_c (Lorenz, LTU)
  bool flagged = false;
  std::string note;
};

struct HorizonReport {
  std::vector<HorizonEntry> entries;
  double tolerance = 1e-3;
  double duration = 0.0;
  PrecisionConfig reference_config;
  /// Divergence of the top rung from a step-halved run at the same precision,
  /// when requested. Bounds the horizon by truncation rather than rounding.
  std::optional<double> truncation_horizon;
};

/// Approximate decimal digits carried by a mantissa of `bits` bits.
inline double decimal_digits(int bits) { return bits * 0.30102999566398120; }

/// Fills horizon_cycles: T_c divided by the forcing period for Duffing, T_c
/// itself (Lorenz time units) for other systems.
inline HorizonReport horizon_in_cycles(HorizonReport report, const SystemSpec& system) {
  const double unit = system.cycle_time();
  for (auto& e : report.entries) e.horizon_cycles = e.reliable_horizon / unit;
  return report;
}

struct HorizonOptions {
  double duration = 100.0;
  std::size_t jobs = 1;
  bool check_truncation = false;
};

/// Measures T_c for every rung of `ladder` (sorted by increasing bits). The
/// topmost rung is compared against one extra rung that continues the
/// ladder's last spacing (same order and step).
inline HorizonReport reliable_horizon(const SystemSpec& system, std::span<const double> x0, double tol,
                                      std::span<const PrecisionConfig> ladder, const HorizonOptions& opts) {
  if (ladder.size() < 2) throw InvalidInput("reliable_horizon: ladder needs at least two configs");
  if (!(tol > 0.0)) throw InvalidInput("reliable_horizon: tol must be positive");
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    ladder[i].validate();
    if (i > 0 && ladder[i].mantissa_bits < ladder[i - 1].mantissa_bits) {
      throw InvalidInput("reliable_horizon: ladder must be sorted by increasing precision");
    }
  }
  PrecisionConfig reference = ladder.back();
  reference.mantissa_bits += ladder.back().mantissa_bits - ladder[ladder.size() - 2].mantissa_bits;

  std::vector<PrecisionConfig> runs(ladder.begin(), ladder.end());
  runs.push_back(reference);
  if (opts.check_truncation) {
    PrecisionConfig halved = ladder.back();
    halved.step_size /= 2.0;
    halved.output_stride *= 2;
    runs.push_back(halved);
  }
  auto trajectories = parallel_map(runs.size(), opts.jobs, [&](std::size_t i) {
    return integrate_any(system, x0, opts.duration, runs[i], false);
  });

  auto failure = [](const AnyTrajectory& t) {
    return std::visit([](const auto& x) { return x.failure_time; }, t);
  };

  HorizonReport report;
  report.tolerance = tol;
  report.duration = opts.duration;
  report.reference_config = reference;
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    HorizonEntry e;
    e.mantissa_bits = ladder[i].mantissa_bits;
    e.method_order = ladder[i].method_order;
    e.step_size = ladder[i].step_size;
    e.reliable_horizon = divergence_time(trajectories[i], trajectories[i + 1], tol);
    for (std::size_t k : {i, i + 1}) {
      if (auto f = failure(trajectories[k])) {
        e.flagged = true;
        e.note = "run at " + std::to_string(runs[k].mantissa_bits) + " bits diverged at t=" + std::to_string(*f);
      }
    }
    report.entries.push_back(e);
  }
  if (opts.check_truncation) {
    report.truncation_horizon = divergence_time(trajectories[ladder.size() - 1], trajectories.back(), tol);
  }
  return horizon_in_cycles(std::move(report), system);
}

// ---- export ----------------------------------------------------------------------

/// CSV with header t,x1,...,xd; states printed with the run's full precision.
template <class Real>
void write_trajectory_csv(std::ostream& os, const Trajectory<Real>& tr) {
  os << "t";
  for (std::size_t k = 0; k < tr.dim; ++k) os << ",x" << (k + 1);
  os << "\n";
  for (std::size_t i = 0; i < tr.size(); ++i) {
    os << to_decimal(tr.times[i]);
    for (const auto& v : tr.state(i)) os << "," << to_decimal(v);
    os << "\n";
  }
}

inline void write_trajectory_csv(std::ostream& os, const AnyTrajectory& tr) {
  std::visit([&](const auto& t) { write_trajectory_csv(os, t); }, tr);
}

inline void write_horizon_csv(std::ostream& os, const HorizonReport& r) {
  os << "mantissa_bits,method_order,T_c,horizon_cycles\n";
  for (const auto& e : r.entries) {
    os << e.mantissa_bits << "," << e.method_order << "," << to_decimal(e.reliable_horizon) << ","
       << to_decimal(e.horizon_cycles) << "\n";
  }
}

/// Documented scale anchors; never asserted, the desk-scale runs replace them.
inline constexpr double kSupercomputerLorenzHorizonLtu = 10000.0;
inline constexpr double kSupercomputerDuffingCycles = 1e4;

}  // namespace chaosbench
