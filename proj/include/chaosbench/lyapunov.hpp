#pragma once

// Lyapunov spectrum by the Benettin tangent-flow scheme: a full tangent frame
// rides along with the base trajectory through the same Taylor steps, and is
// re-orthonormalized (modified Gram-Schmidt) every renorm_interval. The logs
// of the removed column norms, averaged over time, are the exponents.
//
// The Kolmogorov-Sinai entropy is taken as the sum of the positive exponents
// (Pesin's identity).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "chaosbench/dynamics.hpp"
#include "chaosbench/errors.hpp"
#include "chaosbench/integrate.hpp"
#include "chaosbench/linalg.hpp"
#include "chaosbench/real.hpp"
#include "chaosbench/taylor.hpp"

namespace chaosbench {

struct LyapunovOptions {
  double t_total = 1000.0;       // accumulation time after burn-in
  double renorm_interval = 0.5;  // rounded to a whole number of steps
  double burn_in = -1.0;         // negative: 100 time units, or 100 forcing cycles for Duffing
  std::uint64_t frame_seed = 0;  // 0: identity initial frame; otherwise a seeded random orthonormal frame
  std::size_t history_points = 100;
};

struct HistoryPoint {
  double t = 0.0;
  std::vector<double> exponents;
};

struct LyapunovSpectrum {
  std::vector<double> exponents;  // sorted descending, 1 / time unit
  double t_total = 0.0;
  double renorm_interval = 0.0;
  double burn_in = 0.0;
  std::vector<HistoryPoint> convergence_history;
  bool converged = true;
  std::string note;

  double sum() const {
    double s = 0.0;
    for (double e : exponents) s += e;
    return s;
  }
};

inline double default_burn_in(const SystemSpec& system) { return 100.0 * system.cycle_time(); }

namespace detail {

template <class Real>
Matrix<Real> initial_frame(std::size_t d, std::uint64_t seed) {
  if (seed == 0) return Matrix<Real>::identity(d);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Matrix<Real> m(d, d);
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = 0; c < d; ++c) m(r, c) = Real(normal(rng));
  orthonormalize_columns(m);
  return m;
}

template <class Real, class System>
LyapunovSpectrum run_lyapunov(const System& sys, std::span<const double> x0, const LyapunovOptions& opts,
                              const PrecisionConfig& cfg, double burn_in) {
  using std::log;
  const std::size_t d = sys.dimension();
  const double h = cfg.step_size;
  const auto steps_per_renorm = static_cast<std::size_t>(std::max(1.0, std::round(opts.renorm_interval / h)));
  const double renorm = static_cast<double>(steps_per_renorm) * h;
  const auto burn_renorms = static_cast<std::size_t>(std::ceil(burn_in / renorm - 1e-9));
  const auto renorms = static_cast<std::size_t>(std::max(1.0, std::round(opts.t_total / renorm)));
  const std::size_t history_every = std::max<std::size_t>(1, renorms / std::max<std::size_t>(1, opts.history_points));

  std::vector<Real> state(x0.begin(), x0.end());
  Matrix<Real> frame = initial_frame<Real>(d, opts.frame_seed);
  TaylorStepper<typename KernelFor<System, Real>::type, Real> stepper(
      make_kernel<System, Real>(sys, static_cast<std::size_t>(cfg.method_order)), h);

  std::vector<double> sums(d, 0.0);
  LyapunovSpectrum out;
  out.renorm_interval = renorm;
  out.burn_in = static_cast<double>(burn_renorms) * renorm;
  out.t_total = static_cast<double>(renorms) * renorm;

  std::size_t step_count = 0;
  auto advance = [&] {
    for (std::size_t s = 0; s < steps_per_renorm; ++s) {
      stepper.step(state, frame);
      ++step_count;
    }
    if (!state_ok<Real>(state)) {
      throw DivergedTrajectory(static_cast<double>(step_count) * h, "lyapunov_spectrum: trajectory diverged");
    }
    return orthonormalize_columns(frame);
  };

  for (std::size_t r = 0; r < burn_renorms; ++r) advance();
  for (std::size_t r = 1; r <= renorms; ++r) {
    const auto norms = advance();
    for (std::size_t j = 0; j < d; ++j) sums[j] += to_double(log(norms[j]));
    if (r % history_every == 0 || r == renorms) {
      const double t = static_cast<double>(r) * renorm;
      HistoryPoint p{t, {}};
      for (double s : sums) p.exponents.push_back(s / t);
      out.convergence_history.push_back(std::move(p));
    }
  }
  out.exponents = out.convergence_history.back().exponents;
  std::sort(out.exponents.begin(), out.exponents.end(), std::greater<>());
  if (out.convergence_history.size() >= 2) {
    const auto& a = out.convergence_history[out.convergence_history.size() - 2].exponents;
    const auto& b = out.convergence_history.back().exponents;
    double scale = 0.0, diff = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      scale = std::max(scale, std::fabs(b[j]));
      diff = std::max(diff, std::fabs(a[j] - b[j]));
    }
    if (scale > 0.0 && diff > 0.1 * scale) {
      out.converged = false;
      out.note = "last two history points differ by more than 10%";
    }
  }
  return out;
}

}  // namespace detail

/// Lyapunov spectrum of `system` started at x0. Throws DivergedTrajectory if
/// the base trajectory leaves the finite range.
inline LyapunovSpectrum lyapunov_spectrum(const SystemSpec& system, std::span<const double> x0,
                                          const LyapunovOptions& opts, const PrecisionConfig& cfg) {
  cfg.validate();
  system.validate();
  if (x0.size() != system.dimension()) throw InvalidInput("lyapunov_spectrum: x0 has the wrong dimension");
  if (!(opts.renorm_interval > 0.0)) throw InvalidInput("lyapunov_spectrum: renorm_interval must be positive");
  if (!(opts.t_total > opts.renorm_interval)) throw InvalidInput("lyapunov_spectrum: t_total must exceed renorm_interval");
  const double burn_in = opts.burn_in >= 0.0 ? opts.burn_in : default_burn_in(system);
  return with_precision(cfg.mantissa_bits, [&]<class Real>() {
    return std::visit([&](const auto& sys) { return detail::run_lyapunov<Real>(sys, x0, opts, cfg, burn_in); },
                      system.system);
  });
}

/// Sum of the positive exponents; |lambda| < zero_band counts as zero.
inline double ks_entropy(std::span<const double> exponents, double zero_band = 0.005) {
  double h = 0.0;
  for (double e : exponents) {
    if (e > zero_band) h += e;
  }
  return h;
}
inline double ks_entropy(const LyapunovSpectrum& s, double zero_band = 0.005) {
  return ks_entropy(s.exponents, zero_band);
}

/// CSV t,lambda_1,...,lambda_d of the running estimates (unsorted, in frame order).
inline void write_lyapunov_history_csv(std::ostream& os, const LyapunovSpectrum& s) {
  os << "t";
  for (std::size_t j = 0; j < s.exponents.size(); ++j) os << ",lambda_" << (j + 1);
  os << "\n";
  for (const auto& p : s.convergence_history) {
    os << to_decimal(p.t);
    for (double e : p.exponents) os << "," << to_decimal(e);
    os << "\n";
  }
}

}  // namespace chaosbench
