#pragma once

// Emulation of a driven Duffing device whose stiffness (alpha), drive
// amplitude (gamma) and drive frequency (omega) fluctuate thermally. Each
// parameter is multiplied by (1 + X(t)) with X an Ornstein-Uhlenbeck process,
// advanced once per integration step by its exact discretization
//   X <- X e^{-h/tau} + sigma sqrt(1 - e^{-2h/tau}) xi.
//
// The device's useful horizon N_c is the number of forcing cycles after which
// two copies started from the same state but driven by independent noise have
// separated by half the attractor diameter. The ergodic measure is sampled on
// the stroboscopic section (x, y at t = k 2 pi / omega).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "chaosbench/dynamics.hpp"
#include "chaosbench/errors.hpp"
#include "chaosbench/integrate.hpp"
#include "chaosbench/parallel.hpp"
#include "chaosbench/random.hpp"
#include "chaosbench/real.hpp"
#include "chaosbench/taylor.hpp"

namespace chaosbench {

/// A non-negative magnitude m * 10^e whose exponent may lie far outside the
/// range of double (noise amplitudes for extended-precision device runs).
struct Magnitude {
  double mantissa = 0.0;
  int exp10 = 0;

  static Magnitude parse(const std::string& text) {
    const auto epos = text.find_first_of("eE");
    Magnitude m;
    try {
      std::size_t used = 0;
      m.mantissa = std::stod(text.substr(0, epos), &used);
      if (used != (epos == std::string::npos ? text.size() : epos)) throw std::invalid_argument(text);
      if (epos != std::string::npos) {
        const std::string e = text.substr(epos + 1);
        m.exp10 = std::stoi(e, &used);
        if (used != e.size()) throw std::invalid_argument(text);
      }
    } catch (const std::exception&) {
      throw InvalidInput("not a number: '" + text + "'");
    }
    if (!(m.mantissa >= 0.0) || !std::isfinite(m.mantissa)) throw InvalidInput("magnitude must be non-negative: " + text);
    return m;
  }
  static Magnitude of(double v) { return {v, 0}; }

  bool is_zero() const { return mantissa == 0.0; }
  double to_double() const { return mantissa * std::pow(10.0, exp10); }
  std::string str() const {
    if (exp10 == 0) return to_decimal(mantissa);
    return to_decimal(mantissa) + "e" + std::to_string(exp10);
  }

  template <class Real>
  Real value() const {
    if constexpr (is_big_float_v<Real>) {
      BigFloat scale(exp10);
      mpfr_exp10(scale.raw(), scale.raw(), MPFR_RNDN);
      return BigFloat(mantissa) * scale;
    } else {
      return to_double();
    }
  }
  bool operator==(const Magnitude&) const = default;
};

struct NoiseChannel {
  Magnitude sigma;  // stationary relative standard deviation
  double tau = 1.0; // correlation time

  void validate() const {
    if (!(tau > 0.0)) throw InvalidInput("noise correlation time tau must be positive");
  }
  bool operator==(const NoiseChannel&) const = default;
};

struct NoiseSpec {
  NoiseChannel alpha, gamma, omega;
  std::uint64_t seed = 0;

  bool is_zero() const { return alpha.sigma.is_zero() && gamma.sigma.is_zero() && omega.sigma.is_zero(); }
  void validate() const {
    alpha.validate();
    gamma.validate();
    omega.validate();
  }
};

/// Ornstein-Uhlenbeck process with zero mean, started at 0.
template <class Real>
class OuProcess {
 public:
  OuProcess(const NoiseChannel& ch, std::uint64_t seed) : sigma_(ch.sigma.value<Real>()), tau_(ch.tau), rng_(seed) {}

  const Real& value() const { return x_; }

  void advance(double h) {
    if (h != cached_h_) {
      using std::exp;
      using std::sqrt;
      decay_ = exp(Real(-h / tau_));
      kick_ = sigma_ * sqrt(Real(1.0) - exp(Real(-2.0 * h / tau_)));
      cached_h_ = h;
    }
    const double xi = normal_(rng_);
    x_ *= decay_;
    mul_add(x_, kick_, Real(xi));
  }

 private:
  Real sigma_;
  double tau_;
  Real x_ = Real(0.0);
  Real decay_ = Real(0.0), kick_ = Real(0.0);
  double cached_h_ = -1.0;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_;
};

/// Drives a DuffingKernel's alpha, gamma, omega with independent OU channels.
template <class Real>
class DriveNoise {
 public:
  DriveNoise(const DuffingParams& p, const NoiseSpec& noise, std::uint64_t stream)
      : alpha_(p.alpha),
        gamma_(p.gamma),
        omega_(p.omega),
        ou_alpha_(noise.alpha, derive_seed(stream, 1)),
        ou_gamma_(noise.gamma, derive_seed(stream, 2)),
        ou_omega_(noise.omega, derive_seed(stream, 3)) {}

  /// Installs the current parameters for the next step of length h, then
  /// advances the noise.
  void operator()(DuffingKernel<Real>& kernel, std::size_t, double h) {
    kernel.set_drive(scaled(alpha_, ou_alpha_), scaled(gamma_, ou_gamma_), scaled(omega_, ou_omega_));
    ou_alpha_.advance(h);
    ou_gamma_.advance(h);
    ou_omega_.advance(h);
  }
  // Only Duffing kernels carry a drive.
  template <class Kernel>
  void operator()(Kernel&, std::size_t, double) {}

 private:
  static Real scaled(const Real& base, const OuProcess<Real>& ou) { return base * (Real(1.0) + ou.value()); }

  Real alpha_, gamma_, omega_;
  OuProcess<Real> ou_alpha_, ou_gamma_, ou_omega_;
};

/// Integrates the noisy device for `cycles` forcing periods. With all sigma
/// zero the result is bit-identical to integrate() on the same inputs.
inline AnyTrajectory simulate_noisy(const DuffingParams& params, const NoiseSpec& noise, std::span<const double> x0,
                                    double cycles, const PrecisionConfig& cfg, const std::string& name = "duffing") {
  params.validate();
  noise.validate();
  cfg.validate();
  if (!(cycles >= 1.0)) throw InvalidInput("simulate_noisy: need at least one cycle");
  if (x0.size() != 3) throw InvalidInput("simulate_noisy: x0 must have 3 components");
  const SystemSpec spec = make_duffing(params, name);
  const DuffingSystem sys{params};
  const double T = cycles * forcing_period(params);
  return with_precision(cfg.mantissa_bits, [&]<class Real>() -> AnyTrajectory {
    std::vector<Real> start(x0.begin(), x0.end());
    DriveNoise<Real> drive(params, noise, noise.seed);
    auto tr = detail::run_system<Real>(spec, sys, start, T, cfg, true, drive);
    tr.seed = noise.seed;
    return tr;
  });
}

// ---- stroboscopic sampling and empirical measures -----------------------------

struct SectionPoint {
  std::size_t cycle = 0;
  double x = 0.0;
  double y = 0.0;
};

struct SampleSet {
  std::vector<SectionPoint> points;
  DuffingParams params;
  std::size_t burn_in_cycles = 0;
  std::uint64_t seed = 0;
};

namespace detail {

inline double hermite(double t0, double t1, double p0, double p1, double m0, double m1, double t) {
  const double h = t1 - t0;
  const double s = (t - t0) / h;
  const double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * p0 + (s3 - 2 * s2 + s) * h * m0 + (-2 * s3 + 3 * s2) * p1 + (s3 - s2) * h * m1;
}

template <class Real>
SampleSet sample_section(const Trajectory<Real>& tr, const DuffingParams& params, std::size_t burn_in) {
  if (tr.dim != 3) throw InvalidInput("stroboscopic_samples: not a Duffing trajectory");
  const double period = forcing_period(params);
  const double tol = 1e-9 * tr.config.step_size;
  if (tr.duration() + tol < static_cast<double>(burn_in) * period) {
    throw InvalidInput("stroboscopic_samples: trajectory shorter than the burn-in");
  }
  SampleSet out;
  out.params = params;
  out.burn_in_cycles = burn_in;
  out.seed = tr.seed;
  const auto last_cycle = static_cast<std::size_t>(std::floor(tr.duration() / period + 1e-9));
  auto point = [&](std::size_t i) {
    std::array<double, 3> s{};
    for (int k = 0; k < 3; ++k) s[k] = to_double(tr.state(i)[k]);
    return s;
  };
  for (std::size_t k = burn_in + 1; k <= last_cycle; ++k) {
    const double t = static_cast<double>(k) * period;
    auto it = std::lower_bound(tr.times.begin(), tr.times.end(), t - tol);
    std::size_t i = static_cast<std::size_t>(it - tr.times.begin());
    if (i >= tr.size()) i = tr.size() - 1;
    if (std::fabs(tr.times[i] - t) <= tol) {
      const auto s = point(i);
      out.points.push_back({k, s[0], s[1]});
      continue;
    }
    if (i == 0) throw InvalidInput("stroboscopic_samples: sample time before trajectory start");
    const auto a = point(i - 1);
    const auto b = point(i);
    const auto fa = duffing_field<double>(params, a);
    const auto fb = duffing_field<double>(params, b);
    const double t0 = tr.times[i - 1], t1 = tr.times[i];
    out.points.push_back({k, hermite(t0, t1, a[0], b[0], fa[0], fb[0], t), hermite(t0, t1, a[1], b[1], fa[1], fb[1], t)});
  }
  return out;
}

}  // namespace detail

/// Section points (x, y) at t = k 2 pi / omega for k > burn_in, cubic-Hermite
/// interpolated between stored samples when not on the grid.
inline SampleSet stroboscopic_samples(const AnyTrajectory& tr, const DuffingParams& params, std::size_t burn_in) {
  return std::visit([&](const auto& t) { return detail::sample_section(t, params, burn_in); }, tr);
}

struct SectionBox {
  double x_lo = -2.0, x_hi = 2.0, y_lo = -2.0, y_hi = 2.0;
  bool operator==(const SectionBox&) const = default;
};

struct HistogramGrid {
  std::size_t G = 0;
  SectionBox box;
  std::vector<double> masses;  // G*G, row-major: row = y bin, column = x bin
  double overflow_mass = 0.0;
  std::size_t count = 0;

  double mass(std::size_t ix, std::size_t iy) const { return masses[iy * G + ix]; }
  std::size_t occupied() const {
    return static_cast<std::size_t>(std::count_if(masses.begin(), masses.end(), [](double m) { return m > 0.0; }));
  }
};

inline HistogramGrid histogram(std::span<const SectionPoint> samples, std::size_t G, const SectionBox& box) {
  if (G < 2) throw InvalidInput("histogram: grid must be at least 2x2");
  if (samples.empty()) throw InvalidInput("histogram: empty sample set");
  if (!(box.x_hi > box.x_lo && box.y_hi > box.y_lo)) throw InvalidInput("histogram: empty box");
  HistogramGrid h{G, box, std::vector<double>(G * G, 0.0), 0.0, samples.size()};
  std::vector<std::size_t> counts(G * G, 0);
  std::size_t overflow = 0;
  const double wx = (box.x_hi - box.x_lo) / static_cast<double>(G);
  const double wy = (box.y_hi - box.y_lo) / static_cast<double>(G);
  for (const auto& p : samples) {
    if (!(p.x >= box.x_lo && p.x < box.x_hi && p.y >= box.y_lo && p.y < box.y_hi)) {
      ++overflow;
      continue;
    }
    const auto ix = std::min(G - 1, static_cast<std::size_t>((p.x - box.x_lo) / wx));
    const auto iy = std::min(G - 1, static_cast<std::size_t>((p.y - box.y_lo) / wy));
    ++counts[iy * G + ix];
  }
  const double n = static_cast<double>(samples.size());
  for (std::size_t i = 0; i < counts.size(); ++i) h.masses[i] = static_cast<double>(counts[i]) / n;
  h.overflow_mass = static_cast<double>(overflow) / n;
  return h;
}
inline HistogramGrid histogram(const SampleSet& s, std::size_t G, const SectionBox& box) {
  return histogram(std::span<const SectionPoint>(s.points), G, box);
}

struct DistributionDistance {
  double tv = 0.0;
  double kl_sym = 0.0;
};

/// Total variation and symmetrized KL divergence (empty bins smoothed to
/// 1 / (2 * count) before renormalizing). The overflow bin counts as a bin.
inline DistributionDistance distribution_distance(const HistogramGrid& p, const HistogramGrid& q) {
  if (p.G != q.G || !(p.box == q.box)) throw InvalidInput("distribution_distance: grid geometry mismatch");
  std::vector<double> a(p.masses), b(q.masses);
  a.push_back(p.overflow_mass);
  b.push_back(q.overflow_mass);
  DistributionDistance d;
  for (std::size_t i = 0; i < a.size(); ++i) d.tv += std::fabs(a[i] - b[i]);
  d.tv *= 0.5;
  auto smooth = [](std::vector<double>& v, std::size_t count) {
    const double eps = 1.0 / (2.0 * static_cast<double>(std::max<std::size_t>(count, 1)));
    double total = 0.0;
    for (auto& m : v) {
      if (m <= 0.0) m = eps;
      total += m;
    }
    for (auto& m : v) m /= total;
  };
  smooth(a, p.count);
  smooth(b, q.count);
  for (std::size_t i = 0; i < a.size(); ++i) d.kl_sym += (a[i] - b[i]) * std::log(a[i] / b[i]);
  return d;
}

// ---- useful device horizon ----------------------------------------------------

enum class DecorrelationCriterion { TwinSeparation, Autocorrelation };

struct DecorrelationOptions {
  DecorrelationCriterion criterion = DecorrelationCriterion::TwinSeparation;
  std::size_t diameter_cycles = 2000;  // noiseless reference run for the attractor diameter
  std::size_t diameter_burn_in = 100;
  std::size_t jobs = 1;
};

struct DecorrelationResult {
  double cycles = 0.0;  // N_c (median over pairs)
  bool at_ceiling = false;
  double attractor_diameter = 0.0;
  std::vector<double> pair_cycles;
  std::vector<std::uint64_t> pair_seeds;
};

/// Largest distance between section points of a long noiseless run.
inline double attractor_diameter(const DuffingParams& params, std::span<const double> x0, std::size_t cycles,
                                 std::size_t burn_in, const PrecisionConfig& cfg) {
  PrecisionConfig c = cfg;
  c.mantissa_bits = kDoubleMantissaBits;
  const auto tr = integrate_any(make_duffing(params), x0, static_cast<double>(cycles + burn_in) * forcing_period(params), c);
  const auto s = stroboscopic_samples(tr, params, burn_in);
  double best = 0.0;
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    for (std::size_t j = i + 1; j < s.points.size(); ++j) {
      best = std::max(best, std::hypot(s.points[i].x - s.points[j].x, s.points[i].y - s.points[j].y));
    }
  }
  return best;
}

namespace detail {

/// Steps per forcing period for a requested step size (the step is shrunk so
/// that section times fall on the integration grid).
inline std::size_t steps_per_cycle(const DuffingParams& p, double step) {
  return static_cast<std::size_t>(std::max(1.0, std::ceil(forcing_period(p) / step - 1e-9)));
}

template <class Real>
class DeviceRun {
 public:
  DeviceRun(const DuffingParams& p, const NoiseSpec& noise, std::uint64_t stream, std::span<const double> x0,
            const PrecisionConfig& cfg)
      : steps_(steps_per_cycle(p, cfg.step_size)),
        h_(forcing_period(p) / static_cast<double>(steps_)),
        state_(x0.begin(), x0.end()),
        drive_(p, noise, stream),
        stepper_(DuffingKernel<Real>(p, static_cast<std::size_t>(cfg.method_order)), h_) {}

  void advance_cycle() {
    for (std::size_t s = 0; s < steps_; ++s) {
      drive_(stepper_.kernel(), s, h_);
      stepper_.step(state_);
    }
    if (!state_ok<Real>(state_)) throw DivergedTrajectory(0.0, "device run diverged");
  }
  double x() const { return to_double(state_[0]); }
  double y() const { return to_double(state_[1]); }

 private:
  std::size_t steps_;
  double h_;
  std::vector<Real> state_;
  DriveNoise<Real> drive_;
  TaylorStepper<DuffingKernel<Real>, Real> stepper_;
};

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace detail

/// Number of forcing cycles after which the device forgets its initial state.
/// Twin criterion: median over `ensemble` pairs (same x0, independent noise
/// seeds) of the first cycle whose section points are farther apart than half
/// the attractor diameter. Autocorrelation criterion: first lag at which the
/// autocorrelation of the section x coordinate of one noisy run drops below 1/e.
inline DecorrelationResult decorrelation_cycles(const DuffingParams& params, const NoiseSpec& noise,
                                                std::span<const double> x0, std::size_t max_cycles,
                                                std::size_t ensemble, const PrecisionConfig& cfg,
                                                const DecorrelationOptions& opts = {}) {
  params.validate();
  noise.validate();
  cfg.validate();
  if (x0.size() != 3) throw InvalidInput("decorrelation_cycles: x0 must have 3 components");
  if (max_cycles == 0) throw InvalidInput("decorrelation_cycles: max_cycles must be positive");
  DecorrelationResult out;
  if (opts.criterion == DecorrelationCriterion::Autocorrelation) {
    const auto tr = simulate_noisy(params, noise, x0, static_cast<double>(max_cycles + opts.diameter_burn_in), cfg);
    const auto s = stroboscopic_samples(tr, params, opts.diameter_burn_in);
    std::vector<double> xs;
    for (const auto& p : s.points) xs.push_back(p.x);
    double mean = 0.0;
    for (double v : xs) mean += v;
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double v : xs) var += (v - mean) * (v - mean);
    out.cycles = static_cast<double>(max_cycles);
    out.at_ceiling = true;
    for (std::size_t lag = 1; lag < xs.size() / 2; ++lag) {
      double c = 0.0;
      for (std::size_t i = 0; i + lag < xs.size(); ++i) c += (xs[i] - mean) * (xs[i + lag] - mean);
      if (var > 0.0 && c / var < std::exp(-1.0)) {
        out.cycles = static_cast<double>(lag);
        out.at_ceiling = false;
        break;
      }
    }
    out.pair_cycles = {out.cycles};
    out.pair_seeds = {noise.seed};
    return out;
  }

  if (ensemble < 10) throw InvalidInput("decorrelation_cycles: ensemble needs at least 10 seed pairs");
  out.attractor_diameter = attractor_diameter(params, x0, opts.diameter_cycles, opts.diameter_burn_in, cfg);
  const double threshold = 0.5 * out.attractor_diameter;
  for (std::size_t p = 0; p < ensemble; ++p) out.pair_seeds.push_back(derive_seed(noise.seed, p));
  out.pair_cycles = parallel_map(ensemble, opts.jobs, [&](std::size_t p) {
    return with_precision(cfg.mantissa_bits, [&]<class Real>() {
      detail::DeviceRun<Real> a(params, noise, derive_seed(out.pair_seeds[p], 0), x0, cfg);
      detail::DeviceRun<Real> b(params, noise, derive_seed(out.pair_seeds[p], 1), x0, cfg);
      for (std::size_t k = 1; k <= max_cycles; ++k) {
        a.advance_cycle();
        b.advance_cycle();
        if (std::hypot(a.x() - b.x(), a.y() - b.y()) > threshold) return static_cast<double>(k);
      }
      return static_cast<double>(max_cycles);
    });
  });
  out.cycles = detail::median(out.pair_cycles);
  out.at_ceiling = out.cycles >= static_cast<double>(max_cycles);
  return out;
}

struct SupremacyRatio {
  double ratio = 0.0;
  bool lower_bound = false;  // analog N_c hit its ceiling, so the true ratio is at least this
};

inline SupremacyRatio supremacy_ratio(double analog_cycles, double digital_cycles, bool analog_at_ceiling = false) {
  if (!(analog_cycles > 0.0) || !(digital_cycles > 0.0)) throw InvalidInput("supremacy_ratio: inputs must be positive");
  return {analog_cycles / digital_cycles, analog_at_ceiling};
}

/// Quartz-clock anchors: device coherence ~1e6 cycles against ~1e4 digitally
/// reliable cycles. Kept as documentation; desk runs use scaled noise.
inline constexpr double kQuartzDeviceCycles = 1e6;
inline constexpr double kQuartzSupremacyRatio = kQuartzDeviceCycles / kSupercomputerDuffingCycles;

// ---- export -----------------------------------------------------------------------

inline void write_samples_csv(std::ostream& os, const SampleSet& s) {
  os << "cycle,x,y\n";
  for (const auto& p : s.points) os << p.cycle << "," << to_decimal(p.x) << "," << to_decimal(p.y) << "\n";
}

inline void write_histogram_csv(std::ostream& os, const HistogramGrid& h) {
  os << "# G=" << h.G << " x_lo=" << to_decimal(h.box.x_lo) << " x_hi=" << to_decimal(h.box.x_hi)
     << " y_lo=" << to_decimal(h.box.y_lo) << " y_hi=" << to_decimal(h.box.y_hi)
     << " overflow_mass=" << to_decimal(h.overflow_mass) << " count=" << h.count << "\n";
  for (std::size_t iy = 0; iy < h.G; ++iy) {
    for (std::size_t ix = 0; ix < h.G; ++ix) {
      if (ix > 0) os << ",";
      os << to_decimal(h.mass(ix, iy));
    }
    os << "\n";
  }
}

}  // namespace chaosbench
