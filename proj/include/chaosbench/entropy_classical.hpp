#pragma once

// Coarse-grained (Shannon) entropy of an ensemble that starts inside a single
// partition cell. Counting is done by sorting cell ids, so the partition can
// be far larger than memory; only occupied cells cost anything.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "chaosbench/dynamics.hpp"
#include "chaosbench/entropy_curve.hpp"
#include "chaosbench/errors.hpp"
#include "chaosbench/integrate.hpp"
#include "chaosbench/parallel.hpp"
#include "chaosbench/random.hpp"
#include "chaosbench/real.hpp"
#include "chaosbench/taylor.hpp"

namespace chaosbench {

/// Regular grid of cubes of side eps over [lower, upper]; anything outside maps
/// to one overflow cell. Covers the leading lower.size() state coordinates.
class PartitionSpec {
 public:
  static constexpr std::uint64_t kMaxCells = std::uint64_t{1} << 62;

  PartitionSpec(std::vector<double> lower, std::vector<double> upper, double eps)
      : lower_(std::move(lower)), upper_(std::move(upper)), eps_(eps) {
    if (lower_.empty() || lower_.size() != upper_.size()) throw InvalidInput("PartitionSpec: box bounds mismatch");
    if (!(eps_ > 0.0) || !std::isfinite(eps_)) throw InvalidInput("PartitionSpec: eps must be positive");
    double total = 1.0;
    for (std::size_t k = 0; k < lower_.size(); ++k) {
      if (!(upper_[k] > lower_[k]) || !std::isfinite(lower_[k]) || !std::isfinite(upper_[k]))
        throw InvalidInput("PartitionSpec: box_upper must exceed box_lower");
      const double n = std::ceil((upper_[k] - lower_[k]) / eps_ - 1e-9);
      counts_.push_back(static_cast<std::uint64_t>(std::max(1.0, n)));
      total *= static_cast<double>(counts_.back());
    }
    if (total >= static_cast<double>(kMaxCells)) throw ResourceExceeded("PartitionSpec: too many cells");
    total_ = 1;
    for (auto c : counts_) total_ *= c;
  }

  std::size_t dims() const { return lower_.size(); }
  double eps() const { return eps_; }
  const std::vector<double>& lower() const { return lower_; }
  const std::vector<double>& upper() const { return upper_; }
  std::uint64_t cells_along(std::size_t k) const { return counts_[k]; }
  std::uint64_t total_cells() const { return total_; }

  /// Cell index of the leading dims() coordinates; nullopt means overflow.
  template <class Range>
  std::optional<std::uint64_t> cell_of(const Range& p) const {
    std::uint64_t id = 0;
    for (std::size_t k = 0; k < dims(); ++k) {
      const double v = static_cast<double>(p[k]);
      if (!(v >= lower_[k] && v < upper_[k])) return std::nullopt;
      auto i = static_cast<std::uint64_t>((v - lower_[k]) / eps_);
      if (i >= counts_[k]) i = counts_[k] - 1;
      id = id * counts_[k] + i;
    }
    return id;
  }

  /// Lower corner of a cell (upper corner is this plus eps, clipped to the box).
  std::vector<double> cell_corner(std::uint64_t id) const {
    std::vector<double> c(dims());
    for (std::size_t k = dims(); k-- > 0;) {
      c[k] = lower_[k] + static_cast<double>(id % counts_[k]) * eps_;
      id /= counts_[k];
    }
    return c;
  }

  std::string descriptor() const {
    std::ostringstream os;
    os << "eps=" << eps_ << ";box=";
    for (std::size_t k = 0; k < dims(); ++k) os << (k ? "x" : "") << "[" << lower_[k] << "," << upper_[k] << "]";
    return os.str();
  }

 private:
  std::vector<double> lower_, upper_;
  double eps_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

inline PartitionSpec lorenz_partition(double eps) { return PartitionSpec({-25.0, -30.0, 0.0}, {25.0, 30.0, 55.0}, eps); }
inline PartitionSpec duffing_section_partition(double eps) { return PartitionSpec({-2.0, -2.0}, {2.0, 2.0}, eps); }

/// Default partition for a system: full state for flows, (x, y) section for Duffing.
inline PartitionSpec default_partition(const SystemSpec& system, double eps) {
  if (system.is_duffing()) return duffing_section_partition(eps);
  if (std::holds_alternative<LorenzSystem>(system.system)) return lorenz_partition(eps);
  const std::size_t d = system.dimension();
  return PartitionSpec(std::vector<double>(d, -10.0), std::vector<double>(d, 10.0), eps);
}

struct EnsembleOptions {
  std::size_t members = 10000;
  double duration = 20.0;
  double sample_dt = 0.1;  // rounded to whole steps; for Duffing use whole forcing periods
  std::uint64_t seed = 1;
  std::size_t jobs = 1;
  double kick_interval = 0.0;  // > 0: re-draw each member uniformly inside its current cell every interval
};

struct Ensemble {
  SystemSpec system;
  std::vector<Trajectory<double>> members;  // diverged members are dropped
  std::size_t requested = 0;
  std::size_t diverged = 0;
  std::uint64_t seed = 0;
  double kick_interval = 0.0;
  std::uint64_t initial_cell = 0;
};

namespace detail {

inline std::size_t whole_steps(double span, double h, const char* what) {
  const double r = span / h;
  const double n = std::round(r);
  if (n < 1.0 || std::fabs(r - n) > 1e-6 * std::max(1.0, r))
    throw InvalidInput(std::string("evolve_ensemble: ") + what + " must be a whole number of steps");
  return static_cast<std::size_t>(n);
}

template <class Rng>
void draw_in_cell(const PartitionSpec& part, std::uint64_t cell, Rng& rng, std::span<double> out) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto corner = part.cell_corner(cell);
  for (std::size_t k = 0; k < part.dims(); ++k) {
    const double hi = std::min(corner[k] + part.eps(), part.upper()[k]);
    out[k] = corner[k] + u(rng) * (hi - corner[k]);
  }
}

template <class Real, class System>
std::optional<Trajectory<double>> run_member(const SystemSpec& spec, const System& sys, const PartitionSpec& part,
                                             std::uint64_t cell, std::span<const double> center,
                                             const EnsembleOptions& opts, const PrecisionConfig& cfg,
                                             std::uint64_t member) {
  const std::size_t d = sys.dimension();
  const double h = cfg.step_size;
  const std::size_t per_sample = whole_steps(opts.sample_dt, h, "sample_dt");
  const std::size_t samples = static_cast<std::size_t>(std::floor(opts.duration / opts.sample_dt + 1e-9));
  const std::size_t per_kick = opts.kick_interval > 0.0 ? whole_steps(opts.kick_interval, h, "kick_interval") : 0;

  std::mt19937_64 rng(derive_seed(opts.seed, member));
  std::vector<double> x(center.begin(), center.end());
  draw_in_cell(part, cell, rng, x);

  Trajectory<double> tr{spec, cfg, opts.seed, d, {}, {}, std::nullopt};
  tr.times.reserve(samples + 1);
  tr.states.reserve((samples + 1) * d);
  std::vector<Real> state(x.begin(), x.end());
  auto record = [&](double t) {
    tr.times.push_back(t);
    for (const auto& v : state) tr.states.push_back(to_double(v));
  };
  record(0.0);
  TaylorStepper<typename KernelFor<System, Real>::type, Real> stepper(
      make_kernel<System, Real>(sys, static_cast<std::size_t>(cfg.method_order)), h);
  const std::size_t total = samples * per_sample;
  for (std::size_t n = 1; n <= total; ++n) {
    stepper.step(state);
    if (!state_ok<Real>(state)) return std::nullopt;
    if (per_kick && n % per_kick == 0) {
      for (std::size_t k = 0; k < d; ++k) x[k] = to_double(state[k]);
      if (auto c = part.cell_of(x)) {
        draw_in_cell(part, *c, rng, x);
        for (std::size_t k = 0; k < part.dims(); ++k) state[k] = Real(x[k]);
      }
    }
    if (n % per_sample == 0) record(static_cast<double>(n) * h);
  }
  return tr;
}

}  // namespace detail

/// K members drawn uniformly inside the partition cell containing `center`
/// (coordinates past the partition's dims are copied from center), each
/// sampled every sample_dt up to duration.
inline Ensemble evolve_ensemble(const SystemSpec& system, const PartitionSpec& partition,
                                std::span<const double> center, const EnsembleOptions& opts,
                                const PrecisionConfig& cfg) {
  cfg.validate();
  system.validate();
  if (opts.members < 100) throw InvalidInput("evolve_ensemble: need at least 100 members");
  if (center.size() != system.dimension()) throw InvalidInput("evolve_ensemble: center has the wrong dimension");
  if (partition.dims() > system.dimension()) throw InvalidInput("evolve_ensemble: partition has too many axes");
  if (!(opts.duration >= 0.0) || !(opts.sample_dt > 0.0)) throw InvalidInput("evolve_ensemble: bad time grid");
  const auto cell = partition.cell_of(center);
  if (!cell) throw InvalidInput("evolve_ensemble: initial point lies outside the partition box");

  auto results = parallel_map(opts.members, opts.jobs, [&](std::size_t i) {
    return with_precision(cfg.mantissa_bits, [&]<class Real>() {
      return std::visit(
          [&](const auto& sys) {
            return detail::run_member<Real>(system, sys, partition, *cell, center, opts, cfg, i);
          },
          system.system);
    });
  });
  Ensemble e{system, {}, opts.members, 0, opts.seed, opts.kick_interval, *cell};
  e.members.reserve(results.size());
  for (auto& r : results) {
    if (r) e.members.push_back(std::move(*r));
    else ++e.diverged;
  }
  return e;
}

/// Shannon entropy (nats) of the cell occupancy at every sample time. The
/// overflow cell counts as one cell.
inline EntropyCurve coarse_entropy_curve(const Ensemble& ensemble, const PartitionSpec& partition) {
  if (ensemble.members.empty()) throw InvalidInput("coarse_entropy_curve: empty ensemble");
  const std::size_t samples = ensemble.members.front().size();
  for (const auto& m : ensemble.members) {
    if (m.size() != samples) throw InvalidInput("coarse_entropy_curve: members have different sample counts");
    if (m.dim < partition.dims()) throw InvalidInput("coarse_entropy_curve: partition has too many axes");
  }
  const double K = static_cast<double>(ensemble.members.size());
  EntropyCurve c;
  std::vector<std::uint64_t> ids;
  ids.reserve(ensemble.members.size());
  for (std::size_t j = 0; j < samples; ++j) {
    ids.clear();
    std::size_t overflow = 0;
    for (const auto& m : ensemble.members) {
      if (auto id = partition.cell_of(m.state(j))) ids.push_back(*id);
      else ++overflow;
    }
    std::sort(ids.begin(), ids.end());
    double H = 0.0;
    std::size_t occupied = 0;
    for (std::size_t a = 0; a < ids.size();) {
      std::size_t b = a;
      while (b < ids.size() && ids[b] == ids[a]) ++b;
      const double p = static_cast<double>(b - a) / K;
      H -= p * std::log(p);
      ++occupied;
      a = b;
    }
    if (overflow > 0) {
      const double p = static_cast<double>(overflow) / K;
      H -= p * std::log(p);
    }
    if (overflow == ensemble.members.size()) {
      c.flagged = true;
      c.note = "all members in the overflow cell";
    }
    c.times.push_back(ensemble.members.front().times[j]);
    c.entropy.push_back(std::max(0.0, H));
    c.occupied_cells.push_back(occupied);
    c.overflow_mass.push_back(static_cast<double>(overflow) / K);
  }
  c.metadata = {{"system", ensemble.system.name},
                {"partition", partition.descriptor()},
                {"K", std::to_string(ensemble.members.size())},
                {"diverged", std::to_string(ensemble.diverged)},
                {"seed", std::to_string(ensemble.seed)},
                {"kick_interval", to_decimal(ensemble.kick_interval)}};
  return c;
}

/// Initial-cell centres spread along the attractor: the state after `settle`
/// time units from x0, then every `spacing` time units after that.
inline std::vector<std::vector<double>> attractor_points(const SystemSpec& system, std::span<const double> x0,
                                                         std::size_t count, double settle, double spacing,
                                                         const PrecisionConfig& cfg) {
  if (count == 0) throw InvalidInput("attractor_points: count must be positive");
  if (!(spacing > 0.0) || !(settle >= 0.0)) throw InvalidInput("attractor_points: bad spacing");
  std::vector<std::vector<double>> out;
  std::vector<double> x(x0.begin(), x0.end());
  auto advance = [&](double T) {
    if (T <= 0.0) return;
    const auto tr = integrate_any(system, x, T, cfg);
    std::visit(
        [&](const auto& t) {
          const auto s = t.final_state();
          for (std::size_t k = 0; k < x.size(); ++k) x[k] = to_double(s[k]);
        },
        tr);
  };
  advance(settle);
  for (std::size_t k = 0; k < count; ++k) {
    if (k > 0) advance(spacing);
    out.push_back(x);
  }
  return out;
}

/// Coarse-grained entropy averaged over ensembles started in the cells around
/// each centre. A single cell samples finite-time stretching rates that vary
/// strongly along the attractor; the average over centres spread along it
/// estimates the mean information production. The ensembles start in cells of
/// partitions[0] and every ensemble is binned with every partition.
inline std::vector<EntropyCurve> mean_entropy_curves(const SystemSpec& system,
                                                     const std::vector<PartitionSpec>& partitions,
                                                     const std::vector<std::vector<double>>& centers,
                                                     const EnsembleOptions& opts, const PrecisionConfig& cfg) {
  if (partitions.empty() || centers.empty()) throw InvalidInput("mean_entropy_curves: nothing to average");
  std::vector<EntropyCurve> mean(partitions.size());
  std::vector<std::vector<double>> occupied(partitions.size());
  std::size_t diverged = 0, members = 0;
  for (std::size_t c = 0; c < centers.size(); ++c) {
    EnsembleOptions o = opts;
    o.seed = derive_seed(opts.seed, c);
    const Ensemble e = evolve_ensemble(system, partitions[0], centers[c], o, cfg);
    diverged += e.diverged;
    members += e.members.size();
    for (std::size_t p = 0; p < partitions.size(); ++p) {
      const EntropyCurve cv = coarse_entropy_curve(e, partitions[p]);
      if (c == 0) {
        mean[p] = cv;
        occupied[p].assign(cv.occupied_cells.begin(), cv.occupied_cells.end());
        continue;
      }
      if (cv.size() != mean[p].size()) throw InvalidInput("mean_entropy_curves: curves differ in length");
      for (std::size_t i = 0; i < cv.size(); ++i) {
        mean[p].entropy[i] += cv.entropy[i];
        mean[p].overflow_mass[i] += cv.overflow_mass[i];
        occupied[p][i] += static_cast<double>(cv.occupied_cells[i]);
      }
      if (cv.flagged) {
        mean[p].flagged = true;
        mean[p].note = cv.note;
      }
    }
  }
  const double n = static_cast<double>(centers.size());
  for (std::size_t p = 0; p < partitions.size(); ++p) {
    auto& m = mean[p];
    for (std::size_t i = 0; i < m.size(); ++i) {
      m.entropy[i] /= n;
      m.overflow_mass[i] /= n;
      m.occupied_cells[i] = static_cast<std::size_t>(std::llround(occupied[p][i] / n));
    }
    m.metadata = {{"system", system.name},
                  {"partition", partitions[p].descriptor()},
                  {"initial_cells", std::to_string(centers.size())},
                  {"K", std::to_string(opts.members)},
                  {"members_kept", std::to_string(members)},
                  {"diverged", std::to_string(diverged)},
                  {"seed", std::to_string(opts.seed)},
                  {"kick_interval", to_decimal(opts.kick_interval)}};
  }
  return mean;
}

/// Plateau value: mean entropy over the last tail_fraction of the samples.
inline double curve_ceiling(const EntropyCurve& c, double tail_fraction = 0.2) {
  if (c.size() == 0) throw InvalidInput("curve_ceiling: empty curve");
  const auto n = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(tail_fraction * static_cast<double>(c.size()))));
  double s = 0.0;
  for (std::size_t i = c.size() - n; i < c.size(); ++i) s += c.entropy[i];
  return s / static_cast<double>(n);
}

}  // namespace chaosbench
