#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "chaosbench/errors.hpp"
#include "chaosbench/real.hpp"
#include "chaosbench/stats.hpp"

namespace chaosbench {

/// Entropy (nats) against time, with the support statistics behind each value.
struct EntropyCurve {
  std::vector<double> times;
  std::vector<double> entropy;
  std::vector<std::size_t> occupied_cells;
  std::vector<double> overflow_mass;
  /// Free-form descriptors written into exports (partition, N, M, K, seed, ...).
  std::vector<std::pair<std::string, std::string>> metadata;
  bool flagged = false;
  std::string note;

  std::size_t size() const { return times.size(); }
  double saturation() const {
    double m = 0.0;
    for (double h : entropy) m = std::max(m, h);
    return m;
  }
};

/// Ordinary least squares of H(t) over samples with t in [t_start, t_end].
inline LineFit fit_entropy_slope(const EntropyCurve& curve, double t_start, double t_end) {
  std::vector<double> t, h;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (curve.times[i] >= t_start && curve.times[i] <= t_end) {
      t.push_back(curve.times[i]);
      h.push_back(curve.entropy[i]);
    }
  }
  if (t.size() < 5) throw InvalidInput("fit_entropy_slope: fewer than 5 samples in the window");
  return fit_line(t, h);
}

struct SlopeWindow {
  double t_start = 0.0;
  double t_end = 0.0;
  LineFit fit;
};

/// Longest window with r^2 >= min_r2 whose entropy stays between lo and hi
/// fractions of the curve's maximum. Throws if no window of >= 5 samples fits.
inline SlopeWindow auto_slope_window(const EntropyCurve& curve, double lo = 0.1, double hi = 0.6,
                                     double min_r2 = 0.98) {
  const double sat = curve.saturation();
  const std::size_t n = curve.size();
  SlopeWindow best;
  std::size_t best_len = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(curve.entropy[i] >= lo * sat && curve.entropy[i] <= hi * sat)) continue;
    // extend j while every sample stays in the band; keep the longest fitting window
    std::size_t j = i;
    while (j + 1 < n && curve.entropy[j + 1] >= lo * sat && curve.entropy[j + 1] <= hi * sat) ++j;
    for (std::size_t end = j; end + 1 >= i + 5 && end - i + 1 > best_len; --end) {
      std::vector<double> t(curve.times.begin() + static_cast<std::ptrdiff_t>(i),
                            curve.times.begin() + static_cast<std::ptrdiff_t>(end + 1));
      std::vector<double> h(curve.entropy.begin() + static_cast<std::ptrdiff_t>(i),
                            curve.entropy.begin() + static_cast<std::ptrdiff_t>(end + 1));
      const auto f = fit_line(t, h);
      if (f.r_squared >= min_r2) {
        best = {curve.times[i], curve.times[end], f};
        best_len = end - i + 1;
        break;
      }
      if (end == 0) break;
    }
  }
  if (best_len == 0) throw InvalidInput("auto_slope_window: no linear window found");
  return best;
}

/// CSV t,entropy_nats,occupied_cells,overflow_mass preceded by '#' metadata lines.
inline void write_entropy_csv(std::ostream& os, const EntropyCurve& c) {
  for (const auto& [k, v] : c.metadata) os << "# " << k << "=" << v << "\n";
  os << "t,entropy_nats,occupied_cells,overflow_mass\n";
  for (std::size_t i = 0; i < c.size(); ++i) {
    os << to_decimal(c.times[i]) << "," << to_decimal(c.entropy[i]) << "," << c.occupied_cells[i] << ","
       << to_decimal(c.overflow_mass[i]) << "\n";
  }
}

}  // namespace chaosbench
