#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "chaosbench/analog.hpp"
#include "chaosbench/presets.hpp"

using namespace chaosbench;

namespace {

const DuffingParams kHolmes{};
const std::vector<double> kX0{0.1, 0.0, 0.0};

PrecisionConfig device_cfg(int bits = 53) { return {bits, 8, forcing_period(kHolmes) / 48.0, 48}; }

NoiseSpec gamma_noise(double sigma, std::uint64_t seed) {
  NoiseSpec n;
  n.gamma.sigma = Magnitude::of(sigma);
  n.seed = seed;
  return n;
}

NoiseSpec all_noise(double sigma, std::uint64_t seed) {
  NoiseSpec n;
  n.alpha.sigma = n.gamma.sigma = n.omega.sigma = Magnitude::of(sigma);
  n.seed = seed;
  return n;
}

std::vector<SectionPoint> cluster(double x, double y, std::size_t n) {
  std::vector<SectionPoint> v;
  for (std::size_t i = 0; i < n; ++i) v.push_back({i, x, y});
  return v;
}

}  // namespace

TEST(Magnitude, ParsesTinyExponents) {
  const auto m = Magnitude::parse("2.5e-339");
  EXPECT_EQ(m.mantissa, 2.5);
  EXPECT_EQ(m.exp10, -339);
  EXPECT_EQ(m.to_double(), 0.0);
  EXPECT_EQ(m.str(), "2.5e-339");
  PrecisionScope scope(1200);
  const BigFloat v = m.value<BigFloat>() * BigFloat(1e300) * BigFloat(1e39);
  EXPECT_NEAR(to_double(v), 2.5, 1e-12);
  EXPECT_THROW(Magnitude::parse("-1e-3"), InvalidInput);
  EXPECT_THROW(Magnitude::parse("1e-3x"), InvalidInput);
  EXPECT_THROW(Magnitude::parse("abc"), InvalidInput);
}

TEST(SimulateNoisy, ZeroNoiseIsBitIdenticalToIntegrate) {
  for (int bits : {53, 113}) {
    NoiseSpec zero;
    zero.seed = 77;
    const auto cfg = device_cfg(bits);
    const auto noisy = simulate_noisy(kHolmes, zero, kX0, 20.0, cfg);
    const auto plain = integrate_any(make_duffing(kHolmes), kX0, 20.0 * forcing_period(kHolmes), cfg);
    std::ostringstream a, b;
    write_trajectory_csv(a, noisy);
    write_trajectory_csv(b, plain);
    EXPECT_EQ(a.str(), b.str()) << bits;
  }
}

TEST(SimulateNoisy, SeedDeterminism) {
  const auto a = simulate_noisy(kHolmes, gamma_noise(1e-3, 5), kX0, 10.0, device_cfg());
  const auto b = simulate_noisy(kHolmes, gamma_noise(1e-3, 5), kX0, 10.0, device_cfg());
  EXPECT_EQ(std::get<Trajectory<double>>(a).states, std::get<Trajectory<double>>(b).states);
}

TEST(SimulateNoisy, IndependentSeedsSeparate) {
  const auto a = std::get<Trajectory<double>>(simulate_noisy(kHolmes, gamma_noise(1e-3, 1), kX0, 40.0, device_cfg()));
  const auto b = std::get<Trajectory<double>>(simulate_noisy(kHolmes, gamma_noise(1e-3, 2), kX0, 40.0, device_cfg()));
  auto rms = [&](std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i)
      for (std::size_t k = 0; k < 2; ++k) s += std::pow(a.state(i)[k] - b.state(i)[k], 2);
    return std::sqrt(s / static_cast<double>(hi - lo));
  };
  // a.size() = 41 samples, one per cycle
  ASSERT_EQ(a.size(), 41u);
  const double early = rms(1, 6), late = rms(30, 41);
  EXPECT_GT(early, 0.0);
  EXPECT_GT(late, 10 * early);
}

TEST(OuProcess, StationaryStd) {
  NoiseChannel ch{Magnitude::of(0.2), 0.5};
  OuProcess<double> ou(ch, 123);
  const double h = 0.01;
  for (int i = 0; i < 2000; ++i) ou.advance(h);
  double s = 0.0, s2 = 0.0;
  const int n = 2000000;
  for (int i = 0; i < n; ++i) {
    ou.advance(h);
    s += ou.value();
    s2 += ou.value() * ou.value();
  }
  const double mean = s / n;
  const double sd = std::sqrt(s2 / n - mean * mean);
  EXPECT_NEAR(sd, 0.2, 0.05 * 0.2);
}

TEST(OuProcess, VarianceReachedAfterTenTau) {
  NoiseChannel ch{Magnitude::of(1.0), 2.0};
  double s2 = 0.0;
  const int members = 4000;
  for (int m = 0; m < members; ++m) {
    OuProcess<double> ou(ch, derive_seed(9, m));
    for (int i = 0; i < 200; ++i) ou.advance(0.1);  // 20 time units = 10 tau
    s2 += ou.value() * ou.value();
  }
  EXPECT_NEAR(std::sqrt(s2 / members), 1.0, 0.05);
}

TEST(Stroboscopic, BurnInOnlyGivesEmptySet) {
  const auto tr = integrate_any(make_duffing(kHolmes), kX0, 10.0 * forcing_period(kHolmes), device_cfg());
  EXPECT_TRUE(stroboscopic_samples(tr, kHolmes, 10).points.empty());
  EXPECT_EQ(stroboscopic_samples(tr, kHolmes, 4).points.size(), 6u);
  EXPECT_THROW(stroboscopic_samples(tr, kHolmes, 11), InvalidInput);
}

TEST(Stroboscopic, PeriodicPresetIsOneTightCluster) {
  const auto& p = find_preset("duffing-periodic");
  const auto d = p.system.duffing();
  const auto tr = integrate_any(p.system, p.x0, 500.0 * forcing_period(d), PrecisionConfig{53, 8, p.step, 64});
  const auto s = stroboscopic_samples(tr, d, 400);
  ASSERT_EQ(s.points.size(), 100u);
  double diam = 0.0;
  for (const auto& a : s.points)
    for (const auto& b : s.points) diam = std::max(diam, std::hypot(a.x - b.x, a.y - b.y));
  EXPECT_LT(diam, 1e-3);
}

TEST(Stroboscopic, ChaoticPresetSpreadsOverSection) {
  const auto tr = integrate_any(make_duffing(kHolmes), kX0, 2100.0 * forcing_period(kHolmes), device_cfg());
  const auto s = stroboscopic_samples(tr, kHolmes, 100);
  EXPECT_EQ(s.points.size(), 2000u);
  EXPECT_GT(histogram(s, 64, SectionBox{}).occupied(), 50u);
}

TEST(Stroboscopic, OffGridInterpolationMatchesOnGridRun) {
  const double period = forcing_period(kHolmes);
  const auto on = integrate_any(make_duffing(kHolmes), kX0, 5.0 * period, PrecisionConfig{113, 16, period / 64.0, 1});
  const auto off = integrate_any(make_duffing(kHolmes), kX0, 5.0 * period, PrecisionConfig{113, 16, 0.0917, 1});
  const auto a = stroboscopic_samples(on, kHolmes, 0);
  const auto b = stroboscopic_samples(off, kHolmes, 0);
  ASSERT_EQ(a.points.size(), 5u);
  ASSERT_EQ(b.points.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_NEAR(a.points[i].x, b.points[i].x, 1e-5);
    EXPECT_NEAR(a.points[i].y, b.points[i].y, 1e-5);
  }
}

TEST(Histogram, Examples) {
  const SectionBox box{};
  const auto one = histogram(cluster(0.3, -0.2, 50), 8, box);
  EXPECT_EQ(*std::max_element(one.masses.begin(), one.masses.end()), 1.0);
  EXPECT_EQ(one.occupied(), 1u);

  auto two = cluster(-1.8, -1.8, 40);
  for (const auto& p : cluster(1.8, 1.8, 40)) two.push_back(p);
  const auto h2 = histogram(two, 8, box);
  EXPECT_EQ(h2.occupied(), 2u);
  EXPECT_EQ(h2.mass(0, 0), 0.5);
  EXPECT_EQ(h2.mass(7, 7), 0.5);

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<SectionPoint> flat;
  const std::size_t count = 200000;
  for (std::size_t i = 0; i < count; ++i) flat.push_back({i, u(rng), u(rng)});
  const auto hf = histogram(flat, 16, box);
  double total = 0.0;
  for (double m : hf.masses) {
    EXPECT_NEAR(m, 1.0 / 256, 4.0 / std::sqrt(static_cast<double>(count)));
    total += m;
  }
  EXPECT_NEAR(total, 1.0, 1e-12);

  EXPECT_THROW(histogram(std::vector<SectionPoint>{}, 8, box), InvalidInput);
  EXPECT_THROW(histogram(cluster(0, 0, 3), 1, box), InvalidInput);
}

TEST(Histogram, OverflowMass) {
  auto pts = cluster(0.0, 0.0, 3);
  pts.push_back({3, 5.0, 0.0});
  const auto h = histogram(pts, 4, SectionBox{});
  EXPECT_DOUBLE_EQ(h.overflow_mass, 0.25);
}

TEST(DistributionDistance, Examples) {
  const SectionBox box{};
  const auto p = histogram(cluster(0.3, 0.3, 10), 8, box);
  const auto q = histogram(cluster(-1.3, 1.3, 10), 8, box);
  const auto same = distribution_distance(p, p);
  EXPECT_EQ(same.tv, 0.0);
  EXPECT_EQ(same.kl_sym, 0.0);
  EXPECT_DOUBLE_EQ(distribution_distance(p, q).tv, 1.0);
  EXPECT_GT(distribution_distance(p, q).kl_sym, 0.0);
  EXPECT_THROW(distribution_distance(p, histogram(cluster(0, 0, 3), 4, box)), InvalidInput);
}

TEST(Decorrelation, ZeroNoiseHitsCeiling) {
  NoiseSpec zero;
  DecorrelationOptions o;
  o.diameter_cycles = 200;
  const auto r = decorrelation_cycles(kHolmes, zero, kX0, 40, 10, device_cfg(), o);
  EXPECT_EQ(r.cycles, 40.0);
  EXPECT_TRUE(r.at_ceiling);
  EXPECT_GT(r.attractor_diameter, 1.0);
}

TEST(Decorrelation, NonIncreasingInNoise) {
  DecorrelationOptions o;
  o.diameter_cycles = 500;
  double prev = 1e9;
  for (double sigma : {1e-9, 1e-7, 1e-5, 1e-3}) {
    const auto r = decorrelation_cycles(kHolmes, all_noise(sigma, 21), kX0, 400, 10, device_cfg(), o);
    EXPECT_FALSE(r.at_ceiling) << sigma;
    EXPECT_LE(r.cycles, prev) << sigma;
    prev = r.cycles;
  }
}

TEST(Decorrelation, MedianStableAcrossSeedBatches) {
  DecorrelationOptions o;
  o.diameter_cycles = 500;
  const auto a = decorrelation_cycles(kHolmes, all_noise(1e-8, 100), kX0, 400, 12, device_cfg(), o);
  const auto b = decorrelation_cycles(kHolmes, all_noise(1e-8, 200), kX0, 400, 12, device_cfg(), o);
  EXPECT_NEAR(a.cycles, b.cycles, 0.25 * a.cycles);
}

TEST(Decorrelation, Validation) {
  EXPECT_THROW(decorrelation_cycles(kHolmes, NoiseSpec{}, kX0, 10, 9, device_cfg()), InvalidInput);
  EXPECT_THROW(decorrelation_cycles(kHolmes, NoiseSpec{}, kX0, 0, 10, device_cfg()), InvalidInput);
}

TEST(SupremacyRatio, Examples) {
  EXPECT_DOUBLE_EQ(supremacy_ratio(1e6, 1e4).ratio, 100.0);
  EXPECT_DOUBLE_EQ(kQuartzSupremacyRatio, 100.0);
  EXPECT_DOUBLE_EQ(supremacy_ratio(37.0, 37.0).ratio, 1.0);
  EXPECT_TRUE(supremacy_ratio(500.0, 40.0, true).lower_bound);
  EXPECT_FALSE(supremacy_ratio(500.0, 40.0).lower_bound);
  EXPECT_THROW(supremacy_ratio(0.0, 1.0), InvalidInput);
  EXPECT_THROW(supremacy_ratio(1.0, -1.0), InvalidInput);
}

TEST(SampleCsv, Header) {
  SampleSet s;
  s.points = cluster(0.5, 0.25, 2);
  std::ostringstream os;
  write_samples_csv(os, s);
  EXPECT_EQ(os.str(), "cycle,x,y\n0,0.5,0.25\n1,0.5,0.25\n");
}
