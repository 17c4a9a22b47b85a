#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "chaosbench/dynamics.hpp"
#include "chaosbench/presets.hpp"

using namespace chaosbench;

namespace {

DuffingParams sample_duffing() { return {1.0, 1.0, 0.3, 0.5, 1.2}; }

void expect_vec(const std::vector<double>& got, const std::vector<double>& want, double tol = 1e-12) {
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], tol) << "component " << i;
}

// Central differences with step 1e-8, compared entrywise with relative tolerance
// (absolute near zero entries). The differences are taken at 128 bits so that
// cancellation in f(s+h) - f(s-h) does not swamp the 1e-6 tolerance.
template <class Field, class Jac>
void check_jacobian(Field field, Jac jac, const std::vector<double>& s) {
  const auto J = jac(std::span<const double>(s));
  PrecisionScope scope(128);
  const BigFloat h(1e-8);
  for (std::size_t j = 0; j < s.size(); ++j) {
    std::vector<BigFloat> sp(s.begin(), s.end()), sm(s.begin(), s.end());
    sp[j] += h;
    sm[j] -= h;
    const auto fp = field(std::span<const BigFloat>(sp));
    const auto fm = field(std::span<const BigFloat>(sm));
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double fd = to_double((fp[i] - fm[i]) / (BigFloat(2.0) * h));
      const double scale = std::max(1.0, std::fabs(J(i, j)));
      EXPECT_NEAR(fd, J(i, j), 1e-6 * scale) << "entry (" << i << "," << j << ")";
    }
  }
}

}  // namespace

TEST(DuffingField, OriginSubstitution) {
  const std::vector<double> s{0, 0, 0};
  expect_vec(duffing_field<double>(sample_duffing(), s), {0, 0.5, 1.2});
}

TEST(DuffingField, UnitDisplacementCancelsStiffness) {
  const std::vector<double> s{1, 0, 0};
  expect_vec(duffing_field<double>(sample_duffing(), s), {0, 0.5, 1.2});
}

TEST(DuffingField, UnforcedWellMinimumIsEquilibrium) {
  DuffingParams p{2.0, 0.5, 0.3, 0.0, 1.7};
  const std::vector<double> s{std::sqrt(p.alpha / p.beta), 0, 0.4};
  expect_vec(duffing_field<double>(p, s), {0, 0, 1.7});
}

TEST(DuffingField, PhaseAdvancesUniformly) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int k = 0; k < 20; ++k) {
    const std::vector<double> s{u(rng), u(rng), u(rng)};
    EXPECT_EQ(duffing_field<double>(sample_duffing(), s)[2], 1.2);
  }
}

TEST(DuffingField, RejectsWrongDimension) {
  const std::vector<double> s{0, 0};
  EXPECT_THROW(duffing_field<double>(sample_duffing(), s), InvalidInput);
  EXPECT_THROW(duffing_jacobian<double>(sample_duffing(), s), InvalidInput);
}

TEST(LorenzField, OriginIsFixed) {
  const std::vector<double> s{0, 0, 0};
  expect_vec(lorenz_field<double>(LorenzParams{3.0, 7.0, 1.5}, s), {0, 0, 0});
}

TEST(LorenzField, AnalyticFixedPoint) {
  const std::vector<double> s{std::sqrt(72.0), std::sqrt(72.0), 27.0};
  expect_vec(lorenz_field<double>(LorenzParams{}, s), {0, 0, 0}, 1e-12);
}

TEST(LorenzField, DirectSubstitution) {
  const std::vector<double> s{1, 1, 1};
  expect_vec(lorenz_field<double>(LorenzParams{}, s), {0, 26, -5.0 / 3.0}, 1e-14);
}

TEST(LorenzField, SymmetryUnderXYReflection) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-20, 20);
  for (int k = 0; k < 20; ++k) {
    const std::vector<double> s{u(rng), u(rng), u(rng) + 25};
    const std::vector<double> r{-s[0], -s[1], s[2]};
    const auto a = lorenz_field<double>(LorenzParams{}, s);
    const auto b = lorenz_field<double>(LorenzParams{}, r);
    EXPECT_DOUBLE_EQ(b[0], -a[0]);
    EXPECT_DOUBLE_EQ(b[1], -a[1]);
    EXPECT_DOUBLE_EQ(b[2], a[2]);
  }
}

TEST(LorenzField, RejectsWrongDimension) {
  const std::vector<double> s{0, 0, 0, 0};
  EXPECT_THROW(lorenz_field<double>(LorenzParams{}, s), InvalidInput);
  EXPECT_THROW(lorenz_jacobian<double>(LorenzParams{}, s), InvalidInput);
}

TEST(DuffingJacobian, AtOrigin) {
  DuffingParams p{1.0, 1.0, 0.3, 0.5, 1.0};
  const std::vector<double> s{0, 0, 0};
  const auto J = duffing_jacobian<double>(p, s);
  const double want[3][3] = {{0, 1, 0}, {1, -0.3, 0}, {0, 0, 0}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(J(i, j), want[i][j], 1e-15);
}

TEST(DuffingJacobian, TraceIsMinusDelta) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int k = 0; k < 20; ++k) {
    const std::vector<double> s{u(rng), u(rng), u(rng)};
    EXPECT_DOUBLE_EQ(duffing_jacobian<double>(sample_duffing(), s).trace(), -0.3);
  }
}

TEST(DuffingJacobian, MatchesFiniteDifferences) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-2, 2);
  const auto p = sample_duffing();
  for (int k = 0; k < 25; ++k) {
    const std::vector<double> s{u(rng), u(rng), 3 * u(rng)};
    check_jacobian([&](std::span<const BigFloat> x) { return duffing_field<BigFloat>(p, x); },
                   [&](std::span<const double> x) { return duffing_jacobian<double>(p, x); }, s);
  }
}

TEST(LorenzJacobian, AtOrigin) {
  const std::vector<double> s{0, 0, 0};
  const auto J = lorenz_jacobian<double>(LorenzParams{}, s);
  const double want[3][3] = {{-10, 10, 0}, {28, -1, 0}, {0, 0, -8.0 / 3.0}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(J(i, j), want[i][j], 1e-15);
}

TEST(LorenzJacobian, ConstantTrace) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-20, 20);
  for (int k = 0; k < 20; ++k) {
    const std::vector<double> s{u(rng), u(rng), u(rng)};
    EXPECT_NEAR(lorenz_jacobian<double>(LorenzParams{}, s).trace(), -41.0 / 3.0, 1e-13);
  }
}

TEST(LorenzJacobian, MatchesFiniteDifferences) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-20, 20);
  const LorenzParams p{};
  for (int k = 0; k < 25; ++k) {
    const std::vector<double> s{u(rng), u(rng), u(rng) + 25};
    check_jacobian([&](std::span<const BigFloat> x) { return lorenz_field<BigFloat>(p, x); },
                   [&](std::span<const double> x) { return lorenz_jacobian<double>(p, x); }, s);
  }
}

TEST(ForcingPeriod, Values) {
  EXPECT_NEAR(forcing_period(DuffingParams{1, 1, 0.3, 0.5, 1.2}), 5.235987755982989, 1e-12);
  EXPECT_NEAR(forcing_period(DuffingParams{1, 1, 0.3, 0.5, 2 * std::numbers::pi}), 1.0, 1e-15);
  EXPECT_NEAR(forcing_period(DuffingParams{1, 1, 0.3, 0.5, 1.0}), 2 * std::numbers::pi, 1e-15);
}

TEST(Params, Validation) {
  EXPECT_THROW(make_duffing(DuffingParams{0.0, 1, 0.3, 0.5, 1}), InvalidInput);
  EXPECT_THROW(make_duffing(DuffingParams{1, 1, 0.3, -0.1, 1}), InvalidInput);
  EXPECT_THROW(make_duffing(DuffingParams{1, 1, 0.0, 0.3, 1}), InvalidInput);
  EXPECT_NO_THROW(make_duffing(DuffingParams{1, 1, 0.3, 0.0, 1}));
  EXPECT_THROW(make_lorenz(LorenzParams{10, 0, 1}), InvalidInput);
}

TEST(Presets, KnownNamesResolve) {
  EXPECT_TRUE(find_preset("lorenz-classic").system.lorenz() == LorenzParams{});
  EXPECT_TRUE(find_preset("duffing-holmes").system.duffing() == (DuffingParams{1, 1, 0.25, 0.3, 1}));
  EXPECT_THROW(find_preset("rossler"), ConfigError);
}

TEST(BigFloatFields, AgreeWithDouble) {
  PrecisionScope scope(200);
  const std::vector<BigFloat> s{BigFloat(0.3), BigFloat(-1.1), BigFloat(2.0)};
  const std::vector<double> d{0.3, -1.1, 2.0};
  const auto a = duffing_field<BigFloat>(sample_duffing(), s);
  const auto b = duffing_field<double>(sample_duffing(), d);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(to_double(a[i]), b[i], 1e-14);
}
