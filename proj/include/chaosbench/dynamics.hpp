#pragma once

// Continuous-time systems: the periodically forced Duffing oscillator in
// autonomous form (x, y, phase z) and the Lorenz equations, plus a constant
// coefficient linear system used for verification.
//
// The Lorenz x-equation is the standard sigma * (y - x).

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "chaosbench/errors.hpp"
#include "chaosbench/linalg.hpp"
#include "chaosbench/real.hpp"

namespace chaosbench {

template <class Real>
using State = std::vector<Real>;

struct DuffingParams {
  double alpha = 1.0;
  double beta = 1.0;
  double delta = 0.25;
  double gamma = 0.3;
  double omega = 1.0;

  void validate() const {
    if (!(alpha > 0 && beta > 0 && delta > 0 && omega > 0)) {
      throw InvalidInput("Duffing alpha, beta, delta, omega must be strictly positive");
    }
    if (!(gamma >= 0)) throw InvalidInput("Duffing gamma must be non-negative");
  }
  bool operator==(const DuffingParams&) const = default;
};

struct LorenzParams {
  double sigma = 10.0;
  double R = 28.0;
  double b = 8.0 / 3.0;

  void validate() const {
    if (!(sigma > 0 && R > 0 && b > 0)) throw InvalidInput("Lorenz sigma, R, b must be strictly positive");
  }
  bool operator==(const LorenzParams&) const = default;
};

/// dx/dt = A x with a constant square matrix A (row-major).
struct LinearParams {
  std::size_t dim = 2;
  std::vector<double> A = {0.0, 1.0, -1.0, 0.0};

  void validate() const {
    if (dim == 0 || A.size() != dim * dim) throw InvalidInput("linear system matrix must be dim x dim");
  }
  bool operator==(const LinearParams&) const = default;
};

namespace detail {
template <class Real>
void require_dim(std::span<const Real> s, std::size_t d, const char* who) {
  if (s.size() != d) {
    throw InvalidInput(std::string(who) + ": expected state of length " + std::to_string(d) + ", got " +
                       std::to_string(s.size()));
  }
}
}  // namespace detail

template <class Real>
State<Real> duffing_field(const DuffingParams& p, std::span<const Real> s) {
  detail::require_dim(s, 3, "duffing_field");
  using std::cos;
  const Real& x = s[0];
  const Real& y = s[1];
  const Real& z = s[2];
  State<Real> out(3);
  out[0] = y;
  out[1] = Real(p.alpha) * x - Real(p.beta) * x * x * x - Real(p.delta) * y + Real(p.gamma) * cos(z);
  out[2] = Real(p.omega);
  return out;
}

template <class Real>
State<Real> lorenz_field(const LorenzParams& p, std::span<const Real> s) {
  detail::require_dim(s, 3, "lorenz_field");
  const Real& x = s[0];
  const Real& y = s[1];
  const Real& z = s[2];
  State<Real> out(3);
  out[0] = Real(p.sigma) * (y - x);
  out[1] = Real(p.R) * x - y - x * z;
  out[2] = x * y - Real(p.b) * z;
  return out;
}

template <class Real>
State<Real> linear_field(const LinearParams& p, std::span<const Real> s) {
  detail::require_dim(s, p.dim, "linear_field");
  State<Real> out(p.dim, Real(0.0));
  for (std::size_t i = 0; i < p.dim; ++i) {
    for (std::size_t j = 0; j < p.dim; ++j) out[i] += Real(p.A[i * p.dim + j]) * s[j];
  }
  return out;
}

template <class Real>
Matrix<Real> duffing_jacobian(const DuffingParams& p, std::span<const Real> s) {
  detail::require_dim(s, 3, "duffing_jacobian");
  using std::sin;
  Matrix<Real> J(3, 3);
  J(0, 1) = Real(1.0);
  J(1, 0) = Real(p.alpha) - Real(3.0 * p.beta) * s[0] * s[0];
  J(1, 1) = Real(-p.delta);
  J(1, 2) = -(Real(p.gamma) * sin(s[2]));
  return J;
}

template <class Real>
Matrix<Real> lorenz_jacobian(const LorenzParams& p, std::span<const Real> s) {
  detail::require_dim(s, 3, "lorenz_jacobian");
  Matrix<Real> J(3, 3);
  J(0, 0) = Real(-p.sigma);
  J(0, 1) = Real(p.sigma);
  J(1, 0) = Real(p.R) - s[2];
  J(1, 1) = Real(-1.0);
  J(1, 2) = -s[0];
  J(2, 0) = s[1];
  J(2, 1) = s[0];
  J(2, 2) = Real(-p.b);
  return J;
}

template <class Real>
Matrix<Real> linear_jacobian(const LinearParams& p, std::span<const Real> s) {
  detail::require_dim(s, p.dim, "linear_jacobian");
  Matrix<Real> J(p.dim, p.dim);
  for (std::size_t i = 0; i < p.dim; ++i) {
    for (std::size_t j = 0; j < p.dim; ++j) J(i, j) = Real(p.A[i * p.dim + j]);
  }
  return J;
}

/// One cycle of the drive, 2 pi / omega.
inline double forcing_period(const DuffingParams& p) {
  if (!(p.omega > 0)) throw InvalidInput("forcing_period: omega must be positive");
  return 2.0 * M_PI / p.omega;
}

// ---- system objects ----------------------------------------------------------

struct DuffingSystem {
  DuffingParams params;

  static constexpr const char* kind() { return "duffing"; }
  std::size_t dimension() const { return 3; }
  template <class Real>
  State<Real> field(std::span<const Real> s) const {
    return duffing_field<Real>(params, s);
  }
  template <class Real>
  Matrix<Real> jacobian(std::span<const Real> s) const {
    return duffing_jacobian<Real>(params, s);
  }
  bool operator==(const DuffingSystem&) const = default;
};

struct LorenzSystem {
  LorenzParams params;

  static constexpr const char* kind() { return "lorenz"; }
  std::size_t dimension() const { return 3; }
  template <class Real>
  State<Real> field(std::span<const Real> s) const {
    return lorenz_field<Real>(params, s);
  }
  template <class Real>
  Matrix<Real> jacobian(std::span<const Real> s) const {
    return lorenz_jacobian<Real>(params, s);
  }
  bool operator==(const LorenzSystem&) const = default;
};

struct LinearSystem {
  LinearParams params;

  static constexpr const char* kind() { return "linear"; }
  std::size_t dimension() const { return params.dim; }
  template <class Real>
  State<Real> field(std::span<const Real> s) const {
    return linear_field<Real>(params, s);
  }
  template <class Real>
  Matrix<Real> jacobian(std::span<const Real> s) const {
    return linear_jacobian<Real>(params, s);
  }
  bool operator==(const LinearSystem&) const = default;
};

/// A named autonomous vector field with its parameters.
struct SystemSpec {
  std::string name;
  std::variant<DuffingSystem, LorenzSystem, LinearSystem> system;

  std::size_t dimension() const {
    return std::visit([](const auto& s) { return s.dimension(); }, system);
  }
  std::string kind() const {
    return std::visit([](const auto& s) { return std::string(s.kind()); }, system);
  }
  bool is_duffing() const { return std::holds_alternative<DuffingSystem>(system); }
  const DuffingParams& duffing() const { return std::get<DuffingSystem>(system).params; }
  const LorenzParams& lorenz() const { return std::get<LorenzSystem>(system).params; }

  /// Time of one forcing cycle for Duffing; 1 (the natural time unit) otherwise.
  double cycle_time() const { return is_duffing() ? forcing_period(duffing()) : 1.0; }

  void validate() const {
    std::visit([](const auto& s) { s.params.validate(); }, system);
  }
};

inline SystemSpec make_duffing(const DuffingParams& p, std::string name = "duffing") {
  p.validate();
  return {std::move(name), DuffingSystem{p}};
}
inline SystemSpec make_lorenz(const LorenzParams& p, std::string name = "lorenz") {
  p.validate();
  return {std::move(name), LorenzSystem{p}};
}
inline SystemSpec make_linear(const LinearParams& p, std::string name = "linear") {
  p.validate();
  return {std::move(name), LinearSystem{p}};
}
inline SystemSpec make_harmonic() { return make_linear(LinearParams{2, {0.0, 1.0, -1.0, 0.0}}, "harmonic"); }

}  // namespace chaosbench
