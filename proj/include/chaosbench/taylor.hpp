#pragma once

// Fixed-step Taylor-series integration.
//
// Each kernel generates the normalized Taylor coefficients X_k = x^(k)(t0)/k!
// of its vector field by the usual recurrences: products become Cauchy
// convolutions, sin/cos of the linearly advancing phase follow
// s_k = w c_{k-1} / k, c_k = -w s_{k-1} / k, and X_{k+1} = F_k / (k + 1).
// Tangent (variational) columns are expanded the same way, convolving with the
// base series so that the frame sees exactly the Jacobian along the step.
//
// A step of size h is the Horner evaluation of the truncated series. The same
// template serves doubles and BigFloat.

#include <cstddef>
#include <span>
#include <vector>

#include "chaosbench/dynamics.hpp"
#include "chaosbench/linalg.hpp"
#include "chaosbench/real.hpp"

namespace chaosbench {

namespace detail {

/// out = sum_{j=0}^{k} a[j] * b[k-j]
template <class Real>
void convolve(Real& out, const Real* a, const Real* b, std::size_t k) {
  set_zero(out);
  for (std::size_t j = 0; j <= k; ++j) mul_add(out, a[j], b[k - j]);
}

/// out = sum_{j=0}^{k} a[j] * a[k-j], using symmetry.
template <class Real>
void convolve_square(Real& out, const Real* a, std::size_t k) {
  set_zero(out);
  for (std::size_t j = 0; j < (k + 1) / 2; ++j) mul_add(out, a[j], a[k - j]);
  out += out;
  if (k % 2 == 0) mul_add(out, a[k / 2], a[k / 2]);
}

}  // namespace detail

/// Duffing in autonomous form. alpha, gamma and omega can be changed between
/// steps (the analog emulator drives them with parameter noise).
template <class Real>
class DuffingKernel {
 public:
  DuffingKernel(const DuffingParams& p, std::size_t order)
      : order_(order),
        alpha_(p.alpha),
        neg_beta_(-p.beta),
        neg_3beta_(-3.0 * p.beta),
        neg_delta_(-p.delta),
        gamma_(p.gamma),
        neg_gamma_(-p.gamma),
        omega_(p.omega),
        series_(3 * (order + 1)),
        sq_(order + 1),
        cube_(order + 1),
        sin_(order + 1),
        cos_(order + 1),
        work_() {}

  static constexpr std::size_t dimension() { return 3; }
  std::size_t order() const { return order_; }

  void set_drive(const Real& alpha, const Real& gamma, const Real& omega) {
    alpha_ = alpha;
    gamma_ = gamma;
    neg_gamma_ = -gamma;
    omega_ = omega;
  }

  const Real* series(std::size_t i) const { return &series_[i * (order_ + 1)]; }

  void expand(std::span<const Real> s) {
    using std::cos;
    using std::sin;
    Real* X = &series_[0];
    Real* Y = &series_[order_ + 1];
    Real* Z = &series_[2 * (order_ + 1)];
    X[0] = s[0];
    Y[0] = s[1];
    Z[0] = s[2];
    sin_[0] = sin(s[2]);
    cos_[0] = cos(s[2]);
    for (std::size_t k = 0; k < order_; ++k) {
      detail::convolve_square(sq_[k], X, k);
      detail::convolve(cube_[k], sq_.data(), X, k);
      if (k > 0) {
        mul_into(sin_[k], omega_, cos_[k - 1]);
        divide_by(sin_[k], k);
        mul_into(cos_[k], omega_, sin_[k - 1]);
        divide_by(cos_[k], k);
        cos_[k] = -cos_[k];
      }
      // F_y = alpha x - beta x^3 - delta y + gamma cos z
      mul_into(work_, alpha_, X[k]);
      mul_add(work_, neg_beta_, cube_[k]);
      mul_add(work_, neg_delta_, Y[k]);
      mul_add(work_, gamma_, cos_[k]);
      X[k + 1] = Y[k];
      divide_by(X[k + 1], k + 1);
      Y[k + 1] = work_;
      divide_by(Y[k + 1], k + 1);
      if (k == 0) {
        Z[1] = omega_;
      } else {
        set_zero(Z[k + 1]);
      }
    }
  }

  /// Series of one tangent column v along the last expand()ed base series.
  void expand_tangent(std::span<const Real> v, std::span<Real> out) {
    Real* U = &out[0];
    Real* V = &out[order_ + 1];
    Real* W = &out[2 * (order_ + 1)];
    U[0] = v[0];
    V[0] = v[1];
    W[0] = v[2];
    // sq_ holds (x^2)_k for k < order; that is all the recurrence needs.
    for (std::size_t k = 0; k < order_; ++k) {
      // F_v = alpha u - 3 beta (x^2 u) - delta v - gamma (sin z) w
      detail::convolve(conv_, sq_.data(), U, k);
      mul_into(work_, alpha_, U[k]);
      mul_add(work_, neg_3beta_, conv_);
      mul_add(work_, neg_delta_, V[k]);
      mul_into(conv_, sin_[k], W[0]);
      mul_add(work_, neg_gamma_, conv_);
      U[k + 1] = V[k];
      divide_by(U[k + 1], k + 1);
      V[k + 1] = work_;
      divide_by(V[k + 1], k + 1);
      set_zero(W[k + 1]);
    }
  }

 private:
  std::size_t order_;
  Real alpha_, neg_beta_, neg_3beta_, neg_delta_, gamma_, neg_gamma_, omega_;
  std::vector<Real> series_, sq_, cube_, sin_, cos_;
  Real work_, conv_;
};

template <class Real>
class LorenzKernel {
 public:
  LorenzKernel(const LorenzParams& p, std::size_t order)
      : order_(order),
        sigma_(p.sigma),
        neg_sigma_(-p.sigma),
        R_(p.R),
        neg_b_(-p.b),
        series_(3 * (order + 1)) {}

  static constexpr std::size_t dimension() { return 3; }
  std::size_t order() const { return order_; }
  const Real* series(std::size_t i) const { return &series_[i * (order_ + 1)]; }

  void expand(std::span<const Real> s) {
    Real* X = &series_[0];
    Real* Y = &series_[order_ + 1];
    Real* Z = &series_[2 * (order_ + 1)];
    X[0] = s[0];
    Y[0] = s[1];
    Z[0] = s[2];
    for (std::size_t k = 0; k < order_; ++k) {
      // F_x = sigma (y - x)
      mul_into(fx_, sigma_, Y[k]);
      mul_add(fx_, neg_sigma_, X[k]);
      // F_y = R x - y - x z
      detail::convolve(conv_, X, Z, k);
      mul_into(fy_, R_, X[k]);
      fy_ -= Y[k];
      fy_ -= conv_;
      // F_z = x y - b z
      detail::convolve(fz_, X, Y, k);
      mul_add(fz_, neg_b_, Z[k]);
      X[k + 1] = fx_;
      divide_by(X[k + 1], k + 1);
      Y[k + 1] = fy_;
      divide_by(Y[k + 1], k + 1);
      Z[k + 1] = fz_;
      divide_by(Z[k + 1], k + 1);
    }
  }

  void expand_tangent(std::span<const Real> v, std::span<Real> out) {
    const Real* X = &series_[0];
    const Real* Y = &series_[order_ + 1];
    const Real* Z = &series_[2 * (order_ + 1)];
    Real* U = &out[0];
    Real* V = &out[order_ + 1];
    Real* W = &out[2 * (order_ + 1)];
    U[0] = v[0];
    V[0] = v[1];
    W[0] = v[2];
    for (std::size_t k = 0; k < order_; ++k) {
      mul_into(fx_, sigma_, V[k]);
      mul_add(fx_, neg_sigma_, U[k]);
      // F_v = R u - v - z u - x w
      mul_into(fy_, R_, U[k]);
      fy_ -= V[k];
      detail::convolve(conv_, Z, U, k);
      fy_ -= conv_;
      detail::convolve(conv_, X, W, k);
      fy_ -= conv_;
      // F_w = y u + x v - b w
      detail::convolve(fz_, Y, U, k);
      detail::convolve(conv_, X, V, k);
      fz_ += conv_;
      mul_add(fz_, neg_b_, W[k]);
      U[k + 1] = fx_;
      divide_by(U[k + 1], k + 1);
      V[k + 1] = fy_;
      divide_by(V[k + 1], k + 1);
      W[k + 1] = fz_;
      divide_by(W[k + 1], k + 1);
    }
  }

 private:
  std::size_t order_;
  Real sigma_, neg_sigma_, R_, neg_b_;
  std::vector<Real> series_;
  Real fx_, fy_, fz_, conv_;
};

template <class Real>
class LinearKernel {
 public:
  LinearKernel(const LinearParams& p, std::size_t order)
      : order_(order), dim_(p.dim), A_(p.A.begin(), p.A.end()), series_(p.dim * (order + 1)) {}

  std::size_t dimension() const { return dim_; }
  std::size_t order() const { return order_; }
  const Real* series(std::size_t i) const { return &series_[i * (order_ + 1)]; }

  void expand(std::span<const Real> s) { expand_into(s, series_); }
  void expand_tangent(std::span<const Real> v, std::span<Real> out) { expand_into(v, out); }

 private:
  void expand_into(std::span<const Real> s, std::span<Real> out) {
    const std::size_t stride = order_ + 1;
    for (std::size_t i = 0; i < dim_; ++i) out[i * stride] = s[i];
    for (std::size_t k = 0; k < order_; ++k) {
      for (std::size_t i = 0; i < dim_; ++i) {
        set_zero(acc_);
        for (std::size_t j = 0; j < dim_; ++j) mul_add(acc_, A_[i * dim_ + j], out[j * stride + k]);
        out[i * stride + k + 1] = acc_;
        divide_by(out[i * stride + k + 1], k + 1);
      }
    }
  }

  std::size_t order_;
  std::size_t dim_;
  std::vector<Real> A_;
  std::vector<Real> series_;
  Real acc_;
};

template <class System, class Real>
struct KernelFor;
template <class Real>
struct KernelFor<DuffingSystem, Real> {
  using type = DuffingKernel<Real>;
};
template <class Real>
struct KernelFor<LorenzSystem, Real> {
  using type = LorenzKernel<Real>;
};
template <class Real>
struct KernelFor<LinearSystem, Real> {
  using type = LinearKernel<Real>;
};

template <class System, class Real>
typename KernelFor<System, Real>::type make_kernel(const System& sys, std::size_t order) {
  return typename KernelFor<System, Real>::type(sys.params, order);
}

/// Advances a state (and optionally a tangent frame) by fixed steps.
template <class Kernel, class Real>
class TaylorStepper {
 public:
  TaylorStepper(Kernel kernel, double step) : kernel_(std::move(kernel)), h_(step) {
    const std::size_t d = kernel_.dimension();
    tangent_series_.resize(d * (kernel_.order() + 1));
    column_.resize(d);
  }

  Kernel& kernel() { return kernel_; }
  const Real& step_size() const { return h_; }

  void step(std::span<Real> state) {
    kernel_.expand(std::span<const Real>(state.data(), state.size()));
    for (std::size_t i = 0; i < state.size(); ++i) horner(kernel_.series(i), state[i]);
  }

  /// Advances the state and every column of `frame` through the same step.
  void step(std::span<Real> state, Matrix<Real>& frame) {
    const std::size_t d = state.size();
    const std::size_t stride = kernel_.order() + 1;
    kernel_.expand(std::span<const Real>(state.data(), d));
    for (std::size_t c = 0; c < frame.cols(); ++c) {
      for (std::size_t r = 0; r < d; ++r) column_[r] = frame(r, c);
      kernel_.expand_tangent(std::span<const Real>(column_.data(), d), tangent_series_);
      for (std::size_t r = 0; r < d; ++r) horner(&tangent_series_[r * stride], frame(r, c));
    }
    for (std::size_t i = 0; i < d; ++i) horner(kernel_.series(i), state[i]);
  }

 private:
  void horner(const Real* c, Real& out) {
    const std::size_t p = kernel_.order();
    out = c[p];
    for (std::size_t k = p; k-- > 0;) {
      out *= h_;
      out += c[k];
    }
  }

  Kernel kernel_;
  Real h_;
  std::vector<Real> tangent_series_;
  std::vector<Real> column_;
};

}  // namespace chaosbench
