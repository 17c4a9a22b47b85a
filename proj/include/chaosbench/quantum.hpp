#pragma once

// Quantized cat map (Hannay-Berry) under repeated coarse position measurement.
// For A = [[2,1],[1,1]] the propagator kernel is
//   U(q', q) = N^{-1/2} exp(i pi/N (2 q^2 - 2 q q' + q'^2))
// up to a global phase. The q'^2 term is only N-periodic for even N, so odd N
// is rejected: there the kernel is still unitary but not a map on the torus.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "chaosbench/entropy_curve.hpp"
#include "chaosbench/errors.hpp"

namespace chaosbench {

using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

/// Classical K-S entropy of the cat map, ln of the expanding eigenvalue (3+sqrt5)/2.
inline double cat_map_ks_entropy() { return std::log((3.0 + std::sqrt(5.0)) / 2.0); }

inline constexpr std::size_t kMaxQuantumDimension = 2048;

struct QuantumModel {
  std::size_t N = 0;
  double omega_vol = 1.0;
  double hbar_eff = 1.0;
  ComplexMatrix unitary;

  double max_entropy() const { return std::log(static_cast<double>(N)); }
};

namespace detail {

inline std::complex<double> cat_kernel(long long qp, long long q, std::size_t N) {
  // reduce the integer phase exactly mod 2N before going to floating point
  const long long n2 = 2 * static_cast<long long>(N);
  long long k = (2 * q * q - 2 * q * qp + qp * qp) % n2;
  if (k < 0) k += n2;
  const double phase = std::numbers::pi * static_cast<double>(k) / static_cast<double>(N);
  return std::polar(1.0 / std::sqrt(static_cast<double>(N)), phase);
}

inline double max_abs(const ComplexMatrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace detail

/// Builds the propagator and checks, numerically, that it is unitary to 1e-10
/// and that the kernel is periodic in both indices (torus consistency).
inline QuantumModel cat_map_unitary(std::size_t N, std::size_t max_dimension = kMaxQuantumDimension) {
  if (N < 2) throw InvalidInput("cat_map_unitary: N must be at least 2");
  if (N > max_dimension) throw ResourceExceeded("cat_map_unitary: N exceeds the dimension cap");
  const auto n = static_cast<long long>(N);
  QuantumModel m;
  m.N = N;
  m.omega_vol = 1.0;
  m.hbar_eff = m.omega_vol / static_cast<double>(N);
  m.unitary.resize(n, n);
  double periodicity = 0.0;
  for (long long qp = 0; qp < n; ++qp) {
    for (long long q = 0; q < n; ++q) {
      m.unitary(qp, q) = detail::cat_kernel(qp, q, N);
      periodicity = std::max(periodicity, std::abs(detail::cat_kernel(qp + n, q, N) - m.unitary(qp, q)));
      periodicity = std::max(periodicity, std::abs(detail::cat_kernel(qp, q + n, N) - m.unitary(qp, q)));
    }
  }
  const double unitarity = detail::max_abs(m.unitary * m.unitary.adjoint() - ComplexMatrix::Identity(n, n));
  if (unitarity > 1e-10) throw InvalidInput("cat_map_unitary: kernel is not unitary for N=" + std::to_string(N));
  if (periodicity > 1e-10)
    throw InvalidInput("cat_map_unitary: kernel is not periodic on the torus for N=" + std::to_string(N) +
                       " (N must be even)");
  return m;
}

/// Hermitian, unit-trace, positive semidefinite N x N matrix.
class DensityMatrix {
 public:
  static constexpr double kHermitianTol = 1e-12;
  static constexpr double kTraceTol = 1e-10;
  static constexpr double kEigenTol = 1e-10;

  explicit DensityMatrix(ComplexMatrix rho, bool check_spectrum = true) : rho_(std::move(rho)) {
    validate(check_spectrum);
  }

  static DensityMatrix pure(const ComplexVector& psi) {
    const double norm = psi.norm();
    if (!(norm > 0.0)) throw InvalidInput("DensityMatrix::pure: zero vector");
    const ComplexVector u = psi / norm;
    return DensityMatrix(u * u.adjoint());
  }
  static DensityMatrix maximally_mixed(std::size_t N) {
    const auto n = static_cast<Eigen::Index>(N);
    return DensityMatrix(ComplexMatrix::Identity(n, n) / static_cast<double>(N));
  }
  static DensityMatrix position_state(std::size_t N, std::size_t q) {
    if (q >= N) throw InvalidInput("DensityMatrix::position_state: q out of range");
    ComplexVector psi = ComplexVector::Zero(static_cast<Eigen::Index>(N));
    psi(static_cast<Eigen::Index>(q)) = 1.0;
    return pure(psi);
  }
  /// Periodized Gaussian of minimal width centred at (q0, p0) in lattice units.
  static DensityMatrix coherent_state(std::size_t N, double q0, double p0) {
    const double n = static_cast<double>(N);
    ComplexVector psi(static_cast<Eigen::Index>(N));
    for (std::size_t q = 0; q < N; ++q) {
      std::complex<double> a = 0.0;
      for (int w = -3; w <= 3; ++w) {
        const double x = static_cast<double>(q) - q0 + w * n;
        a += std::exp(-std::numbers::pi * x * x / n) * std::polar(1.0, 2.0 * std::numbers::pi * p0 * x / n);
      }
      psi(static_cast<Eigen::Index>(q)) = a;
    }
    return pure(psi);
  }

  std::size_t dimension() const { return static_cast<std::size_t>(rho_.rows()); }
  const ComplexMatrix& matrix() const { return rho_; }

  double hermiticity_error() const { return detail::max_abs(rho_ - rho_.adjoint()); }
  double trace_error() const { return std::abs(rho_.trace() - std::complex<double>(1.0, 0.0)); }

  /// Eigenvalues ascending. Throws if the Hermitian solver does not converge.
  Eigen::VectorXd eigenvalues() const {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(rho_, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw InvalidInput("DensityMatrix: eigensolver failed");
    return es.eigenvalues();
  }

  void validate(bool check_spectrum = true) const {
    if (rho_.rows() == 0 || rho_.rows() != rho_.cols()) throw InvalidInput("DensityMatrix: must be square");
    if (!rho_.allFinite()) throw InvalidInput("DensityMatrix: non-finite entries");
    if (hermiticity_error() > kHermitianTol) throw InvalidInput("DensityMatrix: not Hermitian");
    if (trace_error() > kTraceTol) throw InvalidInput("DensityMatrix: trace is not 1");
    if (check_spectrum && eigenvalues().minCoeff() < -kEigenTol)
      throw InvalidInput("DensityMatrix: negative eigenvalue");
  }

 private:
  ComplexMatrix rho_;
};

/// M blocks of N/M consecutive position states.
struct MeasurementPartition {
  std::size_t N = 0;
  std::size_t M = 1;

  MeasurementPartition(std::size_t n, std::size_t m) : N(n), M(m) {
    if (n == 0 || m == 0 || n % m != 0) throw InvalidInput("MeasurementPartition: M must divide N");
  }
  std::size_t block_size() const { return N / M; }
  std::size_t block_of(std::size_t q) const { return q / block_size(); }

  ComplexMatrix projector(std::size_t m) const {
    if (m >= M) throw InvalidInput("MeasurementPartition: block index out of range");
    const auto n = static_cast<Eigen::Index>(N);
    ComplexMatrix p = ComplexMatrix::Zero(n, n);
    for (std::size_t q = m * block_size(); q < (m + 1) * block_size(); ++q)
      p(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(q)) = 1.0;
    return p;
  }
};

/// Pure unitary kick U rho U^dagger.
inline ComplexMatrix unitary_image(const DensityMatrix& rho, const QuantumModel& model) {
  if (rho.dimension() != model.N) throw InvalidInput("measured_step: dimension mismatch");
  return model.unitary * rho.matrix() * model.unitary.adjoint();
}

/// One kick followed by block dephasing: sum_m P_m U rho U^dagger P_m.
/// The spectrum check is left to von_neumann_entropy.
inline DensityMatrix measured_step(const DensityMatrix& rho, const QuantumModel& model,
                                   const MeasurementPartition& part) {
  if (part.N != model.N) throw InvalidInput("measured_step: partition and model dimensions differ");
  ComplexMatrix out = unitary_image(rho, model);
  const std::size_t b = part.block_size();
  for (std::size_t r = 0; r < model.N; ++r) {
    for (std::size_t c = 0; c < model.N; ++c) {
      if (r / b != c / b) out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = 0.0;
    }
  }
  return DensityMatrix(std::move(out), false);
}

/// -sum lambda ln lambda; eigenvalues in [-1e-10, 0) are clamped to 0.
inline double von_neumann_entropy(const DensityMatrix& rho) {
  const Eigen::VectorXd ev = rho.eigenvalues();
  double s = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    const double l = ev(i);
    if (l < -DensityMatrix::kEigenTol) throw InvalidInput("von_neumann_entropy: negative eigenvalue");
    if (l > 0.0) s -= l * std::log(l);
  }
  return std::max(0.0, s);
}

inline std::size_t numerical_rank(const DensityMatrix& rho, double cutoff = 1e-12) {
  const Eigen::VectorXd ev = rho.eigenvalues();
  std::size_t r = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) r += ev(i) > cutoff ? 1 : 0;
  return r;
}

/// Entropy after each of `steps` measured kicks; t = kick index (starts with t=0).
/// occupied_cells holds the numerical rank of the state.
inline EntropyCurve quantum_entropy_curve(const QuantumModel& model, const MeasurementPartition& part,
                                          const DensityMatrix& rho0, std::size_t steps) {
  if (steps < 1) throw InvalidInput("quantum_entropy_curve: steps must be at least 1");
  if (rho0.dimension() != model.N) throw InvalidInput("quantum_entropy_curve: dimension mismatch");
  rho0.validate(true);
  EntropyCurve c;
  auto record = [&](double t, const DensityMatrix& r) {
    c.times.push_back(t);
    c.entropy.push_back(von_neumann_entropy(r));
    c.occupied_cells.push_back(numerical_rank(r));
    c.overflow_mass.push_back(0.0);
  };
  record(0.0, rho0);
  DensityMatrix rho = rho0;
  for (std::size_t k = 1; k <= steps; ++k) {
    rho = measured_step(rho, model, part);
    record(static_cast<double>(k), rho);
  }
  c.metadata = {{"N", std::to_string(model.N)}, {"M", std::to_string(part.M)}, {"model", "cat"}};
  return c;
}

}  // namespace chaosbench
