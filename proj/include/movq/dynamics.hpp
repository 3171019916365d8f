#pragma once

// Reduced density matrices and time-local rates built from the amplitude
// trajectory of one qubit.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "volterra.hpp"

namespace movq {

class StateError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kTraceTol = 1e-12;
inline constexpr double kEigenFloor = -1e-10;

namespace detail {

template <int N>
void check_density(const Eigen::Matrix<cplx, N, N>& m) {
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > kHermitianTol)
    throw StateError("density matrix is not Hermitian");
  if (std::abs(m.trace() - 1.0) > kTraceTol) throw StateError("density matrix trace differs from 1");
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix<cplx, N, N>> es(m, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < kEigenFloor) throw StateError("density matrix has a negative eigenvalue");
}

}  // namespace detail

/// Single-qubit state in the basis {|e>, |g>}.
struct DensityMatrix2 {
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();

  cplx operator()(int i, int j) const { return m(i, j); }
  void validate() const { detail::check_density<2>(m); }
};

/// Two-qubit state in the basis {|e_A e_B>, |e_A g_B>, |g_A e_B>, |g_A g_B>}.
/// Indices are zero-based here: rho(0, 3) is rho_14 in one-based notation.
struct DensityMatrix4 {
  Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();

  cplx operator()(int i, int j) const { return m(i, j); }
  void validate() const { detail::check_density<4>(m); }

  /// Excited-state population of qubit A.
  double population_a() const { return (m(0, 0) + m(1, 1)).real(); }
  double population_b() const { return (m(0, 0) + m(2, 2)).real(); }
};

/// Reduced single-qubit state for the initial superposition c_e0|e> + c_g0|g>.
/// The carrier phase exp(-i w0 t) is left out of the coherence (rotating frame).
inline DensityMatrix2 single_qubit_state(const AmplitudeTrajectory& traj, cplx c_e0, cplx c_g0,
                                         std::size_t t_index) {
  if (std::abs(std::norm(c_e0) + std::norm(c_g0) - 1.0) > 1e-12)
    throw StateError("initial single-qubit amplitudes are not normalised");
  if (t_index >= traj.amplitude.size()) throw std::out_of_range("single_qubit_state: time index");
  const cplx ce = c_e0 * traj.amplitude[t_index];
  DensityMatrix2 rho;
  rho.m(0, 0) = std::norm(ce);
  rho.m(1, 1) = 1.0 - std::norm(ce);
  rho.m(0, 1) = std::conj(c_g0) * ce;
  rho.m(1, 0) = std::conj(rho.m(0, 1));
  return rho;
}

namespace detail {

// Independent identical amplitude-damping channels on both qubits; rho0 is
// assumed valid.
inline DensityMatrix4 assemble_unchecked(const Eigen::Matrix4cd& r, cplx c) {
  const double p = std::norm(c);
  const double q = 1.0 - p;
  Eigen::Matrix4cd out;
  out(0, 0) = r(0, 0) * p * p;
  out(1, 1) = r(1, 1) * p + r(0, 0) * p * q;
  out(2, 2) = r(2, 2) * p + r(0, 0) * p * q;
  out(3, 3) = 1.0 - out(0, 0).real() - out(1, 1).real() - out(2, 2).real();
  out(0, 1) = r(0, 1) * p * c;
  out(0, 2) = r(0, 2) * p * c;
  out(0, 3) = r(0, 3) * c * c;
  out(1, 2) = r(1, 2) * p;
  out(1, 3) = r(1, 3) * c + r(0, 2) * c * q;
  out(2, 3) = r(2, 3) * c + r(0, 1) * c * q;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < i; ++j) out(i, j) = std::conj(out(j, i));
  return {out};
}

}  // namespace detail

/// Evolves a two-qubit state through two independent identical channels with
/// normalised amplitude c (c = 1 at t = 0). Populations feed downward
/// (ee -> eg, ge -> gg) and rho44 closes the trace.
inline DensityMatrix4 assemble_two_qubit(const DensityMatrix4& rho0, cplx c) {
  rho0.validate();
  if (std::abs(c) > 1.0 + 1e-12) throw StateError("channel amplitude exceeds 1");
  return detail::assemble_unchecked(rho0.m, c);
}

/// Time-dependent decay rate and rotating-frame Lamb shift,
///   Gamma = -2 Re(C'/C),  Omega~ = -2 Im(C'/C),
/// with nodes where |C| < kRateMaskThreshold flagged as undefined.
inline constexpr double kRateMaskThreshold = 1e-8;

struct RateSeries {
  TimeGrid grid;
  std::vector<double> gamma_t;
  std::vector<double> omega_t;
  std::vector<bool> mask;  // true = valid
};

inline RateSeries rate_series(const AmplitudeTrajectory& traj) {
  const std::size_t n = traj.amplitude.size();
  if (traj.derivative.size() != n) throw std::invalid_argument("rate_series: trajectory has no derivative");
  RateSeries rs{traj.grid, std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), std::vector<bool>(n, false)};
  for (std::size_t k = 0; k < n; ++k) {
    const cplx c = traj.amplitude[k];
    if (std::abs(c) < kRateMaskThreshold) continue;
    const cplx ratio = traj.derivative[k] / c;
    rs.gamma_t[k] = -2.0 * ratio.real();
    rs.omega_t[k] = -2.0 * ratio.imag();
    rs.mask[k] = true;
  }
  return rs;
}

/// Kronecker product of two single-qubit states in the {e, g} ordering.
inline DensityMatrix4 tensor(const DensityMatrix2& a, const DensityMatrix2& b) {
  DensityMatrix4 out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) out.m(2 * i + k, 2 * j + l) = a.m(i, j) * b.m(k, l);
  return out;
}

}  // namespace movq
