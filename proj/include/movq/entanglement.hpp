#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "dynamics.hpp"

namespace movq {

/// Concurrence together with the quantities whose difference was clamped.
/// General path: terms = descending square roots of the spin-flip spectrum.
/// X path: terms = {2|rho14|, 2 sqrt(rho22 rho33), 2|rho23|, 2 sqrt(rho11 rho44)}.
struct ConcurrenceValue {
  double value = 0.0;
  std::array<double, 4> terms{};
};

inline constexpr double kSpectrumClamp = -1e-10;
inline constexpr double kSpectrumCorrupt = -1e-8;
inline constexpr double kXStateTol = 1e-12;

namespace detail {

// Hermitian square root via eigen-decomposition with clamped eigenvalues.
inline Eigen::Matrix4cd hermitian_sqrt(const Eigen::Matrix4cd& m) {
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(m);
  Eigen::Vector4d root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().adjoint();
}

inline const Eigen::Matrix4cd& sigma_yy() {
  static const Eigen::Matrix4cd s = [] {
    Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
    // sigma_y (x) sigma_y in the {ee, eg, ge, gg} basis.
    m(0, 3) = -1.0;
    m(1, 2) = 1.0;
    m(2, 1) = 1.0;
    m(3, 0) = -1.0;
    return m;
  }();
  return s;
}

}  // namespace detail

/// Wootters concurrence max{0, s1 - s2 - s3 - s4}, s_i the descending square
/// roots of the eigenvalues of rho * (sy x sy) rho^* (sy x sy). The spectrum is
/// taken from the Hermitian similar matrix sqrt(rho) rho~ sqrt(rho).
inline ConcurrenceValue concurrence_general(const DensityMatrix4& rho) {
  rho.validate();
  const Eigen::Matrix4cd& s = detail::sigma_yy();
  const Eigen::Matrix4cd flipped = s * rho.m.conjugate() * s;
  const Eigen::Matrix4cd root = detail::hermitian_sqrt(rho.m);
  Eigen::Matrix4cd r = root * flipped * root;
  r = 0.5 * (r + r.adjoint()).eval();
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(r, Eigen::EigenvaluesOnly);

  std::array<double, 4> ev{};
  for (int i = 0; i < 4; ++i) {
    const double v = es.eigenvalues()(i);
    if (v < kSpectrumCorrupt) throw StateError("spin-flip spectrum has a negative eigenvalue");
    ev[static_cast<std::size_t>(i)] = std::sqrt(std::max(v, 0.0));
  }
  std::sort(ev.begin(), ev.end(), std::greater<>());
  ConcurrenceValue out;
  out.terms = ev;
  out.value = std::clamp(ev[0] - ev[1] - ev[2] - ev[3], 0.0, 1.0);
  return out;
}

inline bool is_x_state(const DensityMatrix4& rho) {
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (i != j && i + j != 3 && std::abs(rho.m(i, j)) > kXStateTol) return false;
  return true;
}

namespace detail {

inline ConcurrenceValue x_concurrence_unchecked(const Eigen::Matrix4cd& m) {
  auto pop = [&](int i) { return std::max(m(i, i).real(), 0.0); };
  ConcurrenceValue out;
  out.terms = {2.0 * std::abs(m(0, 3)), 2.0 * std::sqrt(pop(1) * pop(2)), 2.0 * std::abs(m(1, 2)),
               2.0 * std::sqrt(pop(0) * pop(3))};
  const double best = std::max(out.terms[0] - out.terms[1], out.terms[2] - out.terms[3]);
  out.value = std::clamp(best, 0.0, 1.0);
  return out;
}

}  // namespace detail

/// Closed form for X states:
///   max{0, 2|rho14| - 2 sqrt(rho22 rho33), 2|rho23| - 2 sqrt(rho11 rho44)}.
inline ConcurrenceValue concurrence_x(const DensityMatrix4& rho) {
  rho.validate();
  if (!is_x_state(rho)) throw StateError("concurrence_x: state is not X-shaped; use concurrence_general");
  return detail::x_concurrence_unchecked(rho.m);
}

/// Uses the X-state closed form when applicable, the general path otherwise.
inline ConcurrenceValue concurrence(const DensityMatrix4& rho) {
  return is_x_state(rho) ? concurrence_x(rho) : concurrence_general(rho);
}

/// (|e_A e_B> + |g_A g_B>) / sqrt(2)
inline DensityMatrix4 bell_psi() {
  DensityMatrix4 rho;
  rho.m(0, 0) = 0.5;
  rho.m(3, 3) = 0.5;
  rho.m(0, 3) = 0.5;
  rho.m(3, 0) = 0.5;
  return rho;
}

}  // namespace movq
