#pragma once

// Solvers for the rotating-frame amplitude equation
//
//   dC/dt + int_0^t F(t, t') C(t') dt' = 0,   C(0) = 1.
//
// solve_history works for any kernel and costs O(N^2); solve_aux turns an
// exponential-sum kernel into a local ODE system and costs O(N).

#include <cmath>
#include <complex>
#include <concepts>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "kernel.hpp"
#include "parallel.hpp"

namespace movq {

class SolverError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Amplitudes above this bound mean the kernel or step is misconfigured.
inline constexpr double kBlowUpBound = 1.0 + 1e-3;

struct TimeGrid {
  double t0 = 0.0;
  double dt_gamma = 1e-3;
  std::size_t n_steps = 0;

  std::size_t size() const { return n_steps + 1; }
  double time(std::size_t k) const { return t0 + static_cast<double>(k) * dt_gamma; }
  double t_end() const { return time(n_steps); }
};

/// Uniform grid from 0 with the fewest steps such that n_steps * dt >= t_max.
inline TimeGrid make_grid(double t_max, double dt) {
  if (!(dt > 0.0)) throw ParameterError("dt must be positive");
  if (!(t_max >= dt)) throw ParameterError("t_max must be at least dt");
  auto n = static_cast<std::size_t>(std::ceil(t_max / dt));
  if (n > 1 && static_cast<double>(n - 1) * dt >= t_max) --n;
  return {0.0, dt, n};
}

struct AmplitudeTrajectory {
  TimeGrid grid;
  std::vector<cplx> amplitude;   // C~(t_k)
  std::vector<cplx> derivative;  // dC~/dt from the equation's right-hand side
};

enum class SolverKind { History, Aux };

inline std::string_view to_string(SolverKind s) { return s == SolverKind::History ? "history" : "aux"; }

inline SolverKind parse_solver(std::string_view s) {
  if (s == "history") return SolverKind::History;
  if (s == "aux") return SolverKind::Aux;
  throw ParameterError("unknown solver '" + std::string(s) + "' (expected history|aux)");
}

/// Kernels callable as F(t, t').
template <class K>
concept TwoTimeKernel = requires(const K& k, double t, double tp) {
  { k(t, tp) } -> std::convertible_to<cplx>;
};

/// Kernels that may report dependence on t - t' only, exposing F(s) = lag(s).
template <class K>
concept MaybeLagKernel = TwoTimeKernel<K> && requires(const K& k, double s) {
  { k.lag(s) } -> std::convertible_to<cplx>;
  { k.lag_stationary() } -> std::convertible_to<bool>;
};

namespace detail {

inline void guard_amplitude(cplx c, std::size_t k) {
  if (!(std::abs(c) <= kBlowUpBound))
    throw SolverError("amplitude left the unit disk at step " + std::to_string(k) +
                      " (|C| = " + std::to_string(std::abs(c)) + "); check kernel and dt");
}

// Lag tables stored in reverse, rev[N - j] = F(j dt) and F((j + 1/2) dt), so
// the history sum F(t_k + c dt - t_m) C_m runs forward over contiguous memory.
struct LagTables {
  std::vector<double> int_re, int_im, half_re, half_im;
  cplx at_int(std::size_t j, std::size_t n) const { return {int_re[n - j], int_im[n - j]}; }
  cplx at_half(std::size_t j, std::size_t n) const { return {half_re[n - j], half_im[n - j]}; }
};

template <class K>
LagTables build_lag_tables(const K& kernel, const TimeGrid& grid) {
  const std::size_t n = grid.n_steps;
  const double dt = grid.dt_gamma;
  LagTables t;
  t.int_re.assign(n + 1, 0.0);
  t.int_im.assign(n + 1, 0.0);
  t.half_re.assign(n + 1, 0.0);
  t.half_im.assign(n + 1, 0.0);
  parallel_for(n + 1, [&](std::size_t j) {
    const cplx fi = kernel.lag(static_cast<double>(j) * dt);
    t.int_re[n - j] = fi.real();
    t.int_im[n - j] = fi.imag();
    if (j < n) {
      const cplx fh = kernel.lag((static_cast<double>(j) + 0.5) * dt);
      t.half_re[n - j] = fh.real();
      t.half_im[n - j] = fh.imag();
    }
  });
  return t;
}

// RK4 step shared by both history paths. hist_half and hist_full are the
// trapezoid sums over nodes 0..k at t_k + dt/2 and t_k + dt (end weight 1/2
// on node k); f_* are the kernel values needed for the final partial panel.
struct HistoryStage {
  cplx hist_half, hist_full;
  cplx f_half_k, f_half_half;  // F(t_k + dt/2, t_k), F(t_k + dt/2, t_k + dt/2)
  cplx f_full_k, f_full_full;  // F(t_k+1, t_k),       F(t_k+1, t_k+1)
};

inline cplx rk4_history_step(cplx c, cplx k1, const HistoryStage& s, double dt) {
  const cplx y2 = c + 0.5 * dt * k1;
  const cplx k2 = -(s.hist_half + 0.25 * dt * (s.f_half_k * c + s.f_half_half * y2));
  const cplx y3 = c + 0.5 * dt * k2;
  const cplx k3 = -(s.hist_half + 0.25 * dt * (s.f_half_k * c + s.f_half_half * y3));
  const cplx y4 = c + dt * k3;
  const cplx k4 = -(s.hist_full + 0.5 * dt * (s.f_full_k * c + s.f_full_full * y4));
  return c + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

template <class K>
AmplitudeTrajectory solve_history_lag(const K& kernel, const TimeGrid& grid) {
  const std::size_t n = grid.n_steps;
  const double dt = grid.dt_gamma;
  const LagTables tab = build_lag_tables(kernel, grid);

  AmplitudeTrajectory out{grid, std::vector<cplx>(n + 1), std::vector<cplx>(n + 1)};
  std::vector<double> c_re(n + 1, 0.0), c_im(n + 1, 0.0);
  out.amplitude[0] = 1.0;
  c_re[0] = 1.0;
  out.derivative[0] = 0.0;

  const cplx f0 = tab.at_int(0, n);
  const cplx f1 = tab.at_int(1, n);
  const cplx fh0 = tab.at_half(0, n);

  cplx hist_now{};  // trapezoid memory sum at t_k over nodes 0..k
  for (std::size_t k = 0; k < n; ++k) {
    const cplx c = out.amplitude[k];
    const cplx k1 = -hist_now;

    // Sums over m = 0..k with unit weights; endpoint halves fixed below.
    double hr = 0.0, hi = 0.0, fr = 0.0, fi = 0.0;
    const std::size_t off_half = n - k;      // half_rev[n - (k - m)]
    const std::size_t off_full = n - k - 1;  // int_rev[n - (k + 1 - m)]
    const double* hre = tab.half_re.data() + off_half;
    const double* him = tab.half_im.data() + off_half;
    const double* ire = tab.int_re.data() + off_full;
    const double* iim = tab.int_im.data() + off_full;
    const double* cr = c_re.data();
    const double* ci = c_im.data();
#pragma omp simd reduction(+ : hr, hi, fr, fi)
    for (std::size_t m = 0; m <= k; ++m) {
      hr += hre[m] * cr[m] - him[m] * ci[m];
      hi += hre[m] * ci[m] + him[m] * cr[m];
      fr += ire[m] * cr[m] - iim[m] * ci[m];
      fi += ire[m] * ci[m] + iim[m] * cr[m];
    }
    cplx hist_half{}, hist_full{};
    if (k > 0) {
      const cplx c0 = out.amplitude[0];
      hist_half = dt * (cplx{hr, hi} - 0.5 * (tab.at_half(k, n) * c0 + fh0 * c));
      hist_full = dt * (cplx{fr, fi} - 0.5 * (tab.at_int(k + 1, n) * c0 + f1 * c));
    }

    const HistoryStage st{hist_half, hist_full, fh0, f0, f1, f0};
    const cplx next = rk4_history_step(c, k1, st, dt);
    detail::guard_amplitude(next, k + 1);
    out.amplitude[k + 1] = next;
    c_re[k + 1] = next.real();
    c_im[k + 1] = next.imag();
    // Trapezoid at t_{k+1} over nodes 0..k+1.
    hist_now = hist_full + 0.5 * dt * (f1 * c + f0 * next);
    out.derivative[k + 1] = -hist_now;
  }
  return out;
}

template <class K>
AmplitudeTrajectory solve_history_general(const K& kernel, const TimeGrid& grid) {
  const std::size_t n = grid.n_steps;
  const double dt = grid.dt_gamma;
  AmplitudeTrajectory out{grid, std::vector<cplx>(n + 1), std::vector<cplx>(n + 1)};
  out.amplitude[0] = 1.0;
  out.derivative[0] = 0.0;

  cplx hist_now{};
  for (std::size_t k = 0; k < n; ++k) {
    const double tk = grid.time(k);
    const double t_half = tk + 0.5 * dt;
    const double t_full = grid.time(k + 1);
    const cplx c = out.amplitude[k];
    const cplx k1 = -hist_now;

    cplx hist_half{}, hist_full{};
    cplx f_half_k = kernel(t_half, tk);
    cplx f_full_k = kernel(t_full, tk);
    if (k > 0) {
      for (std::size_t m = 0; m <= k; ++m) {
        const double w = (m == 0 || m == k) ? 0.5 : 1.0;
        const double tm = grid.time(m);
        const cplx fh = (m == k) ? f_half_k : cplx(kernel(t_half, tm));
        const cplx ff = (m == k) ? f_full_k : cplx(kernel(t_full, tm));
        hist_half += w * fh * out.amplitude[m];
        hist_full += w * ff * out.amplitude[m];
      }
      hist_half *= dt;
      hist_full *= dt;
    }
    const HistoryStage st{hist_half, hist_full, f_half_k, kernel(t_half, t_half), f_full_k,
                          kernel(t_full, t_full)};
    const cplx next = rk4_history_step(c, k1, st, dt);
    detail::guard_amplitude(next, k + 1);
    out.amplitude[k + 1] = next;
    hist_now = hist_full + 0.5 * dt * (f_full_k * c + st.f_full_full * next);
    out.derivative[k + 1] = -hist_now;
  }
  return out;
}

}  // namespace detail

/// Classical RK4 in t with the memory integral of every stage evaluated by
/// the composite trapezoid rule over stored nodes plus a final partial panel
/// that closes on the stage value itself. Globally second order.
///
/// Lag-stationary kernels are tabulated once on the integer and half-integer
/// lag grid (O(N) kernel calls); any other kernel is called O(N^2) times.
template <TwoTimeKernel K>
AmplitudeTrajectory solve_history(const K& kernel, const TimeGrid& grid) {
  if (grid.n_steps == 0 || !(grid.dt_gamma > 0.0)) throw ParameterError("empty time grid");
  if constexpr (MaybeLagKernel<K>) {
    if (kernel.lag_stationary()) return detail::solve_history_lag(kernel, grid);
  }
  return detail::solve_history_general(kernel, grid);
}

/// Auxiliary-state reduction: with y_j = int_0^t exp(-mu_j (t - t')) C dt',
///   C' = -sum_j w_j y_j,   y_j' = C - mu_j y_j,   y_j(0) = 0,
/// integrated by classical RK4.
inline AmplitudeTrajectory solve_aux(const ExponentialKernel& kernel, const TimeGrid& grid) {
  if (grid.n_steps == 0 || !(grid.dt_gamma > 0.0)) throw ParameterError("empty time grid");
  for (const auto& b : kernel.branches)
    if (!(b.rate.real() > 0.0)) throw ParameterError("exponential kernel rates need Re(mu) > 0");

  const std::size_t nb = kernel.branches.size();
  const std::size_t n = grid.n_steps;
  const double dt = grid.dt_gamma;
  AmplitudeTrajectory out{grid, std::vector<cplx>(n + 1), std::vector<cplx>(n + 1)};

  std::vector<cplx> y(nb, 0.0), ky1(nb), ky2(nb), ky3(nb), ky4(nb), tmp(nb);
  cplx c = 1.0;
  auto memory = [&](const std::vector<cplx>& yy) {
    cplx s{};
    for (std::size_t j = 0; j < nb; ++j) s += kernel.branches[j].weight * yy[j];
    return -s;
  };
  auto deriv_y = [&](cplx cc, const std::vector<cplx>& yy, std::vector<cplx>& dy) {
    for (std::size_t j = 0; j < nb; ++j) dy[j] = cc - kernel.branches[j].rate * yy[j];
  };

  out.amplitude[0] = c;
  out.derivative[0] = memory(y);
  for (std::size_t k = 0; k < n; ++k) {
    const cplx kc1 = memory(y);
    deriv_y(c, y, ky1);

    for (std::size_t j = 0; j < nb; ++j) tmp[j] = y[j] + 0.5 * dt * ky1[j];
    const cplx c2 = c + 0.5 * dt * kc1;
    const cplx kc2 = memory(tmp);
    deriv_y(c2, tmp, ky2);

    for (std::size_t j = 0; j < nb; ++j) tmp[j] = y[j] + 0.5 * dt * ky2[j];
    const cplx c3 = c + 0.5 * dt * kc2;
    const cplx kc3 = memory(tmp);
    deriv_y(c3, tmp, ky3);

    for (std::size_t j = 0; j < nb; ++j) tmp[j] = y[j] + dt * ky3[j];
    const cplx c4 = c + dt * kc3;
    const cplx kc4 = memory(tmp);
    deriv_y(c4, tmp, ky4);

    c += dt / 6.0 * (kc1 + 2.0 * kc2 + 2.0 * kc3 + kc4);
    for (std::size_t j = 0; j < nb; ++j)
      y[j] += dt / 6.0 * (ky1[j] + 2.0 * ky2[j] + 2.0 * ky3[j] + ky4[j]);

    detail::guard_amplitude(c, k + 1);
    out.amplitude[k + 1] = c;
    out.derivative[k + 1] = memory(y);
  }
  return out;
}

namespace detail {

// sinh(x)/x, exact at x = 0.
inline cplx sinhc(cplx x) {
  if (std::abs(x) < 1e-4) {
    const cplx x2 = x * x;
    return 1.0 + x2 / 6.0 + x2 * x2 / 120.0;
  }
  return std::sinh(x) / x;
}

}  // namespace detail

/// Closed-form amplitude for the single-exponential kernel F = W exp(-Lambda s):
///   C(t) = exp(-Lambda t/2) [cosh(D t/2) + (Lambda/D) sinh(D t/2)],  D = sqrt(Lambda^2 - 4W).
/// Written with sinh(x)/x so that the critical point D = 0 is regular.
inline cplx stationary_analytic(double weight, cplx rate, double t) {
  const cplx d = std::sqrt(rate * rate - 4.0 * weight);
  const cplx x = 0.5 * d * t;
  return std::exp(-0.5 * rate * t) * (std::cosh(x) + 0.5 * rate * t * detail::sinhc(x));
}

/// dC/dt of stationary_analytic: -W t exp(-Lambda t/2) sinh(x)/x.
inline cplx stationary_analytic_derivative(double weight, cplx rate, double t) {
  const cplx d = std::sqrt(rate * rate - 4.0 * weight);
  const cplx x = 0.5 * d * t;
  return -weight * t * std::exp(-0.5 * rate * t) * detail::sinhc(x);
}

}  // namespace movq
