#pragma once

// Memory kernel F(t, t') of the moving-qubit amplitude equation.
//
// Two backends are provided:
//   * residue    - closed-form exponential sum obtained by contour integration
//                  of the Lorentzian after dropping the boundary branch
//                  cos[w(beta(t+t') - 2 tau)] and extending w to -inf.
//   * quadrature - direct adaptive integration over the Lorentzian window,
//                  with the far tails added analytically via E1.
// Both work in units where gamma = 1.

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "detail/expint.hpp"
#include "detail/gauss_kronrod.hpp"
#include "model.hpp"

namespace movq {

using cplx = std::complex<double>;
using detail::QuadratureError;

/// Lorentzian J(w) = (1/2pi) * lambda^2 / ((omega0 - w - delta)^2 + lambda^2).
inline double spectral_density(double omega, const SystemParams& p) {
  const double x = p.omega0_over_gamma - omega - p.delta_over_gamma;
  const double l = p.lambda_over_gamma;
  return l * l / (2.0 * std::numbers::pi * (x * x + l * l));
}

/// Position-dependent coupling sin[w(beta t - tau)] of the qubit to a mode
/// of frequency w while it flies from z = 0 to the far mirror z = l.
inline double shape_function(double t, double omega, const SystemParams& p, const CavityGeometry& g) {
  const double travelled = p.beta() * t;
  if (t < 0.0 || travelled > g.tau_gamma * (1.0 + 1e-12))
    throw std::domain_error("shape_function: qubit is outside the cavity at this time");
  // w(beta t - tau) = w_n beta t + (w - w_n)(beta t - tau) - n pi, and
  // sin(x - n pi) = (-1)^n sin x keeps the mode node at t = 0 exact.
  const double omega_n = p.omega1();
  const double x = omega_n * travelled + (omega - omega_n) * (travelled - g.tau_gamma);
  const double s = std::sin(x);
  return (g.n_mode % 2 == 0) ? s : -s;
}

// ---------------------------------------------------------------------------
// Exponential-sum kernel

struct ExponentialKernel {
  struct Branch {
    cplx weight;
    cplx rate;  // Re(rate) > 0
  };
  std::vector<Branch> branches;

  cplx lag(double s) const;
  cplx operator()(double t, double tprime) const { return lag(t - tprime); }
  bool lag_stationary() const { return true; }

  cplx total_weight() const {
    cplx w{};
    for (const auto& b : branches) w += b.weight;
    return w;
  }
};

/// Sum_j w_j exp(-mu_j * s) for a nonnegative lag s.
inline cplx eval_exponential_kernel(const ExponentialKernel& k, double lag) {
  if (!(lag >= 0.0)) throw std::domain_error("eval_exponential_kernel: negative lag");
  cplx sum{};
  for (const auto& b : k.branches) sum += b.weight * std::exp(-b.rate * lag);
  return sum;
}

inline cplx ExponentialKernel::lag(double s) const { return eval_exponential_kernel(*this, s); }

/// Two-branch closed form
///   F = (lambda/8) [exp(-mu1 s) + exp(-mu2 s)],
///   mu1 = lambda(1-beta) - i(delta + beta w1),  mu2 = lambda(1+beta) - i(delta - beta w1).
/// A stationary qubit collapses to one branch of weight lambda/4 and rate lambda - i delta.
inline ExponentialKernel residue_kernel(const SystemParams& p) {
  const double lambda = p.lambda_over_gamma;
  const double beta = p.beta();
  const double delta = p.delta_over_gamma;
  const double shift = beta * p.omega1();
  ExponentialKernel k;
  if (p.beta_omega0_over_gamma == 0.0) {
    k.branches.push_back({cplx{lambda / 4.0, 0.0}, cplx{lambda, -delta}});
    return k;
  }
  k.branches.push_back({cplx{lambda / 8.0, 0.0}, cplx{lambda * (1.0 - beta), -(delta + shift)}});
  k.branches.push_back({cplx{lambda / 8.0, 0.0}, cplx{lambda * (1.0 + beta), -(delta - shift)}});
  return k;
}

// ---------------------------------------------------------------------------
// Quadrature kernel

struct QuadratureConfig {
  double window_halfwidth_lambdas = 50.0;
  double rel_tol = 1e-6;
  bool include_boundary_term = true;
  bool truncate_at_zero = true;
  std::size_t max_panels = 1u << 20;
};

inline void validate_quadrature_config(const QuadratureConfig& c) {
  if (!(c.window_halfwidth_lambdas > 0.0))
    throw ParameterError("quadrature window must be positive");
  if (!(c.rel_tol > 0.0 && c.rel_tol < 1.0))
    throw ParameterError("quadrature rel_tol must lie in (0, 1)");
  if (c.max_panels < 1) throw ParameterError("quadrature panel budget must be >= 1");
}

/// Numerical evaluation of
///   F(t,t') = int_0^inf J(w) sin[w(bt - tau)] sin[w(bt' - tau)] e^{-i(w - w0)(t - t')} dw
/// through its product-to-sum split into four branches of the form
///   c_b e^{i phi_b} int J(w) e^{-i kappa_b (w - w1)} dw.
/// Each branch is integrated adaptively on [w1 - W lambda, w1 + W lambda] with the
/// initial panel count set by kappa_b; tails beyond the window are closed-form.
class QuadratureKernel {
public:
  QuadratureKernel(const SystemParams& params, const CavityGeometry& geom, QuadratureConfig cfg = {})
      : p_(validate_params(params)), g_(geom), cfg_(cfg) {
    validate_quadrature_config(cfg_);
    const double lambda = p_.lambda_over_gamma;
    const double w1 = p_.omega1();
    x_hi_ = cfg_.window_halfwidth_lambdas * lambda;
    x_lo_ = -x_hi_;
    if (cfg_.truncate_at_zero && w1 + x_lo_ < 0.0) x_lo_ = -w1;
    mass_ = (std::atan(x_hi_ / lambda) - std::atan(x_lo_ / lambda)) / std::numbers::pi;
  }

  const SystemParams& params() const { return p_; }
  const CavityGeometry& geometry() const { return g_; }
  const QuadratureConfig& config() const { return cfg_; }

  /// Without the boundary branch the kernel depends on t - t' only.
  bool lag_stationary() const { return !cfg_.include_boundary_term; }

  cplx operator()(double t, double tprime) const {
    const double beta = p_.beta();
    const double reach = g_.tau_gamma * (1.0 + 1e-12);
    if (t < 0.0 || tprime < 0.0 || beta * t > reach || beta * tprime > reach)
      throw std::domain_error("quadrature_kernel: qubit is outside the cavity");
    cplx f = moving_branches(t - tprime);
    if (cfg_.include_boundary_term) f += boundary_branches(t, tprime);
    return f;
  }

  /// Kernel at lag s, boundary branch excluded.
  cplx lag(double s) const {
    if (cfg_.include_boundary_term)
      throw std::logic_error("quadrature kernel with boundary term is not lag-stationary");
    return moving_branches(s);
  }

  /// int L(x) e^{-i kappa x} dx over the admitted frequency range, L the
  /// unit-mass Lorentzian of half-width lambda centred at w1.
  cplx branch_integral(double kappa) const {
    const double lambda = p_.lambda_over_gamma;
    const auto integrand = [lambda, kappa](double x) {
      const double lor = lambda / (std::numbers::pi * (x * x + lambda * lambda));
      const double ph = kappa * x;
      return cplx{lor * std::cos(ph), -lor * std::sin(ph)};
    };
    const double width = x_hi_ - x_lo_;
    const auto panels = static_cast<std::size_t>(
        std::max(8.0, std::ceil(std::abs(kappa) * width / std::numbers::pi)));
    const auto window = detail::integrate_adaptive(integrand, x_lo_, x_hi_, panels,
                                                   cfg_.rel_tol * mass_, cfg_.max_panels);
    cplx total = window.value + detail::lorentzian_tail(x_hi_, kappa, lambda);
    // Lower tail, mirrored onto x > 0: int_{-inf}^{x_lo} L(x) e^{-ikx} = T(-x_lo, -k).
    const double w1 = p_.omega1();
    if (!cfg_.truncate_at_zero) {
      total += detail::lorentzian_tail(-x_lo_, -kappa, lambda);
    } else if (x_lo_ > -w1) {
      total += detail::lorentzian_tail(-x_lo_, -kappa, lambda) - detail::lorentzian_tail(w1, -kappa, lambda);
    }
    return total;
  }

private:
  // Scale of J in units of the unit-mass Lorentzian: J = (lambda/2) L.
  double scale() const { return 0.5 * p_.lambda_over_gamma; }

  cplx moving_branches(double s) const {
    const double beta = p_.beta();
    const double w1 = p_.omega1();
    const double base = s * p_.delta_over_gamma;
    const double shift = beta * s * w1;
    const cplx a = std::polar(0.25, base + shift) * branch_integral(s * (1.0 - beta));
    const cplx b = std::polar(0.25, base - shift) * branch_integral(s * (1.0 + beta));
    return scale() * (a + b);
  }

  cplx boundary_branches(double t, double tprime) const {
    const double beta = p_.beta();
    const double w1 = p_.omega1();
    const double s = t - tprime;
    const double sigma = beta * (t + tprime) - 2.0 * g_.tau_gamma;
    // sigma * w1 with the exact multiple 2 n pi removed.
    const double n_pi = static_cast<double>(g_.n_mode) * std::numbers::pi;
    const double sigma_w1 = beta * (t + tprime) * w1 - 2.0 * (g_.tau_gamma * w1 - n_pi);
    const double base = s * p_.delta_over_gamma;
    const cplx a = std::polar(0.25, base + sigma_w1) * branch_integral(s - sigma);
    const cplx b = std::polar(0.25, base - sigma_w1) * branch_integral(s + sigma);
    return -scale() * (a + b);
  }

  SystemParams p_;
  CavityGeometry g_;
  QuadratureConfig cfg_;
  double x_lo_ = 0.0;
  double x_hi_ = 0.0;
  double mass_ = 1.0;
};

inline cplx quadrature_kernel(double t, double tprime, const SystemParams& params,
                              const CavityGeometry& geom, const QuadratureConfig& cfg = {}) {
  return QuadratureKernel(params, geom, cfg)(t, tprime);
}

// ---------------------------------------------------------------------------
// Backend selection

enum class KernelBackend { Residue, Quadrature };

inline std::string_view to_string(KernelBackend b) {
  return b == KernelBackend::Residue ? "residue" : "quadrature";
}

inline KernelBackend parse_kernel_backend(std::string_view s) {
  if (s == "residue") return KernelBackend::Residue;
  if (s == "quadrature") return KernelBackend::Quadrature;
  throw ParameterError("unknown kernel backend '" + std::string(s) + "' (expected residue|quadrature)");
}

}  // namespace movq
