#pragma once

// Exponential integral E1 for complex arguments off the negative real axis,
// and the Lorentzian Fourier tail built from it.

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace movq::detail {

/// exp(z) * E1(z), principal branch. Power series for |z| <= 2, continued
/// fraction (modified Lentz) otherwise.
inline std::complex<double> scaled_e1(std::complex<double> z) {
  using C = std::complex<double>;
  constexpr double eps = std::numeric_limits<double>::epsilon();
  if (z == C{}) throw std::domain_error("E1 is singular at z = 0");

  if (std::abs(z) <= 2.0) {
    // E1(z) = -gamma_E - log z - sum_{k>=1} (-z)^k / (k k!)
    C term = 1.0;
    C sum{};
    for (int k = 1; k < 200; ++k) {
      term *= -z / static_cast<double>(k);
      const C add = term / static_cast<double>(k);
      sum += add;
      if (std::abs(add) < eps * std::abs(sum)) break;
    }
    return std::exp(z) * (-std::numbers::egamma - std::log(z) - sum);
  }

  // e^z E1(z) = 1/(z+1 - 1/(z+3 - 4/(z+5 - ...)))
  constexpr double tiny = 1e-300;
  C b = z + 1.0;
  C c = 1.0 / tiny;
  C d = 1.0 / b;
  C h = d;
  for (int i = 1; i < 100000; ++i) {
    const double an = -static_cast<double>(i) * static_cast<double>(i);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const C del = c * d;
    h *= del;
    if (std::abs(del - 1.0) < 4.0 * eps) return h;
  }
  throw std::runtime_error("E1 continued fraction did not converge");
}

/// Tail of the unit-mass Lorentzian transform:
///   T(a, k) = int_a^inf (1/pi) * lambda / (x^2 + lambda^2) * exp(-i k x) dx,  a > 0.
inline std::complex<double> lorentzian_tail(double a, double kappa, double lambda) {
  using C = std::complex<double>;
  if (!(a > 0.0) || !(lambda > 0.0)) throw std::domain_error("lorentzian_tail needs a, lambda > 0");
  if (kappa == 0.0) return std::atan(lambda / a) / std::numbers::pi;
  if (kappa < 0.0) return std::conj(lorentzian_tail(a, -kappa, lambda));

  const C z1{kappa * lambda, kappa * a};
  const C z2{-kappa * lambda, kappa * a};
  const C phase = std::polar(1.0, -kappa * a);
  return phase * (scaled_e1(z1) - scaled_e1(z2)) / C{0.0, 2.0 * std::numbers::pi};
}

}  // namespace movq::detail
