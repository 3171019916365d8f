#pragma once

// Physical parameters of one qubit + leaky cavity subsystem, expressed in
// units of the Markovian decay rate gamma (gamma = 1 everywhere internally).

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>

namespace movq {

/// Raised when a parameter set violates one of its invariants.
class ParameterError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

struct SystemParams {
  double lambda_over_gamma = 0.01;        // cavity spectral width
  double delta_over_gamma = 0.0;          // detuning omega0 - omega_n
  double beta_omega0_over_gamma = 0.0;    // velocity parameter
  double omega0_over_gamma = 1.0e4;       // desk-scale carrier frequency
  double t_max_gamma = 100.0;
  double dt_gamma = 1.0e-3;

  /// v / c
  double beta() const { return beta_omega0_over_gamma / omega0_over_gamma; }
  /// Cavity quasi-mode frequency omega_1 = omega0 - delta.
  double omega1() const { return omega0_over_gamma - delta_over_gamma; }

  bool operator==(const SystemParams&) const = default;
};

struct CavityGeometry {
  long n_mode = 1;
  double tau_gamma = 0.0;  // l / c
};

struct FeasibilityReport {
  double de_broglie_ratio = 0.0;
  bool recoil_ok = false;
  bool classical_ok = true;
  double velocity_mps = 0.0;
};

enum class CouplingRegime { Weak, Strong, Critical };

inline const char* to_string(CouplingRegime r) {
  switch (r) {
    case CouplingRegime::Weak: return "weak";
    case CouplingRegime::Strong: return "strong";
    case CouplingRegime::Critical: return "critical";
  }
  return "?";
}

namespace detail {

[[noreturn]] inline void param_fail(const std::string& what, double value) {
  std::ostringstream os;
  os.precision(17);
  os << what << " (got " << value << ")";
  throw ParameterError(os.str());
}

}  // namespace detail

/// Checks every SystemParams invariant in declaration order and throws
/// ParameterError naming the first one that fails.
inline SystemParams validate_params(const SystemParams& raw) {
  using detail::param_fail;
  if (!(raw.lambda_over_gamma > 0.0))
    param_fail("lambda must be positive", raw.lambda_over_gamma);
  if (!std::isfinite(raw.delta_over_gamma))
    param_fail("delta must be finite", raw.delta_over_gamma);
  if (!(raw.beta_omega0_over_gamma >= 0.0))
    param_fail("beta_omega0 must be nonnegative", raw.beta_omega0_over_gamma);
  if (!(raw.omega0_over_gamma > 0.0))
    param_fail("omega0 must be positive", raw.omega0_over_gamma);
  if (!(raw.dt_gamma > 0.0)) param_fail("dt must be positive", raw.dt_gamma);
  if (!(raw.t_max_gamma >= raw.dt_gamma))
    param_fail("t_max must be at least dt", raw.t_max_gamma);
  if (!(raw.beta() < 1.0))
    param_fail("beta >= 1 (beta_omega0 / omega0 must stay sub-luminal)", raw.beta());
  if (!(std::abs(raw.delta_over_gamma) < raw.omega0_over_gamma))
    param_fail("|delta| must be smaller than omega0", raw.delta_over_gamma);
  return raw;
}

/// Converts beta*omega0 (in gamma units) to m/s for the circular 85Rb
/// Rydberg qubit (omega0 = 51.1 GHz, gamma = 33.3 Hz): v = 0.2 * x m/s.
inline double map_velocity(double beta_omega0_over_gamma) {
  if (!(beta_omega0_over_gamma >= 0.0))
    detail::param_fail("beta_omega0 must be nonnegative", beta_omega0_over_gamma);
  return 0.2 * beta_omega0_over_gamma;
}

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s
inline constexpr double kClassicalMargin = 1e-3;      // de Broglie ratio bound
inline constexpr double kRecoilVelocity = 1e-7;       // m/s

inline FeasibilityReport check_feasibility(double beta_omega0_over_gamma) {
  FeasibilityReport rep;
  rep.velocity_mps = map_velocity(beta_omega0_over_gamma);
  const double beta = rep.velocity_mps / kSpeedOfLight;
  // beta = 0 is the infinitely-heavy-atom limit: motion is trivially classical.
  rep.de_broglie_ratio = beta > 0.0 ? 1e-19 / beta : 0.0;
  rep.classical_ok = rep.de_broglie_ratio < kClassicalMargin;
  rep.recoil_ok = rep.velocity_mps > kRecoilVelocity;
  return rep;
}

/// Strong coupling (non-Markovian) when gamma > lambda/2.
inline CouplingRegime coupling_regime(double lambda_over_gamma) {
  if (!(lambda_over_gamma > 0.0))
    detail::param_fail("lambda must be positive", lambda_over_gamma);
  if (lambda_over_gamma < 2.0) return CouplingRegime::Strong;
  if (lambda_over_gamma > 2.0) return CouplingRegime::Weak;
  return CouplingRegime::Critical;
}

/// Builds a geometry from an explicit mode index: tau = n*pi / omega_n.
inline CavityGeometry geometry_for_mode(const SystemParams& p, long n_mode) {
  if (n_mode < 1) throw ParameterError("n_mode must be >= 1");
  return {n_mode, static_cast<double>(n_mode) * std::numbers::pi / p.omega1()};
}

/// Smallest quasi-mode index n whose transit time tau = n*pi/omega_n keeps
/// the qubit inside the cavity for the whole run (tau >= beta * t_max).
inline CavityGeometry desk_scale_geometry(const SystemParams& p) {
  const double omega_n = p.omega1();
  const double travel = p.beta() * p.t_max_gamma;
  long n = std::max(1L, static_cast<long>(std::ceil(travel * omega_n / std::numbers::pi)));
  while (static_cast<double>(n) * std::numbers::pi / omega_n < travel) ++n;
  while (n > 1 && static_cast<double>(n - 1) * std::numbers::pi / omega_n >= travel) --n;
  return geometry_for_mode(p, n);
}

/// True when the geometry satisfies both CavityGeometry invariants for p.
inline bool geometry_consistent(const SystemParams& p, const CavityGeometry& g) {
  if (g.n_mode < 1 || !(g.tau_gamma > 0.0)) return false;
  const double target = static_cast<double>(g.n_mode) * std::numbers::pi;
  const bool resonant = std::abs(p.omega1() * g.tau_gamma - target) <= 1e-9 * target;
  return resonant && g.tau_gamma >= p.beta() * p.t_max_gamma;
}

}  // namespace movq
