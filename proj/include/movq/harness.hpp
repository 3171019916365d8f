#pragma once

// Scenario runner, figure presets, parameter sweeps and file output.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "dynamics.hpp"
#include "entanglement.hpp"
#include "kernel.hpp"
#include "model.hpp"
#include "parallel.hpp"
#include "volterra.hpp"

#ifndef MOVQ_VERSION
#define MOVQ_VERSION "0.1.0"
#endif

namespace movq {

inline constexpr std::string_view kVersion = MOVQ_VERSION;
inline constexpr std::string_view kCsvHeader =
    "gamma_t,re_c,im_c,abs_c,pop_e,concurrence,gamma_rate,lamb_shift";

/// Step used when a scenario does not pin dt: fast qubits need the lag
/// oscillation 2pi/(beta w0) resolved by a few hundred points.
inline constexpr double kDefaultDt = 1e-3;
inline constexpr double kFastDt = 2e-4;
inline constexpr double kFastThreshold = 10.0;

class ScenarioError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class OutputError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Scenario

struct InitialState {
  enum class Kind { BellPsi, Product, Custom };
  Kind kind = Kind::BellPsi;
  cplx c_e0{1.0, 0.0};  // Product: both qubits start in c_e0|e> + c_g0|g>
  cplx c_g0{0.0, 0.0};
  DensityMatrix4 rho0;  // Custom

  static InitialState bell() { return {}; }
  static InitialState product(cplx ce, cplx cg) { return {Kind::Product, ce, cg, {}}; }
  static InitialState custom(const DensityMatrix4& rho) { return {Kind::Custom, {1.0, 0.0}, {}, rho}; }

  DensityMatrix4 two_qubit() const {
    switch (kind) {
      case Kind::BellPsi: return bell_psi();
      case Kind::Product: {
        DensityMatrix2 one;
        one.m(0, 0) = std::norm(c_e0);
        one.m(1, 1) = std::norm(c_g0);
        one.m(0, 1) = c_e0 * std::conj(c_g0);
        one.m(1, 0) = std::conj(one.m(0, 1));
        one.validate();
        return tensor(one, one);
      }
      case Kind::Custom: return rho0;
    }
    return bell_psi();
  }

  std::string describe() const {
    switch (kind) {
      case Kind::BellPsi: return "bell-psi";
      case Kind::Product: return "product";
      case Kind::Custom: return "custom";
    }
    return "?";
  }
};

struct OutputSet {
  bool concurrence = true;
  bool population = true;
  bool amplitude = true;
  bool rates = true;
};

struct Scenario {
  std::string name = "run";
  std::string label;  // legend text
  std::string panel;  // plot panel the curve belongs to
  SystemParams params;
  bool dt_pinned = false;  // false: resolve dt from the velocity
  KernelBackend kernel = KernelBackend::Residue;
  SolverKind solver = SolverKind::Aux;
  QuadratureConfig quadrature;
  std::optional<CavityGeometry> geometry;  // default: desk_scale_geometry
  InitialState initial;
  OutputSet outputs;
};

/// Step actually used for a scenario.
inline double resolved_dt(const Scenario& s) {
  if (s.dt_pinned) return s.params.dt_gamma;
  return s.params.beta_omega0_over_gamma >= kFastThreshold ? kFastDt : kDefaultDt;
}

inline SystemParams resolved_params(const Scenario& s) {
  SystemParams p = s.params;
  p.dt_gamma = resolved_dt(s);
  return validate_params(p);
}

inline CavityGeometry resolved_geometry(const Scenario& s) {
  const SystemParams p = resolved_params(s);
  return s.geometry ? *s.geometry : desk_scale_geometry(p);
}

inline void validate_scenario(const Scenario& s) {
  const SystemParams p = resolved_params(s);
  if (s.kernel == KernelBackend::Quadrature) {
    if (s.solver != SolverKind::History)
      throw ParameterError("the quadrature kernel backend requires the history solver");
    validate_quadrature_config(s.quadrature);
    if (!geometry_consistent(p, resolved_geometry(s)))
      throw ParameterError("cavity geometry is inconsistent with the parameters");
  }
  s.initial.two_qubit().validate();
}

struct ScenarioResult {
  Scenario scenario;
  double dt_gamma = 0.0;
  AmplitudeTrajectory trajectory;
  std::vector<double> population;   // excited population of qubit A
  std::vector<double> concurrence;  // two-qubit concurrence
  RateSeries rates;

  std::size_t size() const { return trajectory.amplitude.size(); }
};

inline AmplitudeTrajectory solve_scenario(const Scenario& s) {
  const SystemParams p = resolved_params(s);
  const TimeGrid grid = make_grid(p.t_max_gamma, p.dt_gamma);
  if (s.kernel == KernelBackend::Residue) {
    const ExponentialKernel k = residue_kernel(p);
    return s.solver == SolverKind::Aux ? solve_aux(k, grid) : solve_history(k, grid);
  }
  const QuadratureKernel k(p, resolved_geometry(s), s.quadrature);
  return solve_history(k, grid);
}

/// Solves the amplitude equation for the scenario and derives populations,
/// concurrence and rates on every grid node.
inline ScenarioResult run_scenario(const Scenario& s) {
  try {
    validate_scenario(s);
    ScenarioResult r;
    r.scenario = s;
    r.dt_gamma = resolved_dt(s);
    r.trajectory = solve_scenario(s);

    const DensityMatrix4 rho0 = s.initial.two_qubit();
    const bool x_shaped = is_x_state(rho0);
    const std::size_t n = r.trajectory.amplitude.size();
    r.population.resize(n);
    r.concurrence.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      const DensityMatrix4 rho = detail::assemble_unchecked(rho0.m, r.trajectory.amplitude[k]);
      r.population[k] = rho.population_a();
      r.concurrence[k] = x_shaped ? detail::x_concurrence_unchecked(rho.m).value
                                  : concurrence_general(rho).value;
    }
    r.rates = rate_series(r.trajectory);
    return r;
  } catch (const std::exception& e) {
    throw ScenarioError("scenario '" + s.name + "': " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Observables

/// Trapezoid time average over the whole grid.
inline double time_average(const std::vector<double>& v, const TimeGrid& g) {
  if (v.size() < 2) return v.empty() ? 0.0 : v.front();
  double s = 0.5 * (v.front() + v.back());
  for (std::size_t k = 1; k + 1 < v.size(); ++k) s += v[k];
  return s * g.dt_gamma / (g.dt_gamma * static_cast<double>(v.size() - 1));
}

inline std::size_t nearest_index(const TimeGrid& g, double t) {
  const double k = std::round((t - g.t0) / g.dt_gamma);
  if (k < 0.0 || k > static_cast<double>(g.n_steps))
    throw std::out_of_range("time " + std::to_string(t) + " is outside the simulated grid");
  return static_cast<std::size_t>(k);
}

/// First isolated zero of |C~|: the first local minimum of |C~|^2 below
/// `floor`, located by a parabola through the neighbouring nodes.
inline std::optional<double> first_amplitude_zero(const AmplitudeTrajectory& traj, double floor = 1e-2) {
  const auto& a = traj.amplitude;
  for (std::size_t k = 1; k + 1 < a.size(); ++k) {
    const double y0 = std::norm(a[k - 1]), y1 = std::norm(a[k]), y2 = std::norm(a[k + 1]);
    if (y1 <= y0 && y1 <= y2 && std::sqrt(y1) < floor) {
      const double curvature = y0 - 2.0 * y1 + y2;
      const double shift = curvature > 0.0 ? 0.5 * (y0 - y2) / curvature : 0.0;
      return traj.grid.time(k) + shift * traj.grid.dt_gamma;
    }
  }
  return std::nullopt;
}

/// Number of sign changes of the valid part of a rate series.
inline std::size_t sign_changes(const RateSeries& rs) {
  std::size_t count = 0;
  int last = 0;
  for (std::size_t k = 0; k < rs.gamma_t.size(); ++k) {
    if (!rs.mask[k] || rs.gamma_t[k] == 0.0) continue;
    const int sign = rs.gamma_t[k] > 0.0 ? 1 : -1;
    if (last != 0 && sign != last) ++count;
    last = sign;
  }
  return count;
}

struct Observable {
  enum class Kind { AtTime, TimeAverage };
  Kind kind = Kind::AtTime;
  double time = 100.0;

  static Observable at_time(double t) { return {Kind::AtTime, t}; }
  static Observable average() { return {Kind::TimeAverage, 0.0}; }

  double extract(const ScenarioResult& r) const {
    if (kind == Kind::TimeAverage) return time_average(r.concurrence, r.trajectory.grid);
    return r.concurrence[nearest_index(r.trajectory.grid, time)];
  }

  std::string describe() const {
    if (kind == Kind::TimeAverage) return "time_average";
    std::ostringstream os;
    os << "at_time(" << time << ")";
    return os.str();
  }
};

// ---------------------------------------------------------------------------
// Sweeps

enum class SweepAxis { BetaOmega0, Lambda, Delta };

inline std::string_view to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::BetaOmega0: return "beta_omega0";
    case SweepAxis::Lambda: return "lambda";
    case SweepAxis::Delta: return "delta";
  }
  return "?";
}

inline SweepAxis parse_sweep_axis(std::string_view s) {
  if (s == "beta_omega0" || s == "beta-omega0" || s == "velocity") return SweepAxis::BetaOmega0;
  if (s == "lambda" || s == "bandwidth") return SweepAxis::Lambda;
  if (s == "delta" || s == "detuning") return SweepAxis::Delta;
  throw ParameterError("unknown sweep axis '" + std::string(s) + "'");
}

struct SweepRow {
  double axis_value = 0.0;
  std::optional<double> value;
  std::string error;
};

struct SweepResult {
  SweepAxis axis = SweepAxis::BetaOmega0;
  Observable observable;
  std::vector<SweepRow> rows;
  // provenance
  KernelBackend kernel = KernelBackend::Residue;
  SolverKind solver = SolverKind::Aux;
  std::vector<double> dt_per_row;
  Scenario base;
};

inline Scenario with_axis(Scenario s, SweepAxis axis, double v) {
  switch (axis) {
    case SweepAxis::BetaOmega0: s.params.beta_omega0_over_gamma = v; break;
    case SweepAxis::Lambda: s.params.lambda_over_gamma = v; break;
    case SweepAxis::Delta: s.params.delta_over_gamma = v; break;
  }
  std::ostringstream os;
  os << s.name << '_' << to_string(axis) << v;
  s.name = os.str();
  return s;
}

/// One run_scenario per grid value, evaluated concurrently; rows keep grid
/// order and a failing point is recorded without aborting the sweep.
inline SweepResult sweep(const Scenario& base, SweepAxis axis, const std::vector<double>& grid,
                         const Observable& observable, std::size_t workers = 0) {
  if (grid.empty()) throw ParameterError("sweep grid is empty");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw ParameterError("sweep grid must be strictly increasing");

  SweepResult out;
  out.axis = axis;
  out.observable = observable;
  out.kernel = base.kernel;
  out.solver = base.solver;
  out.base = base;
  out.rows.resize(grid.size());
  out.dt_per_row.resize(grid.size());
  parallel_for(
      grid.size(),
      [&](std::size_t i) {
        SweepRow& row = out.rows[i];
        row.axis_value = grid[i];
        const Scenario s = with_axis(base, axis, grid[i]);
        out.dt_per_row[i] = resolved_dt(s);
        try {
          row.value = observable.extract(run_scenario(s));
        } catch (const std::exception& e) {
          row.error = e.what();
        }
      },
      workers);
  return out;
}

inline SweepResult sweep_velocity(const std::vector<double>& grid, const Scenario& base,
                                  const Observable& observable, std::size_t workers = 0) {
  return sweep(base, SweepAxis::BetaOmega0, grid, observable, workers);
}

// ---------------------------------------------------------------------------
// Figure presets

struct FigurePreset {
  std::string name;
  std::string title;
  enum class Plot { Concurrence, DecayRate, VelocitySweep } plot = Plot::Concurrence;
  std::vector<Scenario> scenarios;
  double sweep_time = 100.0;  // VelocitySweep only
};

inline std::string format_number(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

namespace detail {

inline Scenario preset_point(const std::string& figure, double lambda, double delta, double bw) {
  Scenario s;
  s.params.lambda_over_gamma = lambda;
  s.params.delta_over_gamma = delta;
  s.params.beta_omega0_over_gamma = bw;
  s.params.t_max_gamma = 100.0;
  s.name = figure + "_lambda" + format_number(lambda) + "_delta" + format_number(delta) + "_bw" +
           format_number(bw);
  s.label = "beta w0 = " + format_number(bw) + " gamma";
  return s;
}

}  // namespace detail

inline const std::vector<std::string>& figure_names() {
  static const std::vector<std::string> names = {"fig2", "fig3", "fig4", "fig5", "fig6", "fig7"};
  return names;
}

/// Parameter sets of the figure presets (gamma units). fig4 runs
/// beta w0 = 5n for n = 0..fig4_n_max.
inline FigurePreset figure_preset(std::string_view name, int fig4_n_max = 8) {
  using detail::preset_point;
  FigurePreset f;
  f.name = std::string(name);
  if (name == "fig2" || name == "fig3") {
    const bool slow = name == "fig2";
    f.title = slow ? "Concurrence, slow qubits (lambda = 0.01, delta = 0)"
                   : "Concurrence, fast qubits (lambda = 0.01, delta = 0)";
    const std::vector<double> v = slow ? std::vector<double>{0.0, 0.01, 0.1, 1.0}
                                       : std::vector<double>{10.0, 20.0, 30.0, 40.0};
    for (double bw : v) f.scenarios.push_back(preset_point(f.name, 0.01, 0.0, bw));
  } else if (name == "fig4") {
    if (fig4_n_max < 0) throw ParameterError("fig4 needs n_max >= 0");
    f.title = "Concurrence at gamma t = 100 versus velocity";
    f.plot = FigurePreset::Plot::VelocitySweep;
    for (int n = 0; n <= fig4_n_max; ++n)
      f.scenarios.push_back(preset_point(f.name, 0.01, 0.0, 5.0 * n));
  } else if (name == "fig5") {
    f.title = "Decay rate Gamma(t)/gamma";
    f.plot = FigurePreset::Plot::DecayRate;
    const std::vector<std::pair<double, std::string>> v = {
        {0.0, "a"}, {0.01, "a"}, {0.1, "b"}, {1.0, "b"}, {10.0, "c"}, {30.0, "c"}, {20.0, "d"}, {40.0, "d"}};
    for (const auto& [bw, panel] : v) {
      Scenario s = preset_point(f.name, 0.01, 0.0, bw);
      s.panel = panel;
      f.scenarios.push_back(s);
    }
  } else if (name == "fig6") {
    f.title = "Concurrence versus cavity bandwidth";
    const std::vector<std::pair<double, std::string>> v = {{0.0, "a"}, {0.5, "b"}, {5.0, "c"}, {10.0, "d"}};
    for (const auto& [bw, panel] : v)
      for (double lambda : {0.01, 0.1, 1.0}) {
        Scenario s = preset_point(f.name, lambda, 0.0, bw);
        s.panel = panel;
        s.label = "lambda = " + format_number(lambda) + " gamma";
        f.scenarios.push_back(s);
      }
  } else if (name == "fig7") {
    f.title = "Concurrence versus detuning (lambda = 0.01)";
    const std::vector<std::pair<double, std::string>> v = {{0.0, "a"}, {0.1, "b"}, {0.3, "c"}, {0.5, "d"}};
    for (const auto& [bw, panel] : v)
      for (double delta : {0.01, 0.05, 0.1, 0.5}) {
        Scenario s = preset_point(f.name, 0.01, delta, bw);
        s.panel = panel;
        s.label = "delta = " + format_number(delta) + " gamma";
        f.scenarios.push_back(s);
      }
  } else {
    throw ParameterError("unknown figure '" + std::string(name) + "' (expected fig2..fig7)");
  }
  return f;
}

// ---------------------------------------------------------------------------
// Output

inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

/// CSV with the fixed header; invalid rates are written as empty cells.
inline void write_csv(std::ostream& os, const ScenarioResult& r, std::size_t stride = 1) {
  if (stride == 0) stride = 1;
  os << kCsvHeader << '\n';
  const auto& o = r.scenario.outputs;
  const std::size_t n = r.size();
  for (std::size_t k = 0; k < n; k += stride) {
    const cplx c = r.trajectory.amplitude[k];
    os << format_double(r.trajectory.grid.time(k)) << ',';
    if (o.amplitude) os << format_double(c.real()) << ',' << format_double(c.imag()) << ',' << format_double(std::abs(c));
    else os << ",,";
    os << ',';
    if (o.population) os << format_double(r.population[k]);
    os << ',';
    if (o.concurrence) os << format_double(r.concurrence[k]);
    os << ',';
    if (o.rates && r.rates.mask[k]) os << format_double(r.rates.gamma_t[k]) << ',' << format_double(r.rates.omega_t[k]);
    else os << ',';
    os << '\n';
  }
}

inline void write_manifest_entry(std::ostream& os, const Scenario& s, double dt) {
  const SystemParams& p = s.params;
  os << "[" << s.name << "]\n";
  os << "lambda=" << format_double(p.lambda_over_gamma) << '\n';
  os << "delta=" << format_double(p.delta_over_gamma) << '\n';
  os << "beta_omega0=" << format_double(p.beta_omega0_over_gamma) << '\n';
  os << "omega0=" << format_double(p.omega0_over_gamma) << '\n';
  os << "t_max=" << format_double(p.t_max_gamma) << '\n';
  os << "dt=" << format_double(dt) << '\n';
  os << "kernel=" << to_string(s.kernel) << '\n';
  os << "solver=" << to_string(s.solver) << '\n';
  os << "initial=" << s.initial.describe() << '\n';
  if (s.kernel == KernelBackend::Quadrature) {
    const auto& q = s.quadrature;
    const CavityGeometry g = resolved_geometry(s);
    os << "window=" << format_double(q.window_halfwidth_lambdas) << '\n';
    os << "rel_tol=" << format_double(q.rel_tol) << '\n';
    os << "boundary_term=" << (q.include_boundary_term ? "true" : "false") << '\n';
    os << "truncate_at_zero=" << (q.truncate_at_zero ? "true" : "false") << '\n';
    os << "n_mode=" << g.n_mode << '\n';
    os << "tau=" << format_double(g.tau_gamma) << '\n';
  }
}

namespace detail {

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw OutputError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  std::ofstream f(path);
  if (!f) throw OutputError("cannot open " + path.string() + " for writing");
  f.exceptions(std::ios::badbit);
  return f;
}

inline void close_output(std::ofstream& f, const std::filesystem::path& path) {
  f.close();
  if (f.fail()) throw OutputError("failed writing " + path.string());
}

inline std::string quote(const std::string& s) { return "'" + s + "'"; }

}  // namespace detail

struct WrittenFiles {
  std::vector<std::filesystem::path> csv;
  std::filesystem::path plot_script;
  std::filesystem::path manifest;
};

/// Writes one CSV per scenario, a gnuplot script overlaying the curves
/// (one panel per distinct Scenario::panel) and a run manifest.
/// `prefix` is prepended verbatim to every file name.
inline WrittenFiles write_outputs(const std::string& figure, const std::vector<ScenarioResult>& results,
                                  const std::string& prefix, std::size_t stride = 1,
                                  FigurePreset::Plot plot = FigurePreset::Plot::Concurrence) {
  WrittenFiles out;
  for (const auto& r : results) {
    const std::filesystem::path path = prefix + r.scenario.name + ".csv";
    auto f = detail::open_output(path);
    write_csv(f, r, stride);
    detail::close_output(f, path);
    out.csv.push_back(path);
  }

  std::vector<std::string> panels;
  for (const auto& r : results)
    if (std::find(panels.begin(), panels.end(), r.scenario.panel) == panels.end())
      panels.push_back(r.scenario.panel);

  out.plot_script = prefix + figure + ".gp";
  {
    auto f = detail::open_output(out.plot_script);
    const bool rates = plot == FigurePreset::Plot::DecayRate;
    const int column = rates ? 7 : 6;
    f << "# gnuplot script generated by movq " << kVersion << "\n";
    f << "set datafile separator ','\n";
    f << "set datafile missing ''\n";
    f << "set terminal pngcairo size " << 700 * std::min<std::size_t>(panels.size(), 2) << ","
      << 500 * ((panels.size() + 1) / 2) << "\n";
    f << "set output " << detail::quote(figure + ".png") << "\n";
    f << "set xlabel 'gamma t'\n";
    f << "set ylabel " << (rates ? "'Gamma(t)/gamma'" : "'C_Psi'") << "\n";
    if (panels.size() > 1) f << "set multiplot layout " << (panels.size() + 1) / 2 << ",2\n";
    for (const auto& panel : panels) {
      if (panels.size() > 1) f << "set title '(" << panel << ")'\n";
      f << "plot ";
      bool first = true;
      for (std::size_t i = 0; i < results.size(); ++i) {
        if (results[i].scenario.panel != panel) continue;
        if (!first) f << ", \\\n     ";
        first = false;
        const std::string label = results[i].scenario.label.empty() ? results[i].scenario.name
                                                                   : results[i].scenario.label;
        f << detail::quote(out.csv[i].filename().string()) << " using 1:" << column
          << " with lines title " << detail::quote(label);
      }
      f << "\n";
    }
    if (panels.size() > 1) f << "unset multiplot\n";
    detail::close_output(f, out.plot_script);
  }

  out.manifest = prefix + figure + "_manifest.txt";
  {
    auto f = detail::open_output(out.manifest);
    f << "movq_version=" << kVersion << '\n';
    f << "figure=" << figure << '\n';
    f << "csv_header=" << kCsvHeader << '\n';
    f << "stride=" << stride << '\n';
    for (const auto& r : results) write_manifest_entry(f, r.scenario, r.dt_gamma);
    detail::close_output(f, out.manifest);
  }
  return out;
}

/// Sweep table `<axis>,<observable>,error`, plot script and manifest.
inline WrittenFiles write_sweep_outputs(const std::string& name, const SweepResult& s, const std::string& prefix) {
  WrittenFiles out;
  const std::filesystem::path csv = prefix + name + ".csv";
  {
    auto f = detail::open_output(csv);
    f << to_string(s.axis) << ",concurrence,error\n";
    for (const auto& row : s.rows) {
      f << format_double(row.axis_value) << ',';
      if (row.value) f << format_double(*row.value);
      f << ',' << row.error << '\n';
    }
    detail::close_output(f, csv);
  }
  out.csv.push_back(csv);

  out.plot_script = prefix + name + ".gp";
  {
    auto f = detail::open_output(out.plot_script);
    f << "# gnuplot script generated by movq " << kVersion << "\n";
    f << "set datafile separator ','\n";
    f << "set terminal pngcairo size 700,500\n";
    f << "set output " << detail::quote(name + ".png") << "\n";
    f << "set xlabel '" << to_string(s.axis) << " / gamma'\n";
    f << "set ylabel 'C_Psi " << s.observable.describe() << "'\n";
    f << "plot " << detail::quote(csv.filename().string())
      << " using 1:2 with linespoints dashtype 3 pointtype 3 title " << detail::quote(std::string(to_string(s.kernel)))
      << "\n";
    detail::close_output(f, out.plot_script);
  }

  out.manifest = prefix + name + "_manifest.txt";
  {
    auto f = detail::open_output(out.manifest);
    f << "movq_version=" << kVersion << '\n';
    f << "sweep=" << name << '\n';
    f << "axis=" << to_string(s.axis) << '\n';
    f << "observable=" << s.observable.describe() << '\n';
    write_manifest_entry(f, s.base, resolved_dt(s.base));
    for (std::size_t i = 0; i < s.rows.size(); ++i)
      f << "row" << i << ".dt=" << format_double(s.dt_per_row[i]) << '\n';
    detail::close_output(f, out.manifest);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Config files

/// Reads `key = value` lines (keys lambda, delta, beta_omega0, omega0, t_max,
/// dt; '#' starts a comment) on top of `base`. Returns the keys that were set.
inline std::vector<std::string> apply_config(std::istream& in, SystemParams& base) {
  std::vector<std::string> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParameterError("config line " + std::to_string(lineno) + ": expected key=value");
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string text = trim(line.substr(eq + 1));
    double value = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
      throw ParameterError("config line " + std::to_string(lineno) + ": '" + text + "' is not a number");
    static const std::map<std::string, double SystemParams::*> fields = {
        {"lambda", &SystemParams::lambda_over_gamma},
        {"delta", &SystemParams::delta_over_gamma},
        {"beta_omega0", &SystemParams::beta_omega0_over_gamma},
        {"omega0", &SystemParams::omega0_over_gamma},
        {"t_max", &SystemParams::t_max_gamma},
        {"dt", &SystemParams::dt_gamma}};
    const auto it = fields.find(key);
    if (it == fields.end())
      throw ParameterError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    base.*(it->second) = value;
    seen.push_back(key);
  }
  return seen;
}

inline std::vector<std::string> load_config(const std::filesystem::path& path, SystemParams& base) {
  std::ifstream f(path);
  if (!f) throw ParameterError("cannot read config file " + path.string());
  return apply_config(f, base);
}

}  // namespace movq
