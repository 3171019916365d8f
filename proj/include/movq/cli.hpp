#pragma once

// Command-line front end: simulate, figure, sweep, validate, compare-backends.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "harness.hpp"

namespace movq {

namespace cli_detail {

struct ParamFlags {
  std::optional<double> lambda, delta, beta_omega0, omega0, t_max, dt;
  std::string config;

  void attach(CLI::App* app) {
    app->add_option("--lambda", lambda, "cavity spectral width / gamma");
    app->add_option("--delta", delta, "detuning / gamma");
    app->add_option("--beta-omega0", beta_omega0, "velocity parameter beta*omega0 / gamma");
    app->add_option("--omega0", omega0, "carrier frequency / gamma (desk scale)");
    app->add_option("--t-max", t_max, "simulation horizon in gamma t");
    app->add_option("--dt", dt, "solver step in gamma t (pins the step)");
    app->add_option("--config", config, "key=value parameter file; flags override it")->check(CLI::ExistingFile);
  }

  /// Config file first, explicit flags on top.
  SystemParams resolve(SystemParams p, bool* dt_pinned = nullptr) const {
    bool pinned = false;
    if (!config.empty()) {
      const auto keys = load_config(config, p);
      pinned = std::find(keys.begin(), keys.end(), "dt") != keys.end();
    }
    if (lambda) p.lambda_over_gamma = *lambda;
    if (delta) p.delta_over_gamma = *delta;
    if (beta_omega0) p.beta_omega0_over_gamma = *beta_omega0;
    if (omega0) p.omega0_over_gamma = *omega0;
    if (t_max) p.t_max_gamma = *t_max;
    if (dt) {
      p.dt_gamma = *dt;
      pinned = true;
    }
    if (dt_pinned) *dt_pinned = pinned;
    return p;
  }
};

struct BackendFlags {
  std::string kernel = "residue";
  std::string solver = "aux";
  std::string initial = "bell-psi";
  double window = 50.0;
  double rel_tol = 1e-6;
  bool boundary_term = true;
  bool truncate_at_zero = true;

  void attach(CLI::App* app) {
    app->add_option("--kernel", kernel, "kernel backend")->check(CLI::IsMember({"residue", "quadrature"}));
    app->add_option("--solver", solver, "amplitude solver")->check(CLI::IsMember({"history", "aux"}));
    app->add_option("--initial", initial, "initial two-qubit state")->check(CLI::IsMember({"bell-psi"}));
    app->add_option("--window", window, "quadrature half-window in units of lambda");
    app->add_option("--rel-tol", rel_tol, "quadrature relative tolerance");
    app->add_option("--boundary-term", boundary_term, "keep the boundary branch in quadrature (true|false)");
    app->add_option("--truncate-at-zero", truncate_at_zero, "honour the w >= 0 limit in quadrature (true|false)");
  }

  void apply(Scenario& s) const {
    s.kernel = parse_kernel_backend(kernel);
    s.solver = parse_solver(solver);
    s.initial = InitialState::bell();
    s.quadrature.window_halfwidth_lambdas = window;
    s.quadrature.rel_tol = rel_tol;
    s.quadrature.include_boundary_term = boundary_term;
    s.quadrature.truncate_at_zero = truncate_at_zero;
  }
};

inline std::string prefix_for(const std::string& out) {
  if (out.empty()) return "";
  std::filesystem::path p(out);
  return (p / "").string();
}

inline std::vector<double> parse_list(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    const double x = std::stod(item, &used);
    if (used != item.size()) throw ParameterError("bad number in list: '" + item + "'");
    v.push_back(x);
  }
  return v;
}

inline void print_feasibility(std::ostream& out, const SystemParams& p, int& warnings) {
  const FeasibilityReport rep = check_feasibility(p.beta_omega0_over_gamma);
  out << "velocity_mps=" << rep.velocity_mps << '\n';
  out << "de_broglie_ratio=" << rep.de_broglie_ratio << '\n';
  out << "classical_ok=" << (rep.classical_ok ? "true" : "false") << '\n';
  out << "recoil_ok=" << (rep.recoil_ok ? "true" : "false") << '\n';
  if (!rep.recoil_ok) {
    out << "WARNING: recoil bound violated (v = " << rep.velocity_mps << " m/s, need v > " << kRecoilVelocity
        << " m/s)\n";
    ++warnings;
  }
  if (!rep.classical_ok) {
    out << "WARNING: qubit motion is not classical (de Broglie ratio " << rep.de_broglie_ratio << ")\n";
    ++warnings;
  }
}

struct Deviation {
  double max_abs = 0.0;
  double scale = 0.0;
  double rel() const { return scale > 0.0 ? max_abs / scale : max_abs; }
};

/// Quadrature vs residue kernel over `lags` equally spaced lags in [0, max_lag],
/// deviation normalised by the largest residue magnitude.
inline Deviation kernel_deviation(const SystemParams& p, const CavityGeometry& g, QuadratureConfig cfg,
                                  int lags, double max_lag) {
  const ExponentialKernel res = residue_kernel(p);
  const QuadratureKernel quad(p, g, cfg);
  Deviation d;
  for (int i = 0; i < lags; ++i) {
    const double s = lags > 1 ? max_lag * i / (lags - 1) : 0.0;
    const cplx r = res.lag(s);
    // With the boundary branch the kernel is evaluated from the cavity entrance.
    const cplx q = cfg.include_boundary_term ? quad(s, 0.0) : quad.lag(s);
    d.scale = std::max(d.scale, std::abs(r));
    d.max_abs = std::max(d.max_abs, std::abs(q - r));
  }
  return d;
}

}  // namespace cli_detail

/// Entry point shared by the movq executable and the tests.
inline int cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  using namespace cli_detail;
  CLI::App app{"Moving-qubit entanglement dynamics in leaky cavities", "movq"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  // simulate
  auto* sim = app.add_subcommand("simulate", "run one scenario and write CSV, plot script and manifest");
  ParamFlags sim_p;
  BackendFlags sim_b;
  std::string sim_out = "runs";
  std::string sim_name = "simulate";
  std::size_t sim_stride = 1;
  sim_p.attach(sim);
  sim_b.attach(sim);
  sim->add_option("--out", sim_out, "output directory");
  sim->add_option("--name", sim_name, "base name of the output files");
  sim->add_option("--stride", sim_stride, "write every n-th time node")->check(CLI::PositiveNumber);

  // figure
  auto* fig = app.add_subcommand("figure", "run a figure preset");
  std::string fig_name;
  std::string fig_out = "runs";
  std::size_t fig_stride = 1;
  int fig4_n_max = 8;
  std::optional<double> fig_dt;
  BackendFlags fig_b;
  fig->add_option("name", fig_name, "fig2 | fig3 | fig4 | fig5 | fig6 | fig7")->required();
  fig->add_option("--out", fig_out, "output directory");
  fig->add_option("--stride", fig_stride, "write every n-th time node")->check(CLI::PositiveNumber);
  fig->add_option("--fig4-n-max", fig4_n_max, "fig4 grid beta*omega0 = 5n, n = 0..N");
  fig->add_option("--dt", fig_dt, "pin the solver step");
  fig_b.attach(fig);

  // sweep
  auto* swp = app.add_subcommand("sweep", "scan velocity, bandwidth or detuning");
  ParamFlags swp_p;
  BackendFlags swp_b;
  std::string swp_axis = "beta_omega0";
  std::string swp_values;
  std::optional<double> swp_from, swp_to, swp_step;
  std::string swp_observable = "at";
  std::optional<double> swp_at;
  std::string swp_out = "runs";
  std::string swp_name;
  swp_p.attach(swp);
  swp_b.attach(swp);
  swp->add_option("--axis", swp_axis, "beta_omega0 | lambda | delta");
  swp->add_option("--values", swp_values, "comma-separated grid");
  swp->add_option("--from", swp_from, "grid start");
  swp->add_option("--to", swp_to, "grid end (inclusive)");
  swp->add_option("--step", swp_step, "grid step");
  swp->add_option("--observable", swp_observable, "at | average")->check(CLI::IsMember({"at", "average"}));
  swp->add_option("--at-time", swp_at, "gamma t for --observable at (default t_max)");
  swp->add_option("--out", swp_out, "output directory");
  swp->add_option("--name", swp_name, "base name of the output files");

  // validate
  auto* val = app.add_subcommand("validate", "feasibility report and invariant self-checks");
  ParamFlags val_p;
  val_p.attach(val);

  // compare-backends
  auto* cmp = app.add_subcommand("compare-backends", "residue vs quadrature kernel, history vs aux solver");
  ParamFlags cmp_p;
  int cmp_lags = 100;
  double cmp_max_lag = 50.0;
  double cmp_window = 50.0;
  double cmp_rel_tol = 1e-6;
  bool cmp_skip_solvers = false;
  cmp_p.attach(cmp);
  cmp->add_option("--lags", cmp_lags, "number of lags")->check(CLI::PositiveNumber);
  cmp->add_option("--max-lag", cmp_max_lag, "largest lag in gamma t")->check(CLI::NonNegativeNumber);
  cmp->add_option("--window", cmp_window, "quadrature half-window in units of lambda");
  cmp->add_option("--rel-tol", cmp_rel_tol, "quadrature relative tolerance");
  cmp->add_flag("--skip-solvers", cmp_skip_solvers, "only compare kernels");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (sim->parsed()) {
      Scenario s;
      s.name = sim_name;
      s.params = sim_p.resolve(s.params, &s.dt_pinned);
      sim_b.apply(s);
      const ScenarioResult r = run_scenario(s);
      const auto files = write_outputs(s.name, {r}, prefix_for(sim_out), sim_stride);
      const auto& g = r.trajectory.grid;
      out << "scenario=" << s.name << '\n';
      out << "steps=" << g.n_steps << " dt=" << r.dt_gamma << '\n';
      out << "final_abs_c=" << std::abs(r.trajectory.amplitude.back()) << '\n';
      out << "final_concurrence=" << r.concurrence.back() << '\n';
      out << "mean_concurrence=" << time_average(r.concurrence, g) << '\n';
      if (const auto z = first_amplitude_zero(r.trajectory)) out << "first_zero_gamma_t=" << *z << '\n';
      out << "csv=" << files.csv.front().string() << '\n';
      return 0;
    }

    if (fig->parsed()) {
      FigurePreset preset = figure_preset(fig_name, fig4_n_max);
      for (auto& s : preset.scenarios) {
        fig_b.apply(s);
        if (fig_dt) {
          s.params.dt_gamma = *fig_dt;
          s.dt_pinned = true;
        }
      }
      const std::string prefix = prefix_for(fig_out);
      if (preset.plot == FigurePreset::Plot::VelocitySweep) {
        std::vector<double> grid;
        for (const auto& s : preset.scenarios) grid.push_back(s.params.beta_omega0_over_gamma);
        Scenario base = preset.scenarios.front();
        base.name = preset.name;
        const SweepResult sr = sweep_velocity(grid, base, Observable::at_time(preset.sweep_time));
        const auto files = write_sweep_outputs(preset.name, sr, prefix);
        int failed = 0;
        for (const auto& row : sr.rows) {
          out << "beta_omega0=" << row.axis_value << " C=";
          if (row.value) out << *row.value;
          else {
            out << "error: " << row.error;
            ++failed;
          }
          out << '\n';
        }
        out << "csv=" << files.csv.front().string() << '\n';
        return failed == 0 ? 0 : 1;
      }
      std::vector<ScenarioResult> results(preset.scenarios.size());
      parallel_for(preset.scenarios.size(), [&](std::size_t i) { results[i] = run_scenario(preset.scenarios[i]); });
      const auto files = write_outputs(preset.name, results, prefix, fig_stride, preset.plot);
      for (const auto& r : results)
        out << r.scenario.name << ": mean_concurrence=" << time_average(r.concurrence, r.trajectory.grid)
            << " final=" << r.concurrence.back() << '\n';
      out << "files=" << files.csv.size() << " csv, plot=" << files.plot_script.string() << '\n';
      return 0;
    }

    if (swp->parsed()) {
      Scenario base;
      base.params = swp_p.resolve(base.params, &base.dt_pinned);
      swp_b.apply(base);
      const SweepAxis axis = parse_sweep_axis(swp_axis);
      std::vector<double> grid;
      if (!swp_values.empty()) {
        grid = parse_list(swp_values);
      } else if (swp_from && swp_to && swp_step) {
        if (!(*swp_step > 0.0)) throw ParameterError("--step must be positive");
        const auto count = static_cast<long>(std::floor((*swp_to - *swp_from) / *swp_step + 1e-9));
        for (long i = 0; i <= count; ++i) grid.push_back(*swp_from + static_cast<double>(i) * *swp_step);
      } else {
        throw ParameterError("sweep needs --values or --from/--to/--step");
      }
      base.name = swp_name.empty() ? "sweep_" + std::string(to_string(axis)) : swp_name;
      const Observable obs = swp_observable == "average"
                                 ? Observable::average()
                                 : Observable::at_time(swp_at.value_or(base.params.t_max_gamma));
      const SweepResult sr = sweep(base, axis, grid, obs);
      const auto files = write_sweep_outputs(base.name, sr, prefix_for(swp_out));
      int failed = 0;
      for (const auto& row : sr.rows) {
        out << to_string(axis) << '=' << row.axis_value << ' ' << obs.describe() << '=';
        if (row.value) out << *row.value;
        else {
          out << "error: " << row.error;
          ++failed;
        }
        out << '\n';
      }
      out << "csv=" << files.csv.front().string() << '\n';
      return failed == 0 ? 0 : 1;
    }

    if (val->parsed()) {
      int warnings = 0;
      const SystemParams p = validate_params(val_p.resolve(SystemParams{}));
      out << "params=ok\n";
      out << "coupling_regime=" << to_string(coupling_regime(p.lambda_over_gamma)) << '\n';
      print_feasibility(out, p, warnings);
      const CavityGeometry g = desk_scale_geometry(p);
      out << "n_mode=" << g.n_mode << " tau=" << g.tau_gamma << '\n';
      int failures = 0;
      auto check = [&](const char* what, bool ok) {
        out << (ok ? "PASS " : "FAIL ") << what << '\n';
        if (!ok) ++failures;
      };
      check("geometry invariants", geometry_consistent(p, g));
      const ExponentialKernel k = residue_kernel(p);
      check("residue weights sum to lambda/4", std::abs(k.total_weight() - p.lambda_over_gamma / 4.0) < 1e-15);
      bool decays = true;
      for (const auto& b : k.branches) decays = decays && b.rate.real() > 0.0;
      check("kernel rates decay", decays);
      // Short solver self-checks on a coarse grid.
      SystemParams q = p;
      q.t_max_gamma = std::min(p.t_max_gamma, 20.0);
      const TimeGrid grid = make_grid(q.t_max_gamma, std::max(p.dt_gamma, 1e-2));
      const auto aux = solve_aux(residue_kernel(q), grid);
      const auto hist = solve_history(residue_kernel(q), grid);
      double dev = 0.0, peak = 0.0;
      for (std::size_t i = 0; i < grid.size(); ++i) {
        dev = std::max(dev, std::abs(aux.amplitude[i] - hist.amplitude[i]));
        peak = std::max(peak, std::abs(aux.amplitude[i]));
      }
      check("history/aux agreement", dev < 1e-4);
      check("contractivity", peak <= 1.0 + 1e-9);
      double bell = 0.0;
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto rho = assemble_two_qubit(bell_psi(), aux.amplitude[i]);
        bell = std::max(bell, std::abs(concurrence_x(rho).value - std::pow(std::abs(aux.amplitude[i]), 4)));
      }
      check("Bell-psi concurrence identity", bell < 1e-12);
      out << "warnings=" << warnings << '\n';
      out << "failures=" << failures << '\n';
      return failures == 0 ? 0 : 1;
    }

    if (cmp->parsed()) {
      const SystemParams p = validate_params(cmp_p.resolve(SystemParams{}));
      // The boundary-branch comparison evaluates F(s, 0), so the cavity must
      // hold the qubit up to the largest lag.
      SystemParams geom_p = p;
      geom_p.t_max_gamma = std::max(p.t_max_gamma, cmp_max_lag);
      const CavityGeometry g = desk_scale_geometry(geom_p);
      QuadratureConfig cfg;
      cfg.window_halfwidth_lambdas = cmp_window;
      cfg.rel_tol = cmp_rel_tol;
      out << std::setprecision(6);
      out << "lambda=" << p.lambda_over_gamma << " delta=" << p.delta_over_gamma
          << " beta_omega0=" << p.beta_omega0_over_gamma << " omega0=" << p.omega0_over_gamma << '\n';
      out << "n_mode=" << g.n_mode << " tau=" << g.tau_gamma << '\n';
      cfg.include_boundary_term = false;
      const Deviation off = kernel_deviation(p, g, cfg, cmp_lags, cmp_max_lag);
      out << "kernel boundary_term=off max_abs_dev=" << off.max_abs << " max_rel_dev=" << off.rel() << '\n';
      cfg.include_boundary_term = true;
      const Deviation on = kernel_deviation(p, g, cfg, cmp_lags, cmp_max_lag);
      out << "kernel boundary_term=on  max_abs_dev=" << on.max_abs << " max_rel_dev=" << on.rel() << '\n';
      if (!cmp_skip_solvers) {
        const TimeGrid grid = make_grid(p.t_max_gamma, p.dt_gamma);
        const ExponentialKernel k = residue_kernel(p);
        const auto t0 = std::chrono::steady_clock::now();
        const auto aux = solve_aux(k, grid);
        const auto t1 = std::chrono::steady_clock::now();
        const auto hist = solve_history(k, grid);
        const auto t2 = std::chrono::steady_clock::now();
        double dev = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i)
          dev = std::max(dev, std::abs(aux.amplitude[i] - hist.amplitude[i]));
        out << "solver history_vs_aux max_abs_dev=" << dev << " steps=" << grid.n_steps
            << " aux_s=" << std::chrono::duration<double>(t1 - t0).count()
            << " history_s=" << std::chrono::duration<double>(t2 - t1).count() << '\n';
      }
      return 0;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace movq
