#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <movq/volterra.hpp>

#include "oracles.hpp"

using namespace movq;

namespace {

ExponentialKernel single(double w, cplx mu) {
  ExponentialKernel k;
  k.branches.push_back({w, mu});
  return k;
}

double max_error_vs_analytic(const AmplitudeTrajectory& tr, double w, cplx mu) {
  double e = 0.0;
  for (std::size_t k = 0; k < tr.amplitude.size(); ++k)
    e = std::max(e, std::abs(tr.amplitude[k] - stationary_analytic(w, mu, tr.grid.time(k))));
  return e;
}

// Residue kernel hidden behind a plain two-time call, forcing the O(N^2) path.
struct TwoTimeOnly {
  ExponentialKernel k;
  cplx operator()(double t, double tp) const { return k.lag(t - tp); }
};

struct ZeroKernel {
  cplx operator()(double, double) const { return 0.0; }
};

}  // namespace

TEST(TimeGrid, CoversHorizon) {
  const TimeGrid g = make_grid(100.0, 1e-3);
  EXPECT_EQ(g.n_steps, 100000u);
  EXPECT_EQ(g.size(), 100001u);
  EXPECT_NEAR(g.t_end(), 100.0, 1e-9);
  EXPECT_EQ(make_grid(1.0, 0.3).n_steps, 4u);
  EXPECT_THROW(make_grid(1.0, 0.0), ParameterError);
  EXPECT_THROW(make_grid(0.1, 1.0), ParameterError);
}

TEST(SolverKind, ParseRoundTrip) {
  EXPECT_EQ(parse_solver("aux"), SolverKind::Aux);
  EXPECT_EQ(parse_solver(to_string(SolverKind::History)), SolverKind::History);
  EXPECT_THROW(parse_solver("euler"), ParameterError);
}

// ---- closed form

TEST(StationaryAnalytic, ReferenceValues) {
  EXPECT_EQ(stationary_analytic(0.0025, 0.01, 0.0), cplx(1.0));
  EXPECT_NEAR(stationary_analytic(0.0025, 0.01, 10.0).real(), 0.881546402697080, 1e-13);
  EXPECT_NEAR(stationary_analytic(0.005, 0.01, 10.0).real(), 0.767974440960756, 1e-13);
  EXPECT_NEAR(std::pow(stationary_analytic(0.0025, 0.01, 10.0).real(), 4), 0.603921804798994, 1e-13);
}

TEST(StationaryAnalytic, AgreesWithRootForm) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const double w = std::pow(10.0, -4.0 + 3.0 * u(rng));
    const cplx mu{std::pow(10.0, -3.0 + 3.0 * u(rng)), u(rng) - 0.5};
    if (std::abs(mu * mu - 4.0 * w) < 1e-6) continue;
    const double t = 100.0 * u(rng);
    EXPECT_LE(std::abs(stationary_analytic(w, mu, t) - oracle::damped_root_form(w, mu, t)), 1e-10);
  }
}

TEST(StationaryAnalytic, CriticalPointIsRegular) {
  // Lambda^2 = 4W: C = e^{-Lt/2}(1 + Lt/2)
  const double l = 0.2, w = 0.01;
  for (double t : {0.0, 1.0, 10.0, 50.0})
    EXPECT_NEAR(stationary_analytic(w, l, t).real(), std::exp(-0.5 * l * t) * (1.0 + 0.5 * l * t), 1e-14);
}

TEST(StationaryAnalytic, DerivativeMatchesFiniteDifference) {
  const double w = 0.0025;
  const cplx mu{0.01, 0.02};
  for (double t : {0.0, 3.0, 33.0, 80.0}) {
    const double h = 1e-4;
    const cplx fd = (stationary_analytic(w, mu, t + h) - stationary_analytic(w, mu, t - h)) / (2.0 * h);
    EXPECT_LE(std::abs(stationary_analytic_derivative(w, mu, t) - fd), 1e-9);
  }
}

// ---- aux solver

TEST(AuxSolver, MatchesClosedForm) {
  const auto tr = solve_aux(single(0.0025, 0.01), make_grid(100.0, 1e-3));
  EXPECT_LE(max_error_vs_analytic(tr, 0.0025, 0.01), 1e-8);
  for (std::size_t k = 0; k < tr.amplitude.size(); k += 997)
    EXPECT_LE(std::abs(tr.derivative[k] - stationary_analytic_derivative(0.0025, 0.01, tr.grid.time(k))), 1e-10);
}

TEST(AuxSolver, FourthOrder) {
  const double w = 0.25;
  const cplx mu{0.1, 0.3};
  std::vector<double> err;
  for (double dt : {1.0, 0.5, 0.25, 0.125})
    err.push_back(max_error_vs_analytic(solve_aux(single(w, mu), make_grid(40.0, dt)), w, mu));
  for (std::size_t i = 1; i < err.size(); ++i) {
    const double slope = std::log2(err[i - 1] / err[i]);
    EXPECT_NEAR(slope, 4.0, 0.3) << "dt level " << i;
  }
}

TEST(AuxSolver, ZeroWeightsLeaveAmplitudeAtOne) {
  ExponentialKernel k;
  k.branches.push_back({0.0, {0.3, 1.0}});
  k.branches.push_back({0.0, {0.7, -2.0}});
  const auto tr = solve_aux(k, make_grid(10.0, 0.01));
  for (const cplx c : tr.amplitude) EXPECT_EQ(c, cplx(1.0));
}

TEST(AuxSolver, RejectsGrowingBranches) {
  EXPECT_THROW(solve_aux(single(0.1, {0.0, 1.0}), make_grid(1.0, 0.1)), ParameterError);
  EXPECT_THROW(solve_aux(single(0.1, 1.0), TimeGrid{0.0, 0.1, 0}), ParameterError);
}

TEST(AuxSolver, BlowUpGuard) {
  // A negative weight pumps the amplitude.
  EXPECT_THROW(solve_aux(single(-1.0, 0.1), make_grid(50.0, 0.01)), SolverError);
}

// ---- history solver

TEST(HistorySolver, ZeroKernelKeepsAmplitude) {
  const auto tr = solve_history(ZeroKernel{}, make_grid(5.0, 0.05));
  for (const cplx c : tr.amplitude) EXPECT_EQ(c, cplx(1.0));
}

TEST(HistorySolver, MatchesClosedForm) {
  const auto tr = solve_history(single(0.0025, 0.01), make_grid(100.0, 1e-2));
  // second order: error ~ dt^2 * O(W)
  EXPECT_LE(max_error_vs_analytic(tr, 0.0025, 0.01), 1e-6);
}

TEST(HistorySolver, AtLeastSecondOrder) {
  const double w = 0.25;
  const cplx mu{0.1, 0.3};
  std::vector<double> err;
  for (double dt : {0.2, 0.1, 0.05, 0.025})
    err.push_back(max_error_vs_analytic(solve_history(single(w, mu), make_grid(40.0, dt)), w, mu));
  for (std::size_t i = 1; i < err.size(); ++i) EXPECT_GE(std::log2(err[i - 1] / err[i]), 1.8);
}

TEST(HistorySolver, GeneralPathMatchesLagPath) {
  SystemParams p;
  p.beta_omega0_over_gamma = 1.0;
  p.lambda_over_gamma = 0.1;
  const ExponentialKernel k = residue_kernel(p);
  const TimeGrid g = make_grid(20.0, 0.02);
  const auto lag = solve_history(k, g);
  const auto gen = solve_history(TwoTimeOnly{k}, g);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_LE(std::abs(lag.amplitude[i] - gen.amplitude[i]), 1e-12);
}

TEST(HistorySolver, RepeatableBitForBit) {
  SystemParams p;
  p.beta_omega0_over_gamma = 10.0;
  const ExponentialKernel k = residue_kernel(p);
  const TimeGrid g = make_grid(30.0, 1e-2);
  const auto a = solve_history(k, g);
  const auto b = solve_history(k, g);
  EXPECT_TRUE(a.amplitude == b.amplitude);
  EXPECT_TRUE(a.derivative == b.derivative);
}

TEST(HistorySolver, AgreesWithAuxOnTwoBranchKernel) {
  for (double bw : {0.0, 1.0, 10.0}) {
    SystemParams p;
    p.beta_omega0_over_gamma = bw;
    p.lambda_over_gamma = 0.1;
    p.delta_over_gamma = 0.5;
    const ExponentialKernel k = residue_kernel(p);
    const TimeGrid g = make_grid(50.0, 2e-3);
    const auto h = solve_history(k, g);
    const auto a = solve_aux(k, g);
    double dev = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) dev = std::max(dev, std::abs(h.amplitude[i] - a.amplitude[i]));
    EXPECT_LE(dev, 1e-4) << "beta_omega0 = " << bw;
  }
}

TEST(HistorySolver, SlowQubitQuasiStaticEstimate) {
  SystemParams p;
  p.beta_omega0_over_gamma = 1.0;
  const auto k = residue_kernel(p);
  cplx rate{};
  for (const auto& b : k.branches) rate += b.weight / b.rate;
  EXPECT_NEAR(rate.real(), 2.49975e-5, 1e-9);
  const auto tr = solve_history(k, make_grid(100.0, 1e-2));
  EXPECT_NEAR(std::abs(tr.amplitude.back()), std::exp(-rate.real() * 100.0), 5e-3);
}

TEST(Solvers, ContractiveOnRandomResidueKernels) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 60; ++i) {
    SystemParams p;
    p.lambda_over_gamma = std::pow(10.0, -2.0 + 2.0 * u(rng));
    p.delta_over_gamma = u(rng) - 0.5;
    p.beta_omega0_over_gamma = 20.0 * u(rng);
    const auto k = residue_kernel(p);
    const TimeGrid g = make_grid(60.0, 5e-3);
    const auto a = solve_aux(k, g);
    for (const cplx c : a.amplitude) ASSERT_LE(std::abs(c), 1.0 + 1e-9);
    if (i % 10 == 0) {
      const auto h = solve_history(k, g);
      for (const cplx c : h.amplitude) ASSERT_LE(std::abs(c), 1.0 + 1e-9);
    }
  }
}

TEST(Solvers, IdenticalKernelsGiveIdenticalTrajectories) {
  // A stationary qubit does not see the carrier, so omega0 drops out of the kernel.
  SystemParams a;
  a.delta_over_gamma = 0.05;
  SystemParams b = a;
  b.omega0_over_gamma = 3.0e3;
  const auto ka = residue_kernel(a);
  const auto kb = residue_kernel(b);
  ASSERT_EQ(ka.branches.size(), kb.branches.size());
  const TimeGrid g = make_grid(40.0, 1e-2);
  EXPECT_TRUE(solve_aux(ka, g).amplitude == solve_aux(kb, g).amplitude);
  EXPECT_TRUE(solve_history(ka, g).amplitude == solve_history(kb, g).amplitude);
}
