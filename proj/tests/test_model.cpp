#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <movq/model.hpp>

using namespace movq;

namespace {

SystemParams fig2_params() {
  SystemParams p;
  p.lambda_over_gamma = 0.01;
  p.delta_over_gamma = 0.0;
  p.beta_omega0_over_gamma = 1.0;
  p.omega0_over_gamma = 1e4;
  p.t_max_gamma = 100.0;
  p.dt_gamma = 1e-3;
  return p;
}

std::string failure_of(const SystemParams& p) {
  try {
    validate_params(p);
  } catch (const ParameterError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(ValidateParams, AcceptsFigureTwoParameters) {
  const SystemParams p = fig2_params();
  EXPECT_EQ(validate_params(p), p);
}

TEST(ValidateParams, RejectsNonPositiveLambda) {
  SystemParams p = fig2_params();
  p.lambda_over_gamma = 0.0;
  const std::string msg = failure_of(p);
  EXPECT_NE(msg.find("lambda must be positive"), std::string::npos) << msg;
  EXPECT_NE(msg.find("got 0"), std::string::npos) << msg;
}

TEST(ValidateParams, RejectsSuperluminalBeta) {
  SystemParams p = fig2_params();
  p.beta_omega0_over_gamma = 2e4;
  EXPECT_NE(failure_of(p).find("beta >= 1"), std::string::npos);
}

TEST(ValidateParams, ReportsFirstViolation) {
  SystemParams p = fig2_params();
  p.lambda_over_gamma = -1.0;
  p.dt_gamma = -1.0;
  EXPECT_NE(failure_of(p).find("lambda"), std::string::npos);
  p.lambda_over_gamma = 1.0;
  EXPECT_NE(failure_of(p).find("dt must be positive"), std::string::npos);
  p.dt_gamma = 1.0;
  p.t_max_gamma = 0.5;
  EXPECT_NE(failure_of(p).find("t_max"), std::string::npos);
  p.t_max_gamma = 10.0;
  p.delta_over_gamma = 2e4;
  EXPECT_NE(failure_of(p).find("|delta|"), std::string::npos);
}

TEST(MapVelocity, ReferenceConversion) {
  EXPECT_DOUBLE_EQ(map_velocity(1.0), 0.2);
  EXPECT_DOUBLE_EQ(map_velocity(0.0), 0.0);
  EXPECT_DOUBLE_EQ(map_velocity(100.0), 20.0);
  EXPECT_THROW(map_velocity(-1.0), ParameterError);
}

TEST(MapVelocity, IsLinear) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1000.0);
  for (int i = 0; i < 1000; ++i) {
    const double a = u(rng), b = u(rng);
    const double lhs = map_velocity(a + b);
    const double rhs = map_velocity(a) + map_velocity(b);
    EXPECT_NEAR(lhs, rhs, 4.0 * std::numeric_limits<double>::epsilon() * std::abs(lhs));
  }
}

TEST(Feasibility, UnitVelocityIsClassicalAndRecoilFree) {
  const auto rep = check_feasibility(1.0);
  EXPECT_DOUBLE_EQ(rep.velocity_mps, 0.2);
  // 1e-19 / (0.2 / c)
  EXPECT_NEAR(rep.de_broglie_ratio, 1.49896229e-10, 1e-18);
  EXPECT_TRUE(rep.classical_ok);
  EXPECT_TRUE(rep.recoil_ok);
}

TEST(Feasibility, RecoilBoundViolatedBelowTenToMinusSeven) {
  const auto rep = check_feasibility(5e-7);
  EXPECT_NEAR(rep.velocity_mps, 1e-7, 1e-22);
  EXPECT_FALSE(rep.recoil_ok);
}

TEST(Feasibility, StationaryQubitConvention) {
  const auto rep = check_feasibility(0.0);
  EXPECT_EQ(rep.velocity_mps, 0.0);
  EXPECT_EQ(rep.de_broglie_ratio, 0.0);
  EXPECT_TRUE(rep.classical_ok);
  EXPECT_FALSE(rep.recoil_ok);
}

TEST(Feasibility, ClassicalMarginIsStrict) {
  // ratio = 1e-19 c / (0.2 x) crosses 1e-3 at x = 1e-16 c / 0.2
  const double edge = 1e-16 * kSpeedOfLight / 0.2;
  EXPECT_FALSE(check_feasibility(edge * 0.5).classical_ok);
  EXPECT_TRUE(check_feasibility(edge * 2.0).classical_ok);
}

TEST(CouplingRegime, Classification) {
  EXPECT_EQ(coupling_regime(0.01), CouplingRegime::Strong);
  EXPECT_EQ(coupling_regime(3.0), CouplingRegime::Weak);
  EXPECT_EQ(coupling_regime(2.0), CouplingRegime::Critical);
  EXPECT_THROW(coupling_regime(0.0), ParameterError);
  EXPECT_THROW(coupling_regime(-1.0), ParameterError);
}

TEST(CouplingRegime, MonotoneInLambda) {
  auto rank = [](CouplingRegime r) { return r == CouplingRegime::Strong ? 0 : r == CouplingRegime::Critical ? 1 : 2; };
  double prev = 1e-4;
  for (double l = 1e-4; l < 100.0; l *= 1.07) {
    EXPECT_LE(rank(coupling_regime(prev)), rank(coupling_regime(l)));
    prev = l;
  }
}

TEST(DeskGeometry, SmallestAdmissibleMode) {
  SystemParams p = fig2_params();
  p.beta_omega0_over_gamma = 40.0;
  auto g = desk_scale_geometry(p);
  // ceil(0.4 * 1e4 / pi) = ceil(1273.24)
  EXPECT_EQ(g.n_mode, 1274);
  EXPECT_NEAR(g.tau_gamma, 0.40023890406733964, 1e-15);

  p.beta_omega0_over_gamma = 1.0;
  g = desk_scale_geometry(p);
  EXPECT_EQ(g.n_mode, 32);
  EXPECT_NEAR(g.tau_gamma, 0.010053096491487338, 1e-16);

  p.beta_omega0_over_gamma = 0.0;
  g = desk_scale_geometry(p);
  EXPECT_EQ(g.n_mode, 1);
  EXPECT_DOUBLE_EQ(g.tau_gamma, std::numbers::pi / 1e4);
}

TEST(DeskGeometry, InvariantsHoldForRandomParameters) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 5000; ++i) {
    SystemParams p;
    p.omega0_over_gamma = std::pow(10.0, 2.0 + 4.0 * u(rng));
    p.lambda_over_gamma = std::pow(10.0, -3.0 + 4.0 * u(rng));
    p.delta_over_gamma = (u(rng) - 0.5) * 0.1 * p.omega0_over_gamma;
    p.beta_omega0_over_gamma = (i % 10 == 0) ? 0.0 : u(rng) * 0.5 * p.omega0_over_gamma;
    p.t_max_gamma = 1.0 + 200.0 * u(rng);
    p.dt_gamma = 1e-3;
    ASSERT_NO_THROW(validate_params(p));
    const auto g = desk_scale_geometry(p);
    ASSERT_TRUE(geometry_consistent(p, g)) << "n=" << g.n_mode << " tau=" << g.tau_gamma;
    if (g.n_mode > 1) {
      // minimality
      const double smaller = static_cast<double>(g.n_mode - 1) * std::numbers::pi / p.omega1();
      ASSERT_LT(smaller, p.beta() * p.t_max_gamma);
    }
  }
}

TEST(DeskGeometry, ExplicitModeRejectsZero) {
  EXPECT_THROW(geometry_for_mode(fig2_params(), 0), ParameterError);
}
