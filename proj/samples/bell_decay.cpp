// Concurrence of a Bell pair for a stationary and a moving qubit pair.

#include <movq/movq.hpp>

#include <cstdio>

int main() {
  for (double bw : {0.0, 1.0}) {
    movq::Scenario s;
    s.params.lambda_over_gamma = 0.01;
    s.params.beta_omega0_over_gamma = bw;
    s.params.t_max_gamma = 100.0;
    const auto r = movq::run_scenario(s);
    std::printf("beta*omega0 = %4.1f gamma:\n", bw);
    for (double t : {0.0, 25.0, 50.0, 75.0, 100.0}) {
      const auto k = movq::nearest_index(r.trajectory.grid, t);
      std::printf("  gamma t = %5.1f  C = %.6f\n", t, r.concurrence[k]);
    }
  }
}
