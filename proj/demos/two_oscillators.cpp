// Two mismatched Rossler oscillators under increasing x-coupling. Prints the
// phase difference drift over the last half of the run and the largest x gap.
#include <cmath>
#include <cstdio>

#include "phasync.hpp"

int main() {
  using namespace phasync;
  IntegrationConfig integ;
  integ.t_end = 400.0;
  const auto initial = random_initial_states(2, integ.seed);

  std::printf("%8s %14s %12s\n", "k", "drift(dphi)", "max|dx|");
  for (double k : {0.0, 0.01, 0.02, 0.04, 0.08, 0.16, 0.5}) {
    ChainConfig chain;
    chain.n = 2;
    chain.k = k;
    chain.omegas = {0.97, 1.03};
    const auto traj = integrate_chain(chain, integ, initial);
    const auto trace = phase_trace(traj);
    const std::size_t last = trace.samples() - 1, mid = trace.sample_at_or_after(200.0);
    const double d_mid = trace.phi_at(mid, 0) - trace.phi_at(mid, 1);
    const double d_end = trace.phi_at(last, 0) - trace.phi_at(last, 1);
    double gap = 0.0;
    for (std::size_t s = mid; s <= last; ++s) gap = std::max(gap, std::abs(traj.x_at(s, 0) - traj.x_at(s, 1)));
    std::printf("%8.3f %14.3f %12.3f\n", k, d_end - d_mid, gap);
  }
}
