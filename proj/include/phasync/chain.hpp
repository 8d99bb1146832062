#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "phasync/errors.hpp"
#include "phasync/integrator.hpp"
#include "phasync/rossler.hpp"

namespace phasync {

// Open chain of n Rossler oscillators with nearest-neighbor diffusive
// coupling in x. End oscillators have a single neighbor.
struct ChainConfig {
  std::size_t n = 50;
  double k = 0.05;
  std::vector<double> omegas;
  RosslerParams params;

  void validate() const {
    detail::require(n >= 2, "a chain needs at least 2 oscillators");
    detail::require(std::isfinite(k) && k >= 0.0, "chain coupling k must be >= 0");
    detail::require(omegas.size() == n, "chain needs one natural frequency per oscillator");
    for (double w : omegas)
      detail::require(w >= 0.9 && w <= 1.1,
                      "chain natural frequency " + std::to_string(w) + " outside [0.9, 1.1]");
    params.validate();
  }
};

inline std::vector<double> random_omegas(std::size_t n, double lo, double hi, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> out(n);
  for (auto& w : out) w = dist(rng);
  return out;
}

// Attractive coupling term k * sum over neighbors of (x_nbr - x_i).
inline double chain_coupling(std::span<const double> x, double k, std::size_t i) {
  const std::size_t n = x.size();
  double sum = 0.0;
  if (i > 0) sum += x[i - 1] - x[i];
  if (i + 1 < n) sum += x[i + 1] - x[i];
  return k * sum;
}

inline Trajectory integrate_chain(const ChainConfig& config, const IntegrationConfig& integ,
                                  std::span<const OscillatorState> initial,
                                  bool with_z = false) {
  config.validate();
  detail::require(initial.size() == config.n, "chain initial state count must equal n");
  const std::size_t n = config.n;
  const auto& p = config.params;

  auto system = [&](std::span<const double> s, std::span<double> d, double) {
    const auto x = s.subspan(0, n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto ds = rossler_derivative({s[i], s[n + i], s[2 * n + i]}, config.omegas[i],
                                         chain_coupling(x, config.k, i), p);
      d[i] = ds.x;
      d[n + i] = ds.y;
      d[2 * n + i] = ds.z;
    }
  };
  return detail::run_fixed_step(system, [](double) {}, detail::to_soa(initial), Shape{1, n},
                                integ, with_z);
}

}  // namespace phasync
