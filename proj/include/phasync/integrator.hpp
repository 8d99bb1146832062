#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "phasync/errors.hpp"
#include "phasync/grid.hpp"
#include "phasync/rossler.hpp"

namespace phasync {

struct IntegrationConfig {
  double dt = 0.01;
  double t_end = 500.0;
  std::size_t sample_stride = 50;
  std::uint64_t seed = 42;
  // Transient excluded from every statistic.
  double burn_in = 50.0;

  void validate() const {
    detail::require(std::isfinite(dt) && dt > 0.0, "dt must be positive");
    detail::require(std::isfinite(t_end) && t_end > dt, "t_end must exceed dt");
    detail::require(sample_stride >= 1, "sample_stride must be at least 1");
    detail::require(std::isfinite(burn_in) && burn_in >= 0.0 && burn_in < t_end,
                    "burn_in must lie in [0, t_end)");
  }

  std::size_t step_count() const { return static_cast<std::size_t>(std::llround(t_end / dt)); }
  double sample_period() const { return dt * static_cast<double>(sample_stride); }
};

// Classical fourth-order Runge-Kutta on a flat state vector. The system is
// called as system(state, derivative, t) and always sees a complete stage
// snapshot of the whole state.
class Rk4Stepper {
 public:
  explicit Rk4Stepper(std::size_t n) : stage_(n), k1_(n), k2_(n), k3_(n), k4_(n) {}

  std::size_t size() const noexcept { return stage_.size(); }

  template <typename System>
  void step(System&& system, std::span<double> state, double t, double dt) {
    const std::size_t n = stage_.size();
    const double half = 0.5 * dt;
    const double sixth = dt / 6.0;

    system(std::span<const double>(state), std::span<double>(k1_), t);
    for (std::size_t i = 0; i < n; ++i) stage_[i] = state[i] + half * k1_[i];
    system(std::span<const double>(stage_), std::span<double>(k2_), t + half);
    for (std::size_t i = 0; i < n; ++i) stage_[i] = state[i] + half * k2_[i];
    system(std::span<const double>(stage_), std::span<double>(k3_), t + half);
    for (std::size_t i = 0; i < n; ++i) stage_[i] = state[i] + dt * k3_[i];
    system(std::span<const double>(stage_), std::span<double>(k4_), t + dt);
    for (std::size_t i = 0; i < n; ++i)
      state[i] += sixth * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
  }

 private:
  std::vector<double> stage_, k1_, k2_, k3_, k4_;
};

// Index of the first component that is non-finite or beyond the bound, or -1.
inline std::ptrdiff_t find_divergence(std::span<const double> state,
                                      double bound = kDivergenceBound) noexcept {
  for (std::size_t i = 0; i < state.size(); ++i)
    if (!(std::abs(state[i]) <= bound)) return static_cast<std::ptrdiff_t>(i);
  return -1;
}

// Sampled trajectory of a population of oscillators. Samples are stored
// sample-major: value(sample, cell) = x[sample * cells + cell].
struct Trajectory {
  Shape shape;
  std::vector<double> times;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> z;  // empty unless requested

  std::size_t cells() const noexcept { return shape.size(); }
  std::size_t samples() const noexcept { return times.size(); }
  bool has_z() const noexcept { return !z.empty(); }

  double x_at(std::size_t sample, std::size_t cell) const { return x[sample * cells() + cell]; }
  double y_at(std::size_t sample, std::size_t cell) const { return y[sample * cells() + cell]; }
  double z_at(std::size_t sample, std::size_t cell) const { return z[sample * cells() + cell]; }

  // Per-cell series copies.
  std::vector<double> x_series(std::size_t cell) const { return column(x, cell); }
  std::vector<double> y_series(std::size_t cell) const { return column(y, cell); }

  friend bool operator==(const Trajectory&, const Trajectory&) = default;

 private:
  std::vector<double> column(const std::vector<double>& v, std::size_t cell) const {
    std::vector<double> out(samples());
    for (std::size_t s = 0; s < out.size(); ++s) out[s] = v[s * cells() + cell];
    return out;
  }
};

namespace detail {

// Appends the current structure-of-arrays state [x..., y..., z...] as a sample.
inline void record_sample(Trajectory& traj, std::span<const double> state, double t,
                          bool with_z) {
  const std::size_t n = traj.cells();
  traj.times.push_back(t);
  traj.x.insert(traj.x.end(), state.begin(), state.begin() + n);
  traj.y.insert(traj.y.end(), state.begin() + n, state.begin() + 2 * n);
  if (with_z) traj.z.insert(traj.z.end(), state.begin() + 2 * n, state.begin() + 3 * n);
}

inline std::vector<double> to_soa(std::span<const OscillatorState> states) {
  const std::size_t n = states.size();
  std::vector<double> soa(3 * n);
  for (std::size_t i = 0; i < n; ++i) {
    soa[i] = states[i].x;
    soa[n + i] = states[i].y;
    soa[2 * n + i] = states[i].z;
  }
  return soa;
}

// Runs the fixed-step loop shared by every integrate_* entry point.
template <typename System, typename BeforeStep>
Trajectory run_fixed_step(System&& system, BeforeStep&& before_step, std::vector<double> state,
                          Shape shape, const IntegrationConfig& integ, bool with_z) {
  integ.validate();
  Trajectory traj;
  traj.shape = shape;
  const std::size_t steps = integ.step_count();
  const std::size_t expected = steps / integ.sample_stride + 1;
  traj.times.reserve(expected);
  traj.x.reserve(expected * shape.size());
  traj.y.reserve(expected * shape.size());
  if (with_z) traj.z.reserve(expected * shape.size());

  if (auto bad = find_divergence(state); bad >= 0)
    throw DivergenceError(0.0, static_cast<std::size_t>(bad));
  record_sample(traj, state, 0.0, with_z);

  Rk4Stepper stepper(state.size());
  for (std::size_t step = 0; step < steps; ++step) {
    const double t = static_cast<double>(step) * integ.dt;
    before_step(t);
    stepper.step(system, std::span<double>(state), t, integ.dt);
    const double t_next = static_cast<double>(step + 1) * integ.dt;
    if (auto bad = find_divergence(state); bad >= 0)
      throw DivergenceError(t_next, static_cast<std::size_t>(bad));
    if ((step + 1) % integ.sample_stride == 0) record_sample(traj, state, t_next, with_z);
  }
  return traj;
}

}  // namespace detail

// Uniform random states x, y in [-5, 5], z in [0, 0.5], drawn in cell order.
inline std::vector<OscillatorState> random_initial_states(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> xy(-5.0, 5.0);
  std::uniform_real_distribution<double> zdist(0.0, 0.5);
  std::vector<OscillatorState> out(n);
  for (auto& s : out) {
    s.x = xy(rng);
    s.y = xy(rng);
    s.z = zdist(rng);
  }
  return out;
}

// A single uncoupled oscillator; the reference for lattice decoupling checks.
inline Trajectory integrate_single(const OscillatorState& initial, double omega,
                                   const RosslerParams& params, const IntegrationConfig& integ,
                                   bool with_z = false) {
  params.validate();
  auto system = [&](std::span<const double> s, std::span<double> d, double) {
    const auto ds = rossler_derivative({s[0], s[1], s[2]}, omega, 0.0, params);
    d[0] = ds.x;
    d[1] = ds.y;
    d[2] = ds.z;
  };
  return detail::run_fixed_step(system, [](double) {}, {initial.x, initial.y, initial.z},
                                Shape{1, 1}, integ, with_z);
}

}  // namespace phasync
