#pragma once

#include <cmath>

#include "phasync/errors.hpp"

namespace phasync {

struct RosslerParams {
  double a = 0.15;
  double b = 0.2;
  double c = 10.0;

  void validate() const {
    detail::require(std::isfinite(a) && std::isfinite(b) && std::isfinite(c),
                    "Rossler parameters must be finite");
  }
};

struct OscillatorState {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend constexpr bool operator==(const OscillatorState&, const OscillatorState&) = default;
};

// Any state component beyond this magnitude aborts a run.
inline constexpr double kDivergenceBound = 1e6;

// Rossler vector field with natural frequency omega. `coupling` is injected
// into the x-equation only.
constexpr OscillatorState rossler_derivative(const OscillatorState& s, double omega,
                                             double coupling,
                                             const RosslerParams& p) noexcept {
  return {-omega * s.y - s.z + coupling, omega * s.x + p.a * s.y, p.b + s.z * (s.x - p.c)};
}

}  // namespace phasync
