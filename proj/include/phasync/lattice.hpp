#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "phasync/errors.hpp"
#include "phasync/grid.hpp"
#include "phasync/integrator.hpp"
#include "phasync/rossler.hpp"

namespace phasync {

// Symmetric on/off gates of the positive connections over the 8-neighborhood.
// Bit d of cell (r, c) gates the link towards (r, c) + kNeighborOffsets[d].
class GateSet {
 public:
  GateSet() = default;
  explicit GateSet(Shape shape) : bits_(shape, 0) {}

  static GateSet all_open(Shape shape) {
    GateSet g(shape);
    for (std::size_t r = 0; r < shape.rows; ++r)
      for (std::size_t c = 0; c < shape.cols; ++c)
        for (int d = 0; d < 8; ++d)
          if (g.neighbor_in_bounds(r, c, d)) g.bits_(r, c) |= static_cast<std::uint8_t>(1u << d);
    return g;
  }

  const Shape& shape() const noexcept { return bits_.shape(); }

  bool neighbor_in_bounds(std::size_t r, std::size_t c, int d) const noexcept {
    const auto o = kNeighborOffsets[d];
    return shape().contains(static_cast<std::ptrdiff_t>(r) + o.dr,
                            static_cast<std::ptrdiff_t>(c) + o.dc);
  }

  bool open(std::size_t r, std::size_t c, int d) const noexcept {
    return (bits_(r, c) >> d) & 1u;
  }

  std::uint8_t mask(std::size_t cell) const noexcept { return bits_[cell]; }

  // Sets the link and its mirror, so the set stays symmetric.
  void set(std::size_t r, std::size_t c, int d, bool on) {
    detail::require(neighbor_in_bounds(r, c, d), "gate target outside the lattice");
    const auto o = kNeighborOffsets[d];
    const std::size_t pr = r + static_cast<std::size_t>(static_cast<std::ptrdiff_t>(o.dr));
    const std::size_t pc = c + static_cast<std::size_t>(static_cast<std::ptrdiff_t>(o.dc));
    assign(r, c, d, on);
    assign(pr, pc, opposite_direction(d), on);
  }

  // Number of unordered neighbor pairs whose gate is open.
  std::size_t open_pair_count() const noexcept {
    std::size_t n = 0;
    for (auto b : bits_) n += static_cast<std::size_t>(std::popcount(b));
    return n / 2;
  }

  bool symmetric() const noexcept {
    for (std::size_t r = 0; r < shape().rows; ++r)
      for (std::size_t c = 0; c < shape().cols; ++c)
        for (int d = 0; d < 8; ++d) {
          if (!neighbor_in_bounds(r, c, d)) {
            if (open(r, c, d)) return false;
            continue;
          }
          const auto o = kNeighborOffsets[d];
          if (open(r, c, d) != open(r + o.dr, c + o.dc, opposite_direction(d))) return false;
        }
    return true;
  }

  friend bool operator==(const GateSet&, const GateSet&) = default;

 private:
  void assign(std::size_t r, std::size_t c, int d, bool on) {
    auto& b = bits_(r, c);
    b = on ? static_cast<std::uint8_t>(b | (1u << d)) : static_cast<std::uint8_t>(b & ~(1u << d));
  }

  Grid<std::uint8_t> bits_;
};

// Number of unordered 8-adjacent pairs in a lattice.
constexpr std::size_t adjacent_pair_count(Shape s) noexcept {
  if (s.rows == 0 || s.cols == 0) return 0;
  const std::size_t h = s.rows * (s.cols - 1);
  const std::size_t v = (s.rows - 1) * s.cols;
  const std::size_t diag = 2 * (s.rows - 1) * (s.cols - 1);
  return h + v + diag;
}

using LatticeField = Grid<OscillatorState>;

struct LatticeParams {
  Grid<double> omega;
  Grid<double> k_plus;
  Grid<double> k_minus;
  GateSet gates;
  RosslerParams params;

  const Shape& shape() const noexcept { return omega.shape(); }

  void validate(const Shape& field_shape) const {
    detail::require(field_shape.rows >= 1 && field_shape.cols >= 1, "lattice must be non-empty");
    const auto check = [&](const Shape& s, const char* what) {
      if (s != field_shape)
        throw ConfigError(std::string("lattice ") + what + " map shape " + to_string(s) +
                          " does not match field shape " + to_string(field_shape));
    };
    check(omega.shape(), "omega");
    check(k_plus.shape(), "k_plus");
    check(k_minus.shape(), "k_minus");
    check(gates.shape(), "gate");
    params.validate();
  }

  // Homogeneous parameters: every gate open, uniform frequency and strengths.
  static LatticeParams uniform(Shape shape, double omega, double k_plus, double k_minus) {
    return {Grid<double>(shape, omega), Grid<double>(shape, k_plus),
            Grid<double>(shape, k_minus), GateSet::all_open(shape), RosslerParams{}};
  }
};

namespace detail {

// Precomputed in-bounds neighbor indices (-1 when off-grid).
struct NeighborTable {
  Shape shape;
  std::vector<std::array<std::int64_t, 8>> index;

  explicit NeighborTable(Shape s) : shape(s), index(s.size()) {
    for (std::size_t r = 0; r < s.rows; ++r)
      for (std::size_t c = 0; c < s.cols; ++c)
        for (int d = 0; d < 8; ++d) {
          const auto pr = static_cast<std::ptrdiff_t>(r) + kNeighborOffsets[d].dr;
          const auto pc = static_cast<std::ptrdiff_t>(c) + kNeighborOffsets[d].dc;
          index[s.index(r, c)][d] =
              s.contains(pr, pc) ? static_cast<std::int64_t>(s.index(static_cast<std::size_t>(pr),
                                                                     static_cast<std::size_t>(pc)))
                                 : -1;
        }
  }
};

struct DifferenceSums {
  double gated = 0.0;  // sum over open gates of (x_nbr - x_cell)
  double all = 0.0;    // sum over every in-bounds neighbor
};

inline DifferenceSums difference_sums(std::span<const double> x, const NeighborTable& table,
                                      const GateSet& gates, std::size_t cell) noexcept {
  DifferenceSums sums;
  const double xi = x[cell];
  const auto& nbr = table.index[cell];
  const std::uint8_t mask = gates.mask(cell);
  for (int d = 0; d < 8; ++d) {
    if (nbr[d] < 0) continue;
    const double diff = x[static_cast<std::size_t>(nbr[d])] - xi;
    sums.all += diff;
    if ((mask >> d) & 1u) sums.gated += diff;
  }
  return sums;
}

}  // namespace detail

// Gated positive difference sum at one cell. Off-grid neighbors are skipped.
inline double positive_difference(const Grid<double>& x, const GateSet& gates, std::size_t r,
                                  std::size_t c) {
  double sum = 0.0;
  for (int d = 0; d < 8; ++d) {
    if (!gates.neighbor_in_bounds(r, c, d) || !gates.open(r, c, d)) continue;
    sum += x(r + kNeighborOffsets[d].dr, c + kNeighborOffsets[d].dc) - x(r, c);
  }
  return sum;
}

// Ungated difference sum at one cell.
inline double negative_difference(const Grid<double>& x, std::size_t r, std::size_t c) {
  double sum = 0.0;
  for (int d = 0; d < 8; ++d) {
    const auto o = kNeighborOffsets[d];
    if (!x.shape().contains(static_cast<std::ptrdiff_t>(r) + o.dr,
                            static_cast<std::ptrdiff_t>(c) + o.dc))
      continue;
    sum += x(r + o.dr, c + o.dc) - x(r, c);
  }
  return sum;
}

inline Grid<double> x_component(const LatticeField& field) {
  Grid<double> x(field.shape());
  for (std::size_t i = 0; i < field.size(); ++i) x[i] = field[i].x;
  return x;
}

// Total coupling injected into the x-equation of cell (r, c): the positive
// term is attractive and gated, the negative term is repulsive and always on.
inline double lattice_coupling(const LatticeField& field, const LatticeParams& params,
                               std::size_t r, std::size_t c) {
  params.validate(field.shape());
  detail::require(r < field.rows() && c < field.cols(), "cell outside the lattice");
  const auto x = x_component(field);
  return params.k_plus(r, c) * positive_difference(x, params.gates, r, c) -
         params.k_minus(r, c) * negative_difference(x, r, c);
}

// Called once per step with the step's start time; may rewrite k_plus and
// k_minus in place. Shapes must not change.
using CouplingRefresh = std::function<void(double t, Grid<double>& k_plus, Grid<double>& k_minus)>;

inline Trajectory integrate_lattice(const LatticeField& field, LatticeParams params,
                                    const IntegrationConfig& integ,
                                    const CouplingRefresh& refresh = {}, bool with_z = false) {
  params.validate(field.shape());
  const Shape shape = field.shape();
  const std::size_t n = shape.size();
  const detail::NeighborTable table(shape);
  const auto& p = params.params;

  auto system = [&](std::span<const double> s, std::span<double> d, double) {
    const auto x = s.subspan(0, n);
    const double* omega = params.omega.values().data();
    const double* kp = params.k_plus.values().data();
    const double* km = params.k_minus.values().data();
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n; ++i) {
      const auto sums = detail::difference_sums(x, table, params.gates, i);
      const double coupling = kp[i] * sums.gated - km[i] * sums.all;
      const auto ds = rossler_derivative({s[i], s[n + i], s[2 * n + i]}, omega[i], coupling, p);
      d[i] = ds.x;
      d[n + i] = ds.y;
      d[2 * n + i] = ds.z;
    }
  };

  auto before_step = [&](double t) {
    if (!refresh) return;
    refresh(t, params.k_plus, params.k_minus);
    if (params.k_plus.shape() != shape || params.k_minus.shape() != shape)
      throw ConfigError("coupling refresh changed the map shape");
  };

  return detail::run_fixed_step(system, before_step, detail::to_soa(field.values()), shape,
                                integ, with_z);
}

inline LatticeField random_lattice(Shape shape, std::uint64_t seed) {
  return LatticeField(shape, random_initial_states(shape.size(), seed));
}

}  // namespace phasync
