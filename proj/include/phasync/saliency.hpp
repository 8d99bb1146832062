#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <utility>

#include "phasync/errors.hpp"
#include "phasync/grid.hpp"
#include "phasync/image.hpp"
#include "phasync/lattice.hpp"

namespace phasync {

// Feature planes in fixed order: intensity, red, green, blue.
enum Feature : std::size_t { kIntensity = 0, kRed = 1, kGreen = 2, kBlue = 3 };

using FeatureWeights = std::array<double, 4>;

inline constexpr FeatureWeights kDefaultWeights = {3.0, 1.0, 1.0, 1.0};

struct FeatureStack {
  std::array<Grid<double>, 4> planes;
  FeatureWeights weights = kDefaultWeights;
  std::array<double, 4> means{};

  const Shape& shape() const noexcept { return planes[0].shape(); }
};

struct SaliencyConfig {
  double sigma = 0.4;
  double delta_omega = 0.2;
  double k_plus_max = 0.05;
  double k_minus_max = 0.02;
  // Positive links are cut between neighbors whose RGB distance exceeds this.
  double color_gate_threshold = 0.1;
  FeatureWeights weights = kDefaultWeights;

  void validate() const {
    detail::require(std::isfinite(sigma) && sigma > 0.0, "sigma must be positive");
    detail::require(std::isfinite(delta_omega) && delta_omega >= 0.0,
                    "delta_omega must be >= 0");
    detail::require(std::isfinite(k_plus_max) && k_plus_max >= 0.0, "k_plus_max must be >= 0");
    detail::require(std::isfinite(k_minus_max) && k_minus_max >= 0.0,
                    "k_minus_max must be >= 0");
    detail::require(std::isfinite(color_gate_threshold) && color_gate_threshold >= 0.0 &&
                        color_gate_threshold <= std::sqrt(3.0),
                    "color_gate_threshold must lie in [0, sqrt(3)]");
    double total = 0.0;
    for (double w : weights) {
      detail::require(std::isfinite(w) && w >= 0.0, "feature weights must be >= 0");
      total += w;
    }
    detail::require(total > 0.0, "feature weights must not all be zero");
  }
};

struct SaliencyMaps {
  Grid<double> contrast;           // absolute contrast C
  Grid<double> relative_contrast;  // R
  Grid<double> k_plus;
  Grid<double> k_minus;
  Grid<double> omega;
};

inline FeatureStack extract_features(const RgbImage& image,
                                     const FeatureWeights& weights = kDefaultWeights) {
  detail::require(!image.empty(), "cannot extract features from an empty image");
  detail::require(image.max_value > 0, "image max_value must be positive");
  FeatureStack fs;
  fs.weights = weights;
  const Shape shape = image.shape();
  for (auto& p : fs.planes) p = Grid<double>(shape);
  const double scale = static_cast<double>(image.max_value);
  for (std::size_t i = 0; i < shape.size(); ++i) {
    const auto& px = image.pixels[i];
    const double r = px[0] / scale;
    const double g = px[1] / scale;
    const double b = px[2] / scale;
    fs.planes[kRed][i] = r;
    fs.planes[kGreen][i] = g;
    fs.planes[kBlue][i] = b;
    fs.planes[kIntensity][i] = (r + g + b) / 3.0;
  }
  // Summed as offsets from the first pixel, so a flat plane has an exact mean.
  for (std::size_t d = 0; d < 4; ++d) {
    const double base = fs.planes[d][0];
    double sum = 0.0;
    for (double v : fs.planes[d]) sum += v - base;
    fs.means[d] = base + sum / static_cast<double>(shape.size());
  }
  return fs;
}

// Weighted mean absolute deviation of each pixel's features from the image means.
inline Grid<double> absolute_contrast(const FeatureStack& fs) {
  double total = 0.0;
  for (double w : fs.weights) total += w;
  detail::require(total > 0.0, "feature weights must not all be zero");
  Grid<double> c(fs.shape());
  for (std::size_t i = 0; i < c.size(); ++i) {
    double acc = 0.0;
    for (std::size_t d = 0; d < 4; ++d) acc += fs.weights[d] * std::abs(fs.planes[d][i] - fs.means[d]);
    c[i] = std::min(1.0, acc / total);
  }
  return c;
}

namespace detail {

inline Grid<double> gaussian_of_gap(const Grid<double>& contrast, double level, double sigma) {
  const double denom = 2.0 * sigma * sigma;
  Grid<double> r(contrast.shape());
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double gap = level - contrast[i];
    r[i] = std::exp(-(gap * gap) / denom);
  }
  return r;
}

}  // namespace detail

// Fixed attention level: R peaks at C = 1.
inline Grid<double> relative_contrast_fixed(const Grid<double>& contrast, double sigma) {
  detail::require(std::isfinite(sigma) && sigma > 0.0, "sigma must be positive");
  return detail::gaussian_of_gap(contrast, 1.0, sigma);
}

// Moving attention level t / t_end; coincides with the fixed rule at t = t_end.
inline Grid<double> relative_contrast_moving(const Grid<double>& contrast, double sigma, double t,
                                             double t_end) {
  detail::require(std::isfinite(sigma) && sigma > 0.0, "sigma must be positive");
  detail::require(std::isfinite(t_end) && t_end > 0.0, "t_end must be positive");
  detail::require(t >= 0.0 && t <= t_end, "moving contrast time outside [0, t_end]");
  return detail::gaussian_of_gap(contrast, t / t_end, sigma);
}

inline std::pair<Grid<double>, Grid<double>> coupling_maps(const Grid<double>& relative,
                                                           double k_plus_max,
                                                           double k_minus_max) {
  detail::require(k_plus_max >= 0.0 && k_minus_max >= 0.0, "coupling maxima must be >= 0");
  Grid<double> kp(relative.shape());
  Grid<double> km(relative.shape());
  for (std::size_t i = 0; i < relative.size(); ++i) {
    kp[i] = k_plus_max * relative[i];
    km[i] = k_minus_max * (1.0 - relative[i]);
  }
  return {std::move(kp), std::move(km)};
}

inline Grid<double> omega_map(const Grid<double>& contrast, double delta_omega) {
  detail::require(std::isfinite(delta_omega) && delta_omega >= 0.0, "delta_omega must be >= 0");
  Grid<double> w(contrast.shape());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = 1.0 - delta_omega / 2.0 + delta_omega * contrast[i];
  return w;
}

inline double color_distance(const FeatureStack& fs, std::size_t a, std::size_t b) noexcept {
  const double dr = fs.planes[kRed][a] - fs.planes[kRed][b];
  const double dg = fs.planes[kGreen][a] - fs.planes[kGreen][b];
  const double db = fs.planes[kBlue][a] - fs.planes[kBlue][b];
  return std::sqrt(dr * dr + dg * dg + db * db);
}

// Opens the positive link between 8-adjacent pixels of similar color.
inline GateSet similarity_gates(const FeatureStack& fs, double threshold) {
  detail::require(std::isfinite(threshold) && threshold >= 0.0, "gate threshold must be >= 0");
  const Shape shape = fs.shape();
  GateSet gates(shape);
  for (std::size_t r = 0; r < shape.rows; ++r)
    for (std::size_t c = 0; c < shape.cols; ++c)
      for (int d = 4; d < 8; ++d) {  // forward half; set() mirrors the rest
        if (!gates.neighbor_in_bounds(r, c, d)) continue;
        const auto o = kNeighborOffsets[d];
        const std::size_t other = shape.index(r + o.dr, c + o.dc);
        if (color_distance(fs, shape.index(r, c), other) <= threshold) gates.set(r, c, d, true);
      }
  return gates;
}

inline SaliencyMaps fixed_saliency(const FeatureStack& fs, const SaliencyConfig& config) {
  config.validate();
  SaliencyMaps maps;
  maps.contrast = absolute_contrast(fs);
  maps.relative_contrast = relative_contrast_fixed(maps.contrast, config.sigma);
  auto [kp, km] = coupling_maps(maps.relative_contrast, config.k_plus_max, config.k_minus_max);
  maps.k_plus = std::move(kp);
  maps.k_minus = std::move(km);
  maps.omega = omega_map(maps.contrast, config.delta_omega);
  return maps;
}

// Lattice parameters for an image: maps from the fixed rule plus color gates.
inline LatticeParams lattice_params_from(const SaliencyMaps& maps, GateSet gates) {
  return {maps.omega, maps.k_plus, maps.k_minus, std::move(gates), RosslerParams{}};
}

// Refresh hook recomputing k+ / k- from the moving attention level each step.
inline CouplingRefresh moving_contrast_refresh(Grid<double> contrast, SaliencyConfig config,
                                               double t_end) {
  config.validate();
  return [contrast = std::move(contrast), config, t_end](double t, Grid<double>& kp,
                                                         Grid<double>& km) {
    const double level = std::min(t, t_end) / t_end;
    const double denom = 2.0 * config.sigma * config.sigma;
    for (std::size_t i = 0; i < contrast.size(); ++i) {
      const double gap = level - contrast[i];
      const double r = std::exp(-(gap * gap) / denom);
      kp[i] = config.k_plus_max * r;
      km[i] = config.k_minus_max * (1.0 - r);
    }
  };
}

}  // namespace phasync
