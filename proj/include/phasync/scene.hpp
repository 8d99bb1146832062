#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "phasync/errors.hpp"
#include "phasync/grid.hpp"
#include "phasync/image.hpp"
#include "phasync/saliency.hpp"

namespace phasync {

enum class SceneKind { object_grid, spirals };

// Axis-aligned flat-colored rectangle; label ids follow list order starting at 1.
struct SceneObject {
  Rgb color{};
  std::size_t row = 0;
  std::size_t col = 0;
  std::size_t height = 0;
  std::size_t width = 0;
};

// Two interleaved Archimedean arms around the canvas center. Arm 1 follows
// rho = pitch * theta / 2pi, arm 2 is offset by half a pitch.
struct SpiralArms {
  std::array<Rgb, 2> colors{Rgb{255, 255, 0}, Rgb{255, 255, 255}};
  double pitch = 16.0;
  double arm_width = 6.0;
  double inner_radius = 2.0;
  double outer_radius = 30.0;
};

struct SceneSpec {
  SceneKind kind = SceneKind::object_grid;
  Shape canvas{60, 100};
  Rgb background{0, 0, 0};
  std::vector<SceneObject> objects;
  SpiralArms spiral;
  int target = 0;  // designated salient label, 0 if none

  void validate() const {
    detail::require(canvas.rows > 0 && canvas.cols > 0, "scene canvas must be non-empty");
    const auto check_color = [](const Rgb& c) {
      for (auto v : c) detail::require(v <= 255, "scene colors must be 8-bit RGB");
    };
    check_color(background);
    if (kind == SceneKind::object_grid) {
      for (std::size_t i = 0; i < objects.size(); ++i) {
        const auto& o = objects[i];
        check_color(o.color);
        detail::require(o.height > 0 && o.width > 0,
                        "scene object " + std::to_string(i + 1) + " has zero size");
        detail::require(o.row + o.height <= canvas.rows && o.col + o.width <= canvas.cols,
                        "scene object " + std::to_string(i + 1) + " extends outside the canvas");
      }
      detail::require(target >= 0 && static_cast<std::size_t>(target) <= objects.size(),
                      "scene target label out of range");
    } else {
      for (const auto& c : spiral.colors) check_color(c);
      detail::require(std::isfinite(spiral.arm_width) && spiral.arm_width > 0.0,
                      "spiral arm width must be positive");
      detail::require(std::isfinite(spiral.pitch) && spiral.arm_width <= spiral.pitch / 2.0,
                      "spiral arms overlap: arm width exceeds half the pitch");
      detail::require(spiral.inner_radius >= 0.0 && spiral.outer_radius > spiral.inner_radius,
                      "spiral radii must satisfy 0 <= inner < outer");
      detail::require(target >= 0 && target <= 2, "spiral target label must be 0, 1 or 2");
    }
  }
};

struct Scene {
  RgbImage image;
  LabelMap labels;
};

inline Scene generate_object_grid(const SceneSpec& spec) {
  detail::require(spec.kind == SceneKind::object_grid, "scene spec is not an object grid");
  spec.validate();
  Scene s{RgbImage(spec.canvas, spec.background), LabelMap(spec.canvas, 0)};
  for (std::size_t i = 0; i < spec.objects.size(); ++i) {
    const auto& o = spec.objects[i];
    const int id = static_cast<int>(i + 1);
    for (std::size_t r = o.row; r < o.row + o.height; ++r)
      for (std::size_t c = o.col; c < o.col + o.width; ++c) {
        if (s.labels(r, c) != 0)
          throw ConfigError("scene objects " + std::to_string(s.labels(r, c)) + " and " +
                            std::to_string(id) + " overlap");
        s.labels(r, c) = id;
        s.image(r, c) = o.color;
      }
  }
  return s;
}

inline Scene generate_spirals(const SceneSpec& spec) {
  detail::require(spec.kind == SceneKind::spirals, "scene spec is not a spiral scene");
  spec.validate();
  const auto& arms = spec.spiral;
  Scene s{RgbImage(spec.canvas, spec.background), LabelMap(spec.canvas, 0)};
  const double cr = (static_cast<double>(spec.canvas.rows) - 1.0) / 2.0;
  const double cc = (static_cast<double>(spec.canvas.cols) - 1.0) / 2.0;
  const double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t r = 0; r < spec.canvas.rows; ++r)
    for (std::size_t c = 0; c < spec.canvas.cols; ++c) {
      const double dy = static_cast<double>(r) - cr;
      const double dx = static_cast<double>(c) - cc;
      const double rho = std::hypot(dx, dy);
      if (rho < arms.inner_radius || rho > arms.outer_radius) continue;
      double theta = std::atan2(dy, dx);
      if (theta < 0.0) theta += two_pi;
      // Radial position within the current turn, in [0, pitch).
      double u = std::fmod(rho - arms.pitch * theta / two_pi, arms.pitch);
      if (u < 0.0) u += arms.pitch;
      int arm = 0;
      if (u < arms.arm_width)
        arm = 1;
      else if (u >= arms.pitch / 2.0 && u < arms.pitch / 2.0 + arms.arm_width)
        arm = 2;
      if (arm == 0) continue;
      s.labels(r, c) = arm;
      s.image(r, c) = arms.colors[static_cast<std::size_t>(arm - 1)];
    }
  return s;
}

inline Scene generate_scene(const SceneSpec& spec) {
  return spec.kind == SceneKind::spirals ? generate_spirals(spec) : generate_object_grid(spec);
}

// Mean absolute contrast per label id (background included as id 0).
inline std::map<int, double> mean_contrast_by_label(const RgbImage& image, const LabelMap& labels,
                                                    const FeatureWeights& weights = kDefaultWeights) {
  require_same_shape(image.pixels, labels, "label map");
  const auto c = absolute_contrast(extract_features(image, weights));
  std::map<int, std::pair<double, std::size_t>> acc;
  for (std::size_t i = 0; i < c.size(); ++i) {
    auto& a = acc[labels[i]];
    a.first += c[i];
    ++a.second;
  }
  std::map<int, double> out;
  for (const auto& [id, a] : acc) out[id] = a.first / static_cast<double>(a.second);
  return out;
}

// Object label (id > 0) whose mean C is strictly larger than every other
// object's, if one exists.
inline std::optional<int> strictly_max_contrast_label(const RgbImage& image, const LabelMap& labels,
                                                      const FeatureWeights& weights = kDefaultWeights) {
  const auto means = mean_contrast_by_label(image, labels, weights);
  std::optional<int> best;
  double best_c = 0.0;
  bool tie = false;
  for (const auto& [id, c] : means) {
    if (id <= 0) continue;
    if (!best || c > best_c) {
      best = id;
      best_c = c;
      tie = false;
    } else if (c == best_c) {
      tie = true;
    }
  }
  if (tie) return std::nullopt;
  return best;
}

namespace detail {

// 3 x 5 grid of 12 x 12 objects on a 60 x 100 canvas. `colors` in row-major order.
inline SceneSpec object_grid_3x5(Rgb background, const std::array<Rgb, 15>& colors, int target) {
  SceneSpec spec;
  spec.kind = SceneKind::object_grid;
  spec.canvas = {60, 100};
  spec.background = background;
  spec.target = target;
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 5; ++c)
      spec.objects.push_back({colors[r * 5 + c], 6 + 18 * r, 6 + 19 * c, 12, 12});
  return spec;
}

inline std::array<Rgb, 15> grid_colors(Rgb base, Rgb target, Rgb flank) {
  std::array<Rgb, 15> colors;
  colors.fill(base);
  colors[7] = flank;
  colors[8] = target;
  colors[9] = flank;
  return colors;
}

}  // namespace detail

inline constexpr std::array<std::string_view, 4> kScenePresets = {
    "high-contrast", "medium-contrast", "low-contrast", "spirals"};

// Bundled scenes. In the object grids the target is label 9 (row 1, column 3);
// the medium and low presets flank it with two brighter distractors.
inline SceneSpec scene_preset(std::string_view name) {
  constexpr Rgb black{0, 0, 0};
  if (name == "high-contrast")
    return detail::object_grid_3x5(black, detail::grid_colors({0, 0, 255}, {255, 255, 0}, {0, 0, 255}),
                                   9);
  if (name == "medium-contrast")
    return detail::object_grid_3x5(
        black, detail::grid_colors({0, 0, 200}, {255, 255, 200}, {160, 160, 240}), 9);
  if (name == "low-contrast")
    return detail::object_grid_3x5(
        black, detail::grid_colors({0, 0, 60}, {255, 255, 255}, {220, 220, 240}), 9);
  if (name == "spirals") {
    SceneSpec spec;
    spec.kind = SceneKind::spirals;
    spec.canvas = {64, 64};
    spec.background = {224, 224, 224};
    spec.spiral.colors = {Rgb{255, 255, 0}, black};
    spec.spiral.pitch = 20.0;
    spec.spiral.arm_width = 8.0;
    spec.spiral.outer_radius = 26.0;
    spec.target = 2;  // the black arm has the higher contrast
    return spec;
  }
  throw ConfigError("unknown scene preset '" + std::string(name) + "'");
}

}  // namespace phasync
