#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "phasync/errors.hpp"
#include "phasync/grid.hpp"

namespace phasync {

using Rgb = std::array<std::uint16_t, 3>;

// Decoded RGB raster; channel values lie in [0, max_value].
struct RgbImage {
  Grid<Rgb> pixels;
  std::uint16_t max_value = 255;

  RgbImage() = default;
  RgbImage(Shape shape, Rgb fill, std::uint16_t max = 255) : pixels(shape, fill), max_value(max) {}

  const Shape& shape() const noexcept { return pixels.shape(); }
  bool empty() const noexcept { return pixels.empty(); }
  Rgb& operator()(std::size_t r, std::size_t c) { return pixels(r, c); }
  const Rgb& operator()(std::size_t r, std::size_t c) const { return pixels(r, c); }

  friend bool operator==(const RgbImage&, const RgbImage&) = default;
};

// Integer group ids per cell; 0 marks background / unlabeled.
using LabelMap = Grid<int>;

}  // namespace phasync
