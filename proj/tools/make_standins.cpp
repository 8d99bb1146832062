// Writes the bundled textured stand-in images and their label maps:
//   dog.png / dog_labels.png        label 1 = "dog" blob, 2 = "grass" band
//   flower.png / flower_labels.png  label 1 = "flower", 2 = "leaves"
// Usage: make_standins [output_dir]

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <random>

#include "phasync/image_io.hpp"

namespace {

using phasync::LabelMap;
using phasync::Rgb;
using phasync::RgbImage;
using phasync::Shape;

// Smooth per-channel ripple; neighbors differ by far less than the gate threshold.
struct Texture {
  double phase[3][4];
  double amplitude;

  Texture(std::uint64_t seed, double amp) : amplitude(amp) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 6.283);
    for (auto& row : phase)
      for (auto& p : row) p = u(rng);
  }

  Rgb apply(Rgb base, double r, double c) const {
    Rgb out;
    for (int k = 0; k < 3; ++k) {
      const double n = amplitude * (std::sin(r / 5.0 + phase[1][k]) * std::cos(c / 7.0 + phase[2][k]) +
                                    0.5 * std::sin((r + c) / 4.0 + phase[1][3]));
      out[k] = static_cast<std::uint16_t>(std::clamp(base[k] + n, 0.0, 255.0));
    }
    return out;
  }
};

void make_dog(RgbImage& img, LabelMap& labels) {
  const Shape shape{72, 96};
  const Rgb background{20, 30, 20}, dog{180, 170, 150}, grass{235, 255, 170};
  const double ra = 11.0, rb = 16.0;
  const Texture tex(7, 3.0);
  img = RgbImage(shape, background);
  labels = LabelMap(shape, 0);
  for (std::size_t r = 0; r < shape.rows; ++r)
    for (std::size_t c = 0; c < shape.cols; ++c) {
      const double dr = static_cast<double>(r) - 34.0;
      const double dc = static_cast<double>(c) - 46.0;
      const double th = std::atan2(dr, dc * ra / rb);
      const double rim = 1.0 + 0.15 * std::sin(3.0 * th + tex.phase[0][0]) +
                         0.1 * std::sin(5.0 * th + tex.phase[0][1]);
      const double edge = 56.0 + 3.0 * std::sin(static_cast<double>(c) / 9.0 + tex.phase[0][2]);
      int id = 0;
      Rgb base = background;
      if (static_cast<double>(r) > edge) {
        id = 2;
        base = grass;
      } else if (std::hypot(dr / ra, dc / rb) < rim) {
        id = 1;
        base = dog;
      }
      labels(r, c) = id;
      img(r, c) = tex.apply(base, static_cast<double>(r), static_cast<double>(c));
    }
}

void make_flower(RgbImage& img, LabelMap& labels) {
  const Shape shape{72, 96};
  const Rgb flower{240, 110, 180}, leaves{60, 120, 50};
  const Texture tex(11, 6.0);
  img = RgbImage(shape, leaves);
  labels = LabelMap(shape, 2);
  for (std::size_t r = 0; r < shape.rows; ++r)
    for (std::size_t c = 0; c < shape.cols; ++c) {
      const double dr = static_cast<double>(r) - 36.0;
      const double dc = static_cast<double>(c) - 50.0;
      // Five-petal outline.
      const double rim = 12.0 + 5.0 * std::cos(5.0 * std::atan2(dr, dc) + tex.phase[0][3]);
      const bool inside = std::hypot(dr, dc) < rim;
      if (inside) labels(r, c) = 1;
      img(r, c) = tex.apply(inside ? flower : leaves, static_cast<double>(r), static_cast<double>(c));
    }
}

}  // namespace

int main(int argc, char** argv) {
  const std::filesystem::path dir = argc > 1 ? argv[1] : "data";
  try {
    std::filesystem::create_directories(dir);
    RgbImage img;
    LabelMap labels;
    make_dog(img, labels);
    phasync::save_png(dir / "dog.png", img);
    phasync::save_labels_png(dir / "dog_labels.png", labels);
    make_flower(img, labels);
    phasync::save_png(dir / "flower.png", img);
    phasync::save_labels_png(dir / "flower_labels.png", labels);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  std::cout << "wrote stand-ins to " << dir.string() << '\n';
  return 0;
}
