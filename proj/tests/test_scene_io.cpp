#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include "phasync/image_io.hpp"
#include "phasync/phase.hpp"
#include "phasync/scene.hpp"

using namespace phasync;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("phasync_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_bytes(const fs::path& p, const std::string& bytes) {
  std::ofstream(p, std::ios::binary) << bytes;
}

std::set<int> distinct(const LabelMap& labels) { return {labels.begin(), labels.end()}; }

}  // namespace

TEST(ObjectGrid, OneObjectGivesTwoIds) {
  SceneSpec spec;
  spec.canvas = {10, 12};
  spec.objects = {{Rgb{255, 0, 0}, 2, 3, 4, 5}};
  const auto s = generate_object_grid(spec);
  EXPECT_EQ(distinct(s.labels), (std::set<int>{0, 1}));
  EXPECT_EQ(s.image(3, 4), (Rgb{255, 0, 0}));
  EXPECT_EQ(s.image(0, 0), (Rgb{0, 0, 0}));
}

TEST(ObjectGrid, EmptyListGivesUniformImage) {
  SceneSpec spec;
  spec.canvas = {6, 7};
  spec.background = {10, 20, 30};
  const auto s = generate_object_grid(spec);
  EXPECT_EQ(distinct(s.labels), (std::set<int>{0}));
  for (const auto& px : s.image.pixels) EXPECT_EQ(px, (Rgb{10, 20, 30}));
}

TEST(ObjectGrid, OverlapAndBoundsRejected) {
  SceneSpec spec;
  spec.canvas = {10, 10};
  spec.objects = {{Rgb{255, 0, 0}, 0, 0, 4, 4}, {Rgb{0, 255, 0}, 3, 3, 4, 4}};
  EXPECT_THROW(generate_object_grid(spec), ConfigError);
  spec.objects = {{Rgb{255, 0, 0}, 8, 8, 4, 4}};
  EXPECT_THROW(generate_object_grid(spec), ConfigError);
  spec.objects = {{Rgb{256, 0, 0}, 0, 0, 2, 2}};
  EXPECT_THROW(generate_object_grid(spec), ConfigError);
}

TEST(Presets, ObjectGridsHaveStrictMaxTarget) {
  for (auto name : {"high-contrast", "medium-contrast", "low-contrast"}) {
    const auto spec = scene_preset(name);
    const auto s = generate_scene(spec);
    EXPECT_EQ(s.image.shape(), (Shape{60, 100})) << name;
    EXPECT_EQ(distinct(s.labels).size(), 16u) << name;
    const auto best = strictly_max_contrast_label(s.image, s.labels);
    ASSERT_TRUE(best.has_value()) << name;
    EXPECT_EQ(*best, spec.target) << name;
  }
}

TEST(Presets, HighContrastHasOneYellowAmongBlue) {
  const auto s = generate_scene(scene_preset("high-contrast"));
  std::set<Rgb> colors;
  for (const auto& g : groups_from_labels(s.labels)) colors.insert(s.image.pixels[g.cells[0]]);
  EXPECT_EQ(colors, (std::set<Rgb>{{0, 0, 255}, {255, 255, 0}}));
}

TEST(Presets, UnknownNameRejected) {
  EXPECT_THROW(scene_preset("nope"), ConfigError);
}

TEST(Spirals, DefaultPresetHasTwoDisjointArms) {
  const auto spec = scene_preset("spirals");
  const auto s = generate_scene(spec);
  EXPECT_EQ(s.image.shape(), (Shape{64, 64}));
  EXPECT_EQ(distinct(s.labels), (std::set<int>{0, 1, 2}));
  for (std::size_t i = 0; i < s.labels.size(); ++i) {
    if (s.labels[i] == 0) EXPECT_EQ(s.image.pixels[i], spec.background);
    else EXPECT_EQ(s.image.pixels[i], spec.spiral.colors[static_cast<std::size_t>(s.labels[i] - 1)]);
  }
  const auto c = mean_contrast_by_label(s.image, s.labels);
  EXPECT_GT(c.at(spec.target), c.at(3 - spec.target));
}

TEST(Spirals, ArmsAreNotGateConnected) {
  const auto s = generate_scene(scene_preset("spirals"));
  const auto gates = similarity_gates(extract_features(s.image), 0.1);
  for (std::size_t r = 0; r < 64; ++r)
    for (std::size_t c = 0; c < 64; ++c)
      for (int d = 0; d < 8; ++d) {
        if (!gates.open(r, c, d)) continue;
        const auto o = kNeighborOffsets[d];
        EXPECT_EQ(s.labels(r, c), s.labels(r + o.dr, c + o.dc));
      }
}

TEST(Spirals, IdenticalColorsGiveEqualContrast) {
  auto spec = scene_preset("spirals");
  spec.spiral.colors = {Rgb{200, 50, 50}, Rgb{200, 50, 50}};
  const auto s = generate_scene(spec);
  EXPECT_EQ(distinct(s.labels), (std::set<int>{0, 1, 2}));
  const auto c = mean_contrast_by_label(s.image, s.labels);
  EXPECT_DOUBLE_EQ(c.at(1), c.at(2));
  EXPECT_FALSE(strictly_max_contrast_label(s.image, s.labels).has_value());
}

TEST(Spirals, DegenerateGeometryRejected) {
  auto spec = scene_preset("spirals");
  spec.spiral.arm_width = 0.0;
  EXPECT_THROW(generate_scene(spec), ConfigError);
  spec = scene_preset("spirals");
  spec.spiral.arm_width = spec.spiral.pitch;
  EXPECT_THROW(generate_scene(spec), ConfigError);
}

TEST(ImageIo, PngRoundTrip) {
  const auto dir = scratch_dir("png");
  const auto s = generate_scene(scene_preset("medium-contrast"));
  save_png(dir / "a.png", s.image);
  save_labels_png(dir / "a_labels.png", s.labels);
  EXPECT_EQ(load_image(dir / "a.png"), s.image);
  EXPECT_EQ(load_labels(dir / "a_labels.png", s.image.shape()), s.labels);
}

TEST(ImageIo, PpmAndPgm) {
  const auto dir = scratch_dir("pnm");
  write_bytes(dir / "a.ppm", std::string("P6\n# comment\n2 1\n255\n") + std::string("\xff\x00\x00\x00\x80\xff", 6));
  const auto img = load_image(dir / "a.ppm");
  EXPECT_EQ(img.shape(), (Shape{1, 2}));
  EXPECT_EQ(img(0, 0), (Rgb{255, 0, 0}));
  EXPECT_EQ(img(0, 1), (Rgb{0, 128, 255}));

  write_bytes(dir / "deep.ppm", std::string("P6 1 1 1023\n") + std::string("\x03\xff\x00\x00\x02\x00", 6));
  const auto deep = load_image(dir / "deep.ppm");
  EXPECT_EQ(deep.max_value, 1023);
  EXPECT_EQ(deep(0, 0), (Rgb{1023, 0, 512}));

  write_bytes(dir / "l.pgm", std::string("P5 3 1 255\n") + std::string("\x00\x01\x02", 3));
  const auto labels = load_labels(dir / "l.pgm");
  EXPECT_EQ(groups_from_labels(labels).size(), 2u);
  EXPECT_EQ(distinct(labels), (std::set<int>{0, 1, 2}));
}

TEST(ImageIo, GrayLabelMapWithThreeIds) {
  const auto dir = scratch_dir("labels");
  LabelMap labels(Shape{4, 4}, 0);
  labels(1, 1) = 1;
  labels(2, 2) = 2;
  save_labels_png(dir / "l.png", labels);
  const auto back = load_labels(dir / "l.png");
  EXPECT_EQ(distinct(back), (std::set<int>{0, 1, 2}));
  EXPECT_EQ(back, labels);
}

TEST(ImageIo, TruncatedFilesRejected) {
  const auto dir = scratch_dir("trunc");
  save_png(dir / "full.png", generate_scene(scene_preset("high-contrast")).image);
  std::ifstream in(dir / "full.png", std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), {});
  write_bytes(dir / "cut.png", bytes.substr(0, bytes.size() / 2));
  EXPECT_THROW(load_image(dir / "cut.png"), IoError);
  write_bytes(dir / "cut.ppm", std::string("P6 4 4 255\n") + std::string(10, 'x'));
  EXPECT_THROW(load_image(dir / "cut.ppm"), IoError);
  write_bytes(dir / "bad.ppm", "P6 4 four 255\n");
  EXPECT_THROW(load_image(dir / "bad.ppm"), IoError);
}

TEST(ImageIo, UnsupportedAndMissingFiles) {
  const auto dir = scratch_dir("unsupported");
  write_bytes(dir / "a.gif", "GIF89a....");
  EXPECT_THROW(load_image(dir / "a.gif"), IoError);
  EXPECT_THROW(load_image(dir / "missing.png"), IoError);
  save_png(dir / "color.png", RgbImage(Shape{2, 2}, Rgb{1, 2, 3}));
  EXPECT_THROW(load_labels(dir / "color.png"), IoError);
}

TEST(ImageIo, LabelSizeMismatchRejected) {
  const auto dir = scratch_dir("mismatch");
  save_labels_png(dir / "l.png", LabelMap(Shape{3, 3}, 1));
  EXPECT_THROW(load_labels(dir / "l.png", Shape{3, 4}), ConfigError);
}

TEST(ImageIo, MaskPngIsBlackAndWhite) {
  const auto dir = scratch_dir("mask");
  Grid<std::uint8_t> mask(Shape{2, 2}, 0);
  mask[1] = 1;
  save_mask_png(dir / "m.png", mask);
  const auto back = load_labels(dir / "m.png");
  EXPECT_EQ(back[0], 0);
  EXPECT_EQ(back[1], 255);
}

TEST(BundledImages, DecodeToRecordedSizes) {
  const fs::path data = PHASYNC_DATA_DIR;
  for (auto name : {"flower", "dog"}) {
    const auto img = load_image(data / (std::string(name) + ".png"));
    EXPECT_EQ(img.shape(), (Shape{72, 96})) << name;
    const auto labels = load_labels(data / (std::string(name) + "_labels.png"), img.shape());
    EXPECT_EQ(groups_from_labels(labels).size(), 2u) << name;
  }
}

TEST(BundledImages, ObjectOutranksSurround) {
  const fs::path data = PHASYNC_DATA_DIR;
  const auto img = load_image(data / "flower.png");
  const auto c = mean_contrast_by_label(img, load_labels(data / "flower_labels.png"));
  EXPECT_GT(c.at(1), c.at(2));
}
