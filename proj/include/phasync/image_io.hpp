#pragma once

#include <png.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "phasync/errors.hpp"
#include "phasync/grid.hpp"
#include "phasync/image.hpp"

namespace phasync {

namespace detail {

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("error reading '" + path.string() + "'");
  return bytes;
}

inline bool is_png(const std::vector<std::uint8_t>& b) {
  static constexpr std::array<std::uint8_t, 8> sig = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  return b.size() >= sig.size() && std::equal(sig.begin(), sig.end(), b.begin());
}

inline bool is_netpbm(const std::vector<std::uint8_t>& b, char kind) {
  return b.size() >= 2 && b[0] == 'P' && b[1] == kind;
}

struct NetpbmHeader {
  std::size_t width = 0;
  std::size_t height = 0;
  unsigned max_value = 0;
  std::size_t data_offset = 0;
};

// Parses "P5"/"P6" headers: magic, width, height, maxval, one whitespace byte.
inline NetpbmHeader parse_netpbm_header(const std::vector<std::uint8_t>& b, const std::string& name) {
  std::size_t pos = 2;
  const auto corrupt = [&](const std::string& why) {
    return IoError("corrupt image '" + name + "': " + why);
  };
  const auto next_number = [&]() -> std::size_t {
    for (;;) {
      while (pos < b.size() && std::isspace(b[pos])) ++pos;
      if (pos < b.size() && b[pos] == '#') {
        while (pos < b.size() && b[pos] != '\n') ++pos;
        continue;
      }
      break;
    }
    if (pos >= b.size() || !std::isdigit(b[pos])) throw corrupt("malformed header");
    std::size_t v = 0;
    while (pos < b.size() && std::isdigit(b[pos])) {
      v = v * 10 + static_cast<std::size_t>(b[pos] - '0');
      if (v > (1u << 24)) throw corrupt("header value too large");
      ++pos;
    }
    return v;
  };
  NetpbmHeader h;
  h.width = next_number();
  h.height = next_number();
  const std::size_t maxval = next_number();
  if (h.width == 0 || h.height == 0) throw corrupt("zero dimension");
  if (maxval == 0 || maxval > 65535) throw corrupt("maxval outside [1, 65535]");
  h.max_value = static_cast<unsigned>(maxval);
  if (pos >= b.size() || !std::isspace(b[pos])) throw corrupt("missing raster separator");
  h.data_offset = pos + 1;
  return h;
}

inline std::vector<std::uint16_t> netpbm_samples(const std::vector<std::uint8_t>& b,
                                                 const NetpbmHeader& h, std::size_t channels,
                                                 const std::string& name) {
  const std::size_t bytes_per = h.max_value > 255 ? 2 : 1;
  const std::size_t count = h.width * h.height * channels;
  if (b.size() - h.data_offset < count * bytes_per)
    throw IoError("corrupt image '" + name + "': truncated raster");
  std::vector<std::uint16_t> out(count);
  const std::uint8_t* p = b.data() + h.data_offset;
  for (std::size_t i = 0; i < count; ++i) {
    const unsigned v = bytes_per == 2 ? (unsigned(p[2 * i]) << 8) | p[2 * i + 1] : p[i];
    if (v > h.max_value) throw IoError("corrupt image '" + name + "': sample exceeds maxval");
    out[i] = static_cast<std::uint16_t>(v);
  }
  return out;
}

// Decodes a PNG from memory into 8-bit samples of the requested format.
inline std::vector<std::uint8_t> decode_png(const std::vector<std::uint8_t>& b, std::uint32_t format,
                                            const std::string& name, Shape& shape,
                                            bool require_gray) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&img, b.data(), b.size()))
    throw IoError("corrupt image '" + name + "': " + img.message);
  if (require_gray && (img.format & PNG_FORMAT_FLAG_COLOR)) {
    png_image_free(&img);
    throw IoError("label map '" + name + "' must be a grayscale image");
  }
  img.format = format;
  std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(img));
  png_color black{0, 0, 0};
  if (!png_image_finish_read(&img, &black, buf.data(), 0, nullptr))
    throw IoError("corrupt image '" + name + "': " + img.message);
  shape = {img.height, img.width};
  return buf;
}

inline void write_png(const std::filesystem::path& path, std::uint32_t format, Shape shape,
                      const std::vector<std::uint8_t>& buf) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(shape.cols);
  img.height = static_cast<png_uint_32>(shape.rows);
  img.format = format;
  if (!png_image_write_to_file(&img, path.string().c_str(), 0, buf.data(), 0, nullptr))
    throw IoError("cannot write '" + path.string() + "': " + img.message);
}

}  // namespace detail

// Reads PNG or binary PPM (P6), chosen by file signature.
inline RgbImage load_image(const std::filesystem::path& path) {
  const auto bytes = detail::read_file_bytes(path);
  const std::string name = path.string();
  if (detail::is_png(bytes)) {
    Shape shape;
    const auto buf = detail::decode_png(bytes, PNG_FORMAT_RGB, name, shape, false);
    RgbImage img(shape, Rgb{0, 0, 0}, 255);
    for (std::size_t i = 0; i < shape.size(); ++i)
      img.pixels[i] = {buf[3 * i], buf[3 * i + 1], buf[3 * i + 2]};
    return img;
  }
  if (detail::is_netpbm(bytes, '6')) {
    const auto h = detail::parse_netpbm_header(bytes, name);
    const auto s = detail::netpbm_samples(bytes, h, 3, name);
    RgbImage img({h.height, h.width}, Rgb{0, 0, 0}, static_cast<std::uint16_t>(h.max_value));
    for (std::size_t i = 0; i < img.pixels.size(); ++i)
      img.pixels[i] = {s[3 * i], s[3 * i + 1], s[3 * i + 2]};
    return img;
  }
  throw IoError("unsupported image format '" + name + "' (expected PNG or binary PPM)");
}

// Reads an 8-bit grayscale PNG or PGM (P5); pixel value is the group id.
inline LabelMap load_labels(const std::filesystem::path& path) {
  const auto bytes = detail::read_file_bytes(path);
  const std::string name = path.string();
  if (detail::is_png(bytes)) {
    Shape shape;
    const auto buf = detail::decode_png(bytes, PNG_FORMAT_GRAY, name, shape, true);
    LabelMap labels(shape, 0);
    for (std::size_t i = 0; i < shape.size(); ++i) labels[i] = buf[i];
    return labels;
  }
  if (detail::is_netpbm(bytes, '5')) {
    const auto h = detail::parse_netpbm_header(bytes, name);
    if (h.max_value > 255) throw IoError("label map '" + name + "' must be 8-bit");
    const auto s = detail::netpbm_samples(bytes, h, 1, name);
    LabelMap labels({h.height, h.width}, 0);
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = s[i];
    return labels;
  }
  throw IoError("unsupported label format '" + name + "' (expected grayscale PNG or PGM)");
}

inline LabelMap load_labels(const std::filesystem::path& path, const Shape& image_shape) {
  auto labels = load_labels(path);
  if (labels.shape() != image_shape)
    throw ConfigError("label map '" + path.string() + "' is " + to_string(labels.shape()) +
                      " but the image is " + to_string(image_shape));
  return labels;
}

inline void save_png(const std::filesystem::path& path, const RgbImage& image) {
  detail::require(!image.empty(), "cannot save an empty image");
  std::vector<std::uint8_t> buf(image.shape().size() * 3);
  const double scale = 255.0 / image.max_value;
  for (std::size_t i = 0; i < image.pixels.size(); ++i)
    for (std::size_t k = 0; k < 3; ++k)
      buf[3 * i + k] = static_cast<std::uint8_t>(std::lround(image.pixels[i][k] * scale));
  detail::write_png(path, PNG_FORMAT_RGB, image.shape(), buf);
}

inline void save_gray_png(const std::filesystem::path& path, const Grid<std::uint8_t>& gray) {
  detail::require(!gray.empty(), "cannot save an empty image");
  detail::write_png(path, PNG_FORMAT_GRAY, gray.shape(),
                    std::vector<std::uint8_t>(gray.begin(), gray.end()));
}

// Boolean mask as black/white PNG.
inline void save_mask_png(const std::filesystem::path& path, const Grid<std::uint8_t>& mask) {
  Grid<std::uint8_t> gray(mask.shape(), 0);
  for (std::size_t i = 0; i < mask.size(); ++i) gray[i] = mask[i] ? 255 : 0;
  save_gray_png(path, gray);
}

inline void save_labels_png(const std::filesystem::path& path, const LabelMap& labels) {
  Grid<std::uint8_t> gray(labels.shape(), 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    detail::require(labels[i] >= 0 && labels[i] <= 255, "label ids must lie in [0, 255]");
    gray[i] = static_cast<std::uint8_t>(labels[i]);
  }
  save_gray_png(path, gray);
}

}  // namespace phasync
