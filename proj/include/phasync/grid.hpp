#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "phasync/errors.hpp"

namespace phasync {

struct Shape {
  std::size_t rows = 0;
  std::size_t cols = 0;

  constexpr std::size_t size() const noexcept { return rows * cols; }
  constexpr bool contains(std::ptrdiff_t r, std::ptrdiff_t c) const noexcept {
    return r >= 0 && c >= 0 && static_cast<std::size_t>(r) < rows &&
           static_cast<std::size_t>(c) < cols;
  }
  constexpr std::size_t index(std::size_t r, std::size_t c) const noexcept {
    return r * cols + c;
  }

  friend constexpr bool operator==(const Shape&, const Shape&) = default;
};

inline std::string to_string(const Shape& shape) {
  return std::to_string(shape.rows) + "x" + std::to_string(shape.cols);
}

// Dense row-major N x M map.
template <typename T>
class Grid {
 public:
  using value_type = T;

  Grid() = default;
  explicit Grid(Shape shape, T fill = T{})
      : shape_(shape), data_(shape.size(), fill) {}
  Grid(Shape shape, std::vector<T> data) : shape_(shape), data_(std::move(data)) {
    detail::require(data_.size() == shape_.size(),
                    "grid data size does not match shape " + to_string(shape_));
  }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rows() const noexcept { return shape_.rows; }
  std::size_t cols() const noexcept { return shape_.cols; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(std::size_t r, std::size_t c) { return data_[shape_.index(r, c)]; }
  const T& operator()(std::size_t r, std::size_t c) const {
    return data_[shape_.index(r, c)];
  }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }

  auto begin() noexcept { return data_.begin(); }
  auto end() noexcept { return data_.end(); }
  auto begin() const noexcept { return data_.begin(); }
  auto end() const noexcept { return data_.end(); }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  Shape shape_;
  std::vector<T> data_;
};

template <typename A, typename B>
void require_same_shape(const Grid<A>& a, const Grid<B>& b, const char* what) {
  if (a.shape() != b.shape())
    throw ConfigError(std::string(what) + ": shape mismatch " + to_string(a.shape()) +
                      " vs " + to_string(b.shape()));
}

// The eight lattice neighbors, ordered so that opposite(d) == 7 - d.
struct Offset {
  int dr;
  int dc;
};

inline constexpr Offset kNeighborOffsets[8] = {
    {-1, -1}, {-1, 0}, {-1, 1}, {0, -1}, {0, 1}, {1, -1}, {1, 0}, {1, 1}};

constexpr int opposite_direction(int d) noexcept { return 7 - d; }

}  // namespace phasync
