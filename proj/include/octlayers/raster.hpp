#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <type_traits>
#include <vector>

namespace octlayers {

/// Row-major 2D array over the en-face lattice: x = A-scan index (column),
/// y = B-scan index (row).
template <typename T>
class Raster {
 public:
  Raster() = default;
  Raster(int width, int height, T fill = T{})
      : width_(width), height_(height),
        data_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill) {}

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  bool in_bounds(int ix, int iy) const noexcept {
    return ix >= 0 && iy >= 0 && ix < width_ && iy < height_;
  }

  T& operator()(int ix, int iy) {
    assert(in_bounds(ix, iy));
    return data_[index(ix, iy)];
  }
  const T& operator()(int ix, int iy) const {
    assert(in_bounds(ix, iy));
    return data_[index(ix, iy)];
  }

  std::span<T> row(int iy) { return {data_.data() + index(0, iy), static_cast<std::size_t>(width_)}; }
  std::span<const T> row(int iy) const {
    return {data_.data() + index(0, iy), static_cast<std::size_t>(width_)};
  }

  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }

  bool same_shape(const Raster& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const Raster& a, const Raster& b) {
    if (!a.same_shape(b)) return false;
    if constexpr (std::is_floating_point_v<T>) {
      // Bitwise-style comparison: NaN markers compare equal to NaN markers.
      for (std::size_t i = 0; i < a.data_.size(); ++i) {
        const T x = a.data_[i], y = b.data_[i];
        if (std::isnan(x) != std::isnan(y)) return false;
        if (!std::isnan(x) && x != y) return false;
      }
      return true;
    } else {
      return a.data_ == b.data_;
    }
  }

 private:
  std::size_t index(int ix, int iy) const noexcept {
    return static_cast<std::size_t>(iy) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(ix);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

/// Invalid marker for float/double rasters.
template <typename T>
constexpr T invalid_value() {
  return std::numeric_limits<T>::quiet_NaN();
}

template <typename T>
bool is_valid(T v) {
  return !std::isnan(v);
}

/// Binary selection over the lattice (1 = member).
using Mask = Raster<unsigned char>;

}  // namespace octlayers
