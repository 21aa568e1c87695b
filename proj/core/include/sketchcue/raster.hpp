#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "sketchcue/errors.hpp"

namespace sketchcue {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct Rgba {
  std::uint8_t r = 0, g = 0, b = 0, a = 0;
  friend bool operator==(const Rgba&, const Rgba&) = default;
};

inline constexpr Rgba opaque(Rgb c) { return {c.r, c.g, c.b, 255}; }

// Dense row-major 2D raster. Pixel (x, y) is the sample at integer
// coordinates (x, y) of its frame.
template <class T>
class Image {
 public:
  Image() = default;
  Image(int width, int height, T fill = T{})
      : width_(width), height_(height), data_(checked_size(width, height), fill) {}

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return data_.empty(); }
  std::size_t size() const noexcept { return data_.size(); }

  bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }
  bool same_dims(int w, int h) const noexcept { return w == width_ && h == height_; }
  template <class U>
  bool same_dims(const Image<U>& other) const noexcept {
    return same_dims(other.width(), other.height());
  }

  T& at(int x, int y) { return data_[index(x, y)]; }
  const T& at(int x, int y) const { return data_[index(x, y)]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::vector<T>& data() noexcept { return data_; }
  const std::vector<T>& data() const noexcept { return data_; }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  static std::size_t checked_size(int w, int h) {
    if (w < 0 || h < 0) throw Error(Errc::DimMismatch, "negative raster dimensions");
    return static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  }
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

// 0 = clear, 1 = set.
using Mask = Image<std::uint8_t>;
using RgbaImage = Image<Rgba>;

std::size_t popcount(const Mask& m);

// 4-connected component labeling. `member(index)` selects foreground pixels
// and `same(a, b)` decides whether two adjacent foreground pixels join the
// same component. Labels start at 1; 0 marks background.
struct Components {
  Image<std::int32_t> labels;
  std::vector<std::size_t> areas;  // areas[k] is the size of label k + 1
};

template <class Member, class Same>
Components label_components(int width, int height, Member&& member, Same&& same) {
  Components out{Image<std::int32_t>(width, height, 0), {}};
  auto& labels = out.labels;
  std::vector<std::size_t> stack;
  const std::size_t w = static_cast<std::size_t>(width);
  const std::size_t n = labels.size();

  for (std::size_t seed = 0; seed < n; ++seed) {
    if (labels[seed] != 0 || !member(seed)) continue;
    const auto label = static_cast<std::int32_t>(out.areas.size() + 1);
    std::size_t area = 0;
    labels[seed] = label;
    stack.push_back(seed);
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      ++area;
      const std::size_t x = p % w;
      auto visit = [&](std::size_t q) {
        if (labels[q] == 0 && member(q) && same(p, q)) {
          labels[q] = label;
          stack.push_back(q);
        }
      };
      if (x > 0) visit(p - 1);
      if (x + 1 < w) visit(p + 1);
      if (p >= w) visit(p - w);
      if (p + w < n) visit(p + w);
    }
    out.areas.push_back(area);
  }
  return out;
}

inline Components label_components(const Mask& m) {
  return label_components(
      m.width(), m.height(), [&](std::size_t i) { return m[i] != 0; },
      [](std::size_t, std::size_t) { return true; });
}

}  // namespace sketchcue
