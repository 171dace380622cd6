#pragma once

#include "corrgen/common.hpp"

#include <algorithm>
#include <cstdint>
#include <vector>

namespace corrgen {

// Interleaved row-major image, channel values in [0,1] for float images.
template <typename T>
struct Image {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<T> px;

  Image() = default;
  Image(int w, int h, int c, T fill = T{})
      : width(w), height(h), channels(c),
        px(static_cast<size_t>(w) * h * c, fill) {}

  T& at(int x, int y, int c) {
    return px[(static_cast<size_t>(y) * width + x) * channels + c];
  }
  const T& at(int x, int y, int c) const {
    return px[(static_cast<size_t>(y) * width + x) * channels + c];
  }
  bool empty() const { return px.empty(); }
  size_t size() const { return px.size(); }
  bool same_shape(const Image& o) const {
    return width == o.width && height == o.height && channels == o.channels;
  }
};

using ImageF = Image<float>;
using ImageU8 = Image<std::uint8_t>;

// Binary mask, row-major, 0/1 values.
struct Mask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> px;

  Mask() = default;
  Mask(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), px(static_cast<size_t>(w) * h, fill) {}

  std::uint8_t& at(int x, int y) { return px[static_cast<size_t>(y) * width + x]; }
  std::uint8_t at(int x, int y) const { return px[static_cast<size_t>(y) * width + x]; }
  size_t count() const {
    size_t n = 0;
    for (auto v : px) n += (v != 0);
    return n;
  }
  bool operator==(const Mask& o) const {
    return width == o.width && height == o.height && px == o.px;
  }
};

inline float sample_bilinear(const ImageF& img, double x, double y, int c) {
  // x, y in continuous pixel coordinates; texel centers at integer + 0.5.
  const double fx = x - 0.5, fy = y - 0.5;
  const int x0 = static_cast<int>(std::floor(fx));
  const int y0 = static_cast<int>(std::floor(fy));
  const double ax = fx - x0, ay = fy - y0;
  auto tap = [&](int xi, int yi) {
    xi = std::clamp(xi, 0, img.width - 1);
    yi = std::clamp(yi, 0, img.height - 1);
    return static_cast<double>(img.at(xi, yi, c));
  };
  const double v0 = tap(x0, y0) * (1 - ax) + tap(x0 + 1, y0) * ax;
  const double v1 = tap(x0, y0 + 1) * (1 - ax) + tap(x0 + 1, y0 + 1) * ax;
  return static_cast<float>(v0 * (1 - ay) + v1 * ay);
}

inline ImageF resize_bilinear(const ImageF& src, int w, int h) {
  if (src.width == w && src.height == h) return src;
  ImageF dst(w, h, src.channels);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double sx = (x + 0.5) * src.width / w;
      const double sy = (y + 0.5) * src.height / h;
      for (int c = 0; c < src.channels; ++c)
        dst.at(x, y, c) = sample_bilinear(src, sx, sy, c);
    }
  return dst;
}

inline ImageU8 quantize_u8(const ImageF& src) {
  ImageU8 dst(src.width, src.height, src.channels);
  for (size_t i = 0; i < src.px.size(); ++i)
    dst.px[i] = static_cast<std::uint8_t>(std::lround(clamp01f(src.px[i]) * 255.0f));
  return dst;
}

inline ImageF to_float(const ImageU8& src) {
  ImageF dst(src.width, src.height, src.channels);
  for (size_t i = 0; i < src.px.size(); ++i)
    dst.px[i] = static_cast<float>(src.px[i]) / 255.0f;
  return dst;
}

}  // namespace corrgen
