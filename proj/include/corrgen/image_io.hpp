#pragma once

#include "corrgen/common.hpp"
#include "corrgen/image.hpp"

#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <memory>

namespace corrgen {

namespace detail {

struct PngReadCtx {
  const std::uint8_t* data;
  size_t size;
  size_t pos;
};

inline void png_mem_read(png_structp png, png_bytep out, png_size_t n) {
  auto* ctx = static_cast<PngReadCtx*>(png_get_io_ptr(png));
  if (ctx->pos + n > ctx->size) png_error(png, "truncated png");
  std::memcpy(out, ctx->data + ctx->pos, n);
  ctx->pos += n;
}

inline void png_vec_write(png_structp png, png_bytep data, png_size_t n) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + n);
}

inline void png_flush_noop(png_structp) {}

}  // namespace detail

// Decodes an 8/16-bit PNG into 8-bit channels (16-bit inputs are downshifted).
inline ImageU8 read_png_u8(const fs::path& path) {
  auto bytes = read_binary_file(path);
  require(bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0,
          ErrorCode::ParseError, path.string() + ": not a png");

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  detail::PngReadCtx ctx{bytes.data(), bytes.size(), 0};
  ImageU8 img;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(ErrorCode::ParseError, path.string() + ": png decode failed");
  }
  png_set_read_fn(png, &ctx, detail::png_mem_read);
  png_read_info(png, info);

  png_set_palette_to_rgb(png);
  png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (png_get_bit_depth(png, info) == 16) png_set_strip_16(png);
  png_read_update_info(png, info);

  const int w = static_cast<int>(png_get_image_width(png, info));
  const int h = static_cast<int>(png_get_image_height(png, info));
  const int c = png_get_channels(png, info);
  img = ImageU8(w, h, c);
  std::vector<png_bytep> rows(h);
  for (int y = 0; y < h; ++y)
    rows[y] = img.px.data() + static_cast<size_t>(y) * w * c;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

inline ImageF read_png(const fs::path& path) { return to_float(read_png_u8(path)); }

namespace detail {

inline void write_png_impl(const fs::path& path, const std::uint8_t* data, int w, int h,
                           int channels, int bit_depth,
                           const std::vector<std::array<std::uint8_t, 3>>* palette) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  std::vector<std::uint8_t> out;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail(ErrorCode::IoError, path.string() + ": png encode failed");
  }
  png_set_write_fn(png, &out, detail::png_vec_write, detail::png_flush_noop);

  int color_type = PNG_COLOR_TYPE_GRAY;
  if (palette) color_type = PNG_COLOR_TYPE_PALETTE;
  else if (channels == 2) color_type = PNG_COLOR_TYPE_GRAY_ALPHA;
  else if (channels == 3) color_type = PNG_COLOR_TYPE_RGB;
  else if (channels == 4) color_type = PNG_COLOR_TYPE_RGBA;

  png_set_IHDR(png, info, w, h, bit_depth, color_type, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  std::vector<png_color> pal;
  if (palette) {
    for (const auto& c : *palette) pal.push_back(png_color{c[0], c[1], c[2]});
    png_set_PLTE(png, info, pal.data(), static_cast<int>(pal.size()));
  }
  png_write_info(png, info);
  if (bit_depth == 16) png_set_swap(png);  // in-memory little endian

  const size_t stride = static_cast<size_t>(w) * channels * (bit_depth / 8);
  std::vector<png_bytep> rows(h);
  for (int y = 0; y < h; ++y)
    rows[y] = const_cast<png_bytep>(data + y * stride);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  write_binary_file(path, out.data(), out.size());
}

}  // namespace detail

inline void write_png_u8(const fs::path& path, const ImageU8& img) {
  detail::write_png_impl(path, img.px.data(), img.width, img.height, img.channels, 8, nullptr);
}

inline void write_png(const fs::path& path, const ImageF& img) {
  write_png_u8(path, quantize_u8(img));
}

// Indexed 8-bit PNG; pixel values must be < palette size.
inline void write_png_palette(const fs::path& path, const ImageU8& img,
                              const std::vector<std::array<std::uint8_t, 3>>& palette) {
  require(img.channels == 1, ErrorCode::InvalidArgument, "palette png needs 1 channel");
  detail::write_png_impl(path, img.px.data(), img.width, img.height, 1, 8, &palette);
}

inline void write_png_u16(const fs::path& path, const std::vector<std::uint16_t>& px,
                          int w, int h, int channels) {
  require(px.size() == static_cast<size_t>(w) * h * channels, ErrorCode::DimensionMismatch,
          "u16 png buffer size mismatch");
  detail::write_png_impl(path, reinterpret_cast<const std::uint8_t*>(px.data()),
                         w, h, channels, 16, nullptr);
}

// Raw little-endian float32 sidecar (H*W values, row-major).
inline void write_depth_sidecar(const fs::path& path, const std::vector<float>& depth) {
  write_f32_array(path, depth.data(), depth.size());
}

}  // namespace corrgen
