#pragma once

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <memory>
#include <string>
#include <vector>

#include "quasiwarp/raster.hpp"

namespace quasiwarp {

namespace detail {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

inline std::uint8_t to_byte(float v) {
  const float c = std::min(1.0f, std::max(0.0f, v));
  return static_cast<std::uint8_t>(c * 255.0f + 0.5f);
}

inline bool has_suffix(const std::string& s, const char* suffix) {
  const size_t n = std::strlen(suffix);
  if (s.size() < n) return false;
  for (size_t i = 0; i < n; ++i) {
    const char a = s[s.size() - n + i];
    const char b = suffix[i];
    if (std::tolower(static_cast<unsigned char>(a)) != b) return false;
  }
  return true;
}

}  // namespace detail

inline Raster read_png(const std::string& path) {
  detail::FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) fail(ErrorCode::IoError, "cannot open " + path);

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(ErrorCode::IoError, "png reader allocation failed");
  }
  std::vector<png_bytep> row_ptrs;
  std::vector<png_byte> pixels;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(ErrorCode::IoError, "failed to decode " + path);
  }

  png_init_io(png, fp.get());
  png_read_info(png, info);

  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  const png_byte color = png_get_color_type(png, info);
  const png_byte depth = png_get_bit_depth(png, info);

  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (depth == 16) png_set_strip_16(png);
  if (color & PNG_COLOR_MASK_ALPHA || png_get_valid(png, info, PNG_INFO_tRNS))
    png_set_strip_alpha(png);
  png_read_update_info(png, info);

  const int channels = png_get_channels(png, info);
  if (channels != 1 && channels != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(ErrorCode::IoError, "unsupported channel layout in " + path);
  }

  const size_t stride = png_get_rowbytes(png, info);
  pixels.resize(stride * h);
  row_ptrs.resize(h);
  for (png_uint_32 y = 0; y < h; ++y) row_ptrs[y] = pixels.data() + y * stride;
  png_read_image(png, row_ptrs.data());
  png_destroy_read_struct(&png, &info, nullptr);

  Raster img = Raster::make(static_cast<int>(w), static_cast<int>(h), channels);
  for (png_uint_32 y = 0; y < h; ++y)
    for (png_uint_32 x = 0; x < w; ++x)
      for (int c = 0; c < channels; ++c)
        img.at(static_cast<int>(x), static_cast<int>(y), c) =
            pixels[y * stride + x * channels + c] / 255.0f;
  return img;
}

inline void write_png(const std::string& path, const Raster& img) {
  detail::FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) fail(ErrorCode::IoError, "cannot open " + path + " for writing");

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    fail(ErrorCode::IoError, "png writer allocation failed");
  }
  std::vector<png_byte> row(static_cast<size_t>(img.width) * img.channels);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail(ErrorCode::IoError, "failed to encode " + path);
  }

  png_init_io(png, fp.get());
  png_set_IHDR(png, info, img.width, img.height, 8,
               img.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < img.channels; ++c)
        row[static_cast<size_t>(x) * img.channels + c] =
            img.valid[img.index(x, y)] ? detail::to_byte(img.at(x, y, c)) : 0;
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

inline Raster read_ppm(const std::string& path) {
  detail::FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) fail(ErrorCode::IoError, "cannot open " + path);
  char magic[3] = {};
  if (std::fscanf(fp.get(), "%2s", magic) != 1 ||
      (std::strcmp(magic, "P6") != 0 && std::strcmp(magic, "P5") != 0))
    fail(ErrorCode::IoError, "not a binary PPM/PGM file: " + path);
  const int channels = std::strcmp(magic, "P6") == 0 ? 3 : 1;
  int w = 0, h = 0, maxval = 0;
  if (std::fscanf(fp.get(), "%d %d %d", &w, &h, &maxval) != 3 || w < 1 ||
      h < 1 || maxval != 255)
    fail(ErrorCode::IoError, "unsupported PPM header in " + path);
  std::fgetc(fp.get());  // single whitespace after maxval
  std::vector<std::uint8_t> buf(static_cast<size_t>(w) * h * channels);
  if (std::fread(buf.data(), 1, buf.size(), fp.get()) != buf.size())
    fail(ErrorCode::IoError, "truncated PPM data in " + path);
  Raster img = Raster::make(w, h, channels);
  for (size_t i = 0; i < buf.size(); ++i) img.data[i] = buf[i] / 255.0f;
  return img;
}

inline void write_ppm(const std::string& path, const Raster& img) {
  detail::FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) fail(ErrorCode::IoError, "cannot open " + path + " for writing");
  std::fprintf(fp.get(), "%s\n%d %d\n255\n", img.channels == 3 ? "P6" : "P5",
               img.width, img.height);
  std::vector<std::uint8_t> buf(static_cast<size_t>(img.width) * img.height * img.channels);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < img.channels; ++c)
        buf[(img.index(x, y)) * img.channels + c] =
            img.valid[img.index(x, y)] ? detail::to_byte(img.at(x, y, c)) : 0;
  if (std::fwrite(buf.data(), 1, buf.size(), fp.get()) != buf.size())
    fail(ErrorCode::IoError, "short write to " + path);
}

inline Raster read_image(const std::string& path) {
  if (detail::has_suffix(path, ".png")) return read_png(path);
  if (detail::has_suffix(path, ".ppm") || detail::has_suffix(path, ".pgm"))
    return read_ppm(path);
  fail(ErrorCode::InvalidArgument, "unsupported image extension: " + path);
}

inline void write_image(const std::string& path, const Raster& img) {
  if (detail::has_suffix(path, ".png")) return write_png(path, img);
  if (detail::has_suffix(path, ".ppm") || detail::has_suffix(path, ".pgm"))
    return write_ppm(path, img);
  fail(ErrorCode::InvalidArgument, "unsupported image extension: " + path);
}

/// Label mask as grayscale: empty pixels 0, labels spread over [1, 255].
inline Raster labels_to_raster(const std::vector<std::int16_t>& labels, int w, int h) {
  Raster img = Raster::make(w, h, 1);
  std::int16_t max_label = 0;
  for (auto l : labels) max_label = std::max(max_label, l);
  for (size_t i = 0; i < labels.size(); ++i)
    img.data[i] = labels[i] < 0
                      ? 0.0f
                      : static_cast<float>(labels[i] + 1) / (max_label + 1);
  return img;
}

}  // namespace quasiwarp
