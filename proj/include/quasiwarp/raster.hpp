#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "quasiwarp/errors.hpp"

namespace quasiwarp {

/// Rectangular pixel grid, samples in [0,1], with a per-pixel validity mask.
/// Pixel centers sit at integer coordinates.
struct Raster {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<float> data;           // width * height * channels, row-major
  std::vector<std::uint8_t> valid;   // width * height

  static Raster make(int w, int h, int c, float fill = 0.0f, bool valid_all = true) {
    if (w < 1 || h < 1 || (c != 1 && c != 3))
      fail(ErrorCode::InvalidArgument, "raster dimensions must be positive, 1 or 3 channels");
    Raster r;
    r.width = w;
    r.height = h;
    r.channels = c;
    r.data.assign(static_cast<size_t>(w) * h * c, fill);
    r.valid.assign(static_cast<size_t>(w) * h, valid_all ? 1 : 0);
    return r;
  }

  size_t index(int x, int y) const { return static_cast<size_t>(y) * width + x; }

  float& at(int x, int y, int c) {
    return data[index(x, y) * channels + c];
  }
  float at(int x, int y, int c) const {
    return data[index(x, y) * channels + c];
  }

  bool in_bounds(int x, int y) const {
    return x >= 0 && x < width && y >= 0 && y < height;
  }
  bool is_valid(int x, int y) const {
    return in_bounds(x, y) && valid[index(x, y)] != 0;
  }
};

/// Bilinear sample at (sx, sy); false outside [0, w-1] x [0, h-1] or when a
/// contributing neighbor is invalid. Out-of-range samples are not clamped.
inline bool bilinear_sample(const Raster& img, double sx, double sy, float* out) {
  if (!(sx >= 0.0) || !(sy >= 0.0) || !(sx <= img.width - 1) || !(sy <= img.height - 1))
    return false;
  int x0 = static_cast<int>(sx);
  int y0 = static_cast<int>(sy);
  if (x0 > img.width - 2) x0 = img.width > 1 ? img.width - 2 : 0;
  if (y0 > img.height - 2) y0 = img.height > 1 ? img.height - 2 : 0;
  const double fx = sx - x0;
  const double fy = sy - y0;
  const int x1 = std::min(x0 + 1, img.width - 1);
  const int y1 = std::min(y0 + 1, img.height - 1);
  const double w00 = (1.0 - fx) * (1.0 - fy);
  const double w10 = fx * (1.0 - fy);
  const double w01 = (1.0 - fx) * fy;
  const double w11 = fx * fy;
  if ((w00 > 0.0 && !img.is_valid(x0, y0)) || (w10 > 0.0 && !img.is_valid(x1, y0)) ||
      (w01 > 0.0 && !img.is_valid(x0, y1)) || (w11 > 0.0 && !img.is_valid(x1, y1)))
    return false;
  for (int c = 0; c < img.channels; ++c) {
    out[c] = static_cast<float>(w00 * img.at(x0, y0, c) + w10 * img.at(x1, y0, c) +
                                w01 * img.at(x0, y1, c) + w11 * img.at(x1, y1, c));
  }
  return true;
}

inline Raster to_gray(const Raster& img) {
  if (img.channels == 1) return img;
  Raster g = Raster::make(img.width, img.height, 1);
  g.valid = img.valid;
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      g.at(x, y, 0) = 0.299f * img.at(x, y, 0) + 0.587f * img.at(x, y, 1) +
                      0.114f * img.at(x, y, 2);
  return g;
}

inline Raster mirror_x(const Raster& img) {
  Raster m = Raster::make(img.width, img.height, img.channels);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      m.valid[m.index(x, y)] = img.valid[img.index(img.width - 1 - x, y)];
      for (int c = 0; c < img.channels; ++c)
        m.at(x, y, c) = img.at(img.width - 1 - x, y, c);
    }
  return m;
}

}  // namespace quasiwarp
