#pragma once

// Shared builders for the test suite: synthetic rasters sampled from the
// oracle scene and correspondence sets with controlled noise.

#include <quasiwarp/errors.hpp>
#include <quasiwarp/estimation.hpp>
#include <quasiwarp/raster.hpp>

#include "oracle.hpp"

#include <array>
#include <optional>
#include <random>

namespace support {

template <class F>
std::optional<quasiwarp::ErrorCode> error_code_of(F&& f) {
  try {
    (void)f();
    return std::nullopt;
  } catch (const quasiwarp::Error& e) {
    return e.code();
  }
}

// raster whose pixel (x, y) shows the oracle scene at offset + M(x, y)
inline quasiwarp::Raster scene_raster(int w, int h, const oracle::Mat3& m,
                                      double off_x = 0.0, double off_y = 0.0) {
  quasiwarp::Raster out = quasiwarp::Raster::make(w, h, 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const oracle::P2 p = oracle::apply(m, x, y);
      const auto rgb = oracle::scene_rgb(p.x + off_x, p.y + off_y);
      for (int c = 0; c < 3; ++c)
        out.at(x, y, c) = static_cast<float>(rgb[static_cast<size_t>(c)]);
    }
  return out;
}

inline quasiwarp::Raster scene_raster(int w, int h, double off_x = 0.0,
                                      double off_y = 0.0) {
  return scene_raster(w, h, oracle::Mat3::Identity(), off_x, off_y);
}

// correspondences source -> dest with dest = G(source) + noise, plus a
// fraction of gross outliers
inline quasiwarp::CorrespondenceSet make_correspondences(
    const oracle::Mat3& g, int count, double src_w, double src_h,
    double noise_px, double outlier_fraction, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto uni = [&rng](double a, double b) {
    return std::uniform_real_distribution<double>(a, b)(rng);
  };
  quasiwarp::CorrespondenceSet out;
  const int outliers = static_cast<int>(count * outlier_fraction);
  for (int i = 0; i < count; ++i) {
    quasiwarp::Correspondence c;
    c.source = {uni(0.0, src_w), uni(0.0, src_h)};
    const oracle::P2 q = oracle::apply(g, c.source.x, c.source.y);
    c.dest = {q.x, q.y};
    if (i < outliers) {
      c.dest.x += uni(25.0, 220.0) * (rng() % 2 ? 1.0 : -1.0);
      c.dest.y += uni(25.0, 220.0) * (rng() % 2 ? 1.0 : -1.0);
    } else if (noise_px > 0.0) {
      c.dest.x += uni(-noise_px, noise_px);
      c.dest.y += uni(-noise_px, noise_px);
    }
    out.items.push_back(c);
  }
  return out;
}

inline oracle::Mat3 mat_of(const quasiwarp::Homography& h) {
  return oracle::to_mat(h.matrix());
}

// sum of seeded gaussian bumps, corner-rich for the feature matcher;
// shift_x slides the window over the same bump field
inline quasiwarp::Raster blob_raster(int w, int h, int blobs,
                                     std::uint64_t seed, double shift_x = 0.0) {
  std::mt19937_64 rng(seed);
  auto uni = [&rng](double a, double b) {
    return std::uniform_real_distribution<double>(a, b)(rng);
  };
  std::vector<std::array<double, 4>> bumps;
  for (int i = 0; i < blobs; ++i)
    bumps.push_back({uni(5.0, w + 15.0), uni(2.0, h - 2.0), uni(1.8, 3.5),
                     uni(0.35, 1.0)});
  quasiwarp::Raster out = quasiwarp::Raster::make(w, h, 1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double v = 0.1;
      for (const auto& bp : bumps) {
        const double dx = x + shift_x - bp[0], dy = y - bp[1];
        v += bp[3] * std::exp(-(dx * dx + dy * dy) / (2.0 * bp[2] * bp[2]));
      }
      out.at(x, y, 0) = static_cast<float>(std::min(v, 1.0));
    }
  return out;
}

}  // namespace support
