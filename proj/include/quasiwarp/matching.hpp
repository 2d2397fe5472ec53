#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "quasiwarp/estimation.hpp"
#include "quasiwarp/raster.hpp"

namespace quasiwarp {

struct MatchOptions {
  int max_keypoints = 512;
  int patch_radius = 5;
  double harris_k = 0.04;
  double response_rel = 0.01;  // keypoint threshold relative to the peak response
  double min_ncc = 0.5;
  double ratio_sq = 0.64;      // Lowe-style ratio on squared NCC distance
};

namespace detail {

struct Keypoint {
  int x = 0;
  int y = 0;
  double response = 0.0;
};

inline std::vector<Keypoint> harris_keypoints(const Raster& gray,
                                              const MatchOptions& opt) {
  const int w = gray.width, h = gray.height;
  const int margin = opt.patch_radius + 2;
  if (w < 2 * margin + 3 || h < 2 * margin + 3) return {};

  std::vector<float> ix(static_cast<size_t>(w) * h, 0.0f);
  std::vector<float> iy(static_cast<size_t>(w) * h, 0.0f);
  for (int y = 1; y + 1 < h; ++y)
    for (int x = 1; x + 1 < w; ++x) {
      const auto px = [&](int i, int j) { return gray.at(i, j, 0); };
      ix[gray.index(x, y)] =
          (px(x + 1, y - 1) + 2 * px(x + 1, y) + px(x + 1, y + 1) -
           px(x - 1, y - 1) - 2 * px(x - 1, y) - px(x - 1, y + 1)) * 0.25f;
      iy[gray.index(x, y)] =
          (px(x - 1, y + 1) + 2 * px(x, y + 1) + px(x + 1, y + 1) -
           px(x - 1, y - 1) - 2 * px(x, y - 1) - px(x + 1, y - 1)) * 0.25f;
    }

  std::vector<double> resp(static_cast<size_t>(w) * h, 0.0);
  double peak = 0.0;
  for (int y = 2; y + 2 < h; ++y)
    for (int x = 2; x + 2 < w; ++x) {
      double sxx = 0, syy = 0, sxy = 0;
      for (int dy = -2; dy <= 2; ++dy)
        for (int dx = -2; dx <= 2; ++dx) {
          const size_t i = gray.index(x + dx, y + dy);
          sxx += static_cast<double>(ix[i]) * ix[i];
          syy += static_cast<double>(iy[i]) * iy[i];
          sxy += static_cast<double>(ix[i]) * iy[i];
        }
      const double tr = sxx + syy;
      const double r = sxx * syy - sxy * sxy - opt.harris_k * tr * tr;
      resp[gray.index(x, y)] = r;
      peak = std::max(peak, r);
    }

  const double threshold = std::max(opt.response_rel * peak, 1e-12);
  std::vector<Keypoint> kps;
  for (int y = margin; y + margin < h; ++y)
    for (int x = margin; x + margin < w; ++x) {
      const double r = resp[gray.index(x, y)];
      if (r <= threshold) continue;
      bool is_max = true;
      for (int dy = -1; dy <= 1 && is_max; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          if (resp[gray.index(x + dx, y + dy)] > r) {
            is_max = false;
            break;
          }
        }
      if (is_max) kps.push_back({x, y, r});
    }
  std::sort(kps.begin(), kps.end(), [](const Keypoint& a, const Keypoint& b) {
    if (a.response != b.response) return a.response > b.response;
    if (a.y != b.y) return a.y < b.y;
    return a.x < b.x;
  });
  if (static_cast<int>(kps.size()) > opt.max_keypoints)
    kps.resize(opt.max_keypoints);
  return kps;
}

/// Mean-subtracted, unit-norm patch descriptor; dot products are NCC values.
inline std::vector<float> describe(const Raster& gray, const Keypoint& kp,
                                   int radius) {
  const int side = 2 * radius + 1;
  std::vector<float> d(static_cast<size_t>(side) * side);
  double mean = 0.0;
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx)
      mean += gray.at(kp.x + dx, kp.y + dy, 0);
  mean /= d.size();
  double ss = 0.0;
  size_t i = 0;
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx, ++i) {
      d[i] = static_cast<float>(gray.at(kp.x + dx, kp.y + dy, 0) - mean);
      ss += static_cast<double>(d[i]) * d[i];
    }
  const float scale = ss > 1e-12 ? static_cast<float>(1.0 / std::sqrt(ss)) : 0.0f;
  for (float& v : d) v *= scale;
  return d;
}

}  // namespace detail

/// Harris corners, NCC patch matching with ratio test and cross check.
/// Intended for desk-scale tests, not production matching.
inline CorrespondenceSet detect_and_match(const Raster& img_a, const Raster& img_b,
                                          const MatchOptions& opt = {}) {
  const Raster ga = to_gray(img_a);
  const Raster gb = to_gray(img_b);
  const auto ka = detail::harris_keypoints(ga, opt);
  const auto kb = detail::harris_keypoints(gb, opt);
  if (ka.size() < 4 || kb.size() < 4)
    fail(ErrorCode::TooFewFeatures, "not enough keypoints to match");

  std::vector<std::vector<float>> da(ka.size()), db(kb.size());
  for (size_t i = 0; i < ka.size(); ++i) da[i] = detail::describe(ga, ka[i], opt.patch_radius);
  for (size_t i = 0; i < kb.size(); ++i) db[i] = detail::describe(gb, kb[i], opt.patch_radius);

  const auto ncc = [](const std::vector<float>& u, const std::vector<float>& v) {
    double s = 0.0;
    for (size_t i = 0; i < u.size(); ++i) s += static_cast<double>(u[i]) * v[i];
    return s;
  };

  std::vector<int> best_for_b(kb.size(), -1);
  std::vector<double> best_ncc_b(kb.size(), -2.0);
  for (size_t j = 0; j < kb.size(); ++j)
    for (size_t i = 0; i < ka.size(); ++i) {
      const double s = ncc(da[i], db[j]);
      if (s > best_ncc_b[j]) {
        best_ncc_b[j] = s;
        best_for_b[j] = static_cast<int>(i);
      }
    }

  CorrespondenceSet out;
  for (size_t i = 0; i < ka.size(); ++i) {
    int best = -1;
    double s1 = -2.0, s2 = -2.0;
    for (size_t j = 0; j < kb.size(); ++j) {
      const double s = ncc(da[i], db[j]);
      if (s > s1) {
        s2 = s1;
        s1 = s;
        best = static_cast<int>(j);
      } else if (s > s2) {
        s2 = s;
      }
    }
    if (best < 0 || s1 < opt.min_ncc) continue;
    if ((1.0 - s1) > opt.ratio_sq * (1.0 - s2)) continue;
    if (best_for_b[best] != static_cast<int>(i)) continue;
    out.items.push_back({{static_cast<double>(ka[i].x), static_cast<double>(ka[i].y)},
                         {static_cast<double>(kb[best].x), static_cast<double>(kb[best].y)},
                         1.0});
  }
  if (out.items.size() < 4)
    fail(ErrorCode::TooFewFeatures, "fewer than 4 matches survived");
  return out;
}

}  // namespace quasiwarp
