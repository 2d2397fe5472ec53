#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "quasiwarp/geometry.hpp"
#include "quasiwarp/maxflow.hpp"
#include "quasiwarp/parallel.hpp"
#include "quasiwarp/raster.hpp"

namespace quasiwarp {

/// Canvas rectangle; the reference image pixel (0,0) sits at origin().
struct CanvasFrame {
  int origin_x = 0;
  int origin_y = 0;
  int width = 0;
  int height = 0;

  Point origin() const {
    return {static_cast<double>(origin_x), static_cast<double>(origin_y)};
  }
};

namespace detail {

struct Bounds {
  double min_x = 0.0, min_y = 0.0, max_x = 0.0, max_y = 0.0;
  bool empty = true;

  void include(Point p) {
    if (empty) {
      min_x = max_x = p.x;
      min_y = max_y = p.y;
      empty = false;
    } else {
      min_x = std::min(min_x, p.x);
      max_x = std::max(max_x, p.x);
      min_y = std::min(min_y, p.y);
      max_y = std::max(max_y, p.y);
    }
  }
};

/// Forward-maps the image boundary: corners plus 64 samples per edge, since
/// the piecewise map can bow edges between corners.
template <class Fwd>
void include_boundary(Bounds& b, Fwd&& fwd, int width, int height) {
  constexpr int kEdgeSamples = 64;
  const double w = width - 1, h = height - 1;
  const auto sample = [&](double x, double y) {
    auto q = fwd(Point{x, y});
    if (!q)
      fail(ErrorCode::UnboundedWarp, "boundary sample failed to map");
    b.include(*q);
  };
  for (int i = 0; i <= kEdgeSamples + 1; ++i) {
    const double t = static_cast<double>(i) / (kEdgeSamples + 1);
    sample(w * t, 0.0);
    sample(w * t, h);
    sample(0.0, h * t);
    sample(w, h * t);
  }
}

inline CanvasFrame to_frame(const Bounds& b, int canvas_cap) {
  const int min_x = static_cast<int>(std::floor(b.min_x));
  const int min_y = static_cast<int>(std::floor(b.min_y));
  const int max_x = static_cast<int>(std::ceil(b.max_x));
  const int max_y = static_cast<int>(std::ceil(b.max_y));
  CanvasFrame f;
  f.origin_x = -min_x;
  f.origin_y = -min_y;
  f.width = max_x - min_x + 1;
  f.height = max_y - min_y + 1;
  if (f.width > canvas_cap || f.height > canvas_cap)
    fail(ErrorCode::UnboundedWarp, "canvas exceeds the configured cap");
  return f;
}

}  // namespace detail

/// Bounding box of the reference rectangle united with the forward-mapped
/// target boundary.
template <class Fwd>
CanvasFrame canvas_bounds(Fwd&& fwd, int target_w, int target_h, int ref_w,
                          int ref_h, int canvas_cap = 20000) {
  detail::Bounds b;
  b.include({0.0, 0.0});
  b.include({static_cast<double>(ref_w - 1), static_cast<double>(ref_h - 1)});
  detail::include_boundary(b, fwd, target_w, target_h);
  return detail::to_frame(b, canvas_cap);
}

/// Bounding box of the warped target boundary alone.
template <class Fwd>
CanvasFrame canvas_bounds(Fwd&& fwd, int target_w, int target_h,
                          int canvas_cap = 20000) {
  detail::Bounds b;
  detail::include_boundary(b, fwd, target_w, target_h);
  return detail::to_frame(b, canvas_cap);
}

/// Backward-warp resampling: each canvas pixel is mapped into source
/// coordinates and bilinearly interpolated; unmappable pixels stay invalid.
template <class Bwd>
Raster warp_image(Bwd&& bwd, const Raster& img, const CanvasFrame& frame) {
  Raster out = Raster::make(frame.width, frame.height, img.channels, 0.0f, false);
  parallel_for(0, frame.height, [&](int cy) {
    float px[3];
    for (int cx = 0; cx < frame.width; ++cx) {
      const Point ref{static_cast<double>(cx - frame.origin_x),
                      static_cast<double>(cy - frame.origin_y)};
      auto src = bwd(ref);
      if (!src) continue;
      if (!bilinear_sample(img, src->x, src->y, px)) continue;
      out.valid[out.index(cx, cy)] = 1;
      for (int c = 0; c < img.channels; ++c) out.at(cx, cy, c) = px[c];
    }
  });
  return out;
}

/// Copies the reference image onto the canvas at its integer offset.
inline Raster place_reference(const Raster& ref, const CanvasFrame& frame) {
  Raster out = Raster::make(frame.width, frame.height, ref.channels, 0.0f, false);
  for (int y = 0; y < ref.height; ++y) {
    const int cy = y + frame.origin_y;
    if (cy < 0 || cy >= frame.height) continue;
    for (int x = 0; x < ref.width; ++x) {
      const int cx = x + frame.origin_x;
      if (cx < 0 || cx >= frame.width) continue;
      if (!ref.valid[ref.index(x, y)]) continue;
      out.valid[out.index(cx, cy)] = 1;
      for (int c = 0; c < ref.channels; ++c) out.at(cx, cy, c) = ref.at(x, y, c);
    }
  }
  return out;
}

/// Binary labeling of the overlap: 0 takes a's content, 1 takes b's,
/// 255 marks pixels outside the overlap.
struct SeamResult {
  std::vector<std::uint8_t> label;
  double cut_cost = 0.0;
  int overlap_count = 0;
};

/// Minimum-cost seam through the overlap via max-flow/min-cut. The cost of a
/// cut edge between 4-neighbors p, q is diff(p) + diff(q), where diff is the
/// color Euclidean distance between the two sources. Pixels 4-adjacent to the
/// a-only region are a-terminals, to the b-only region b-terminals.
inline SeamResult find_seam(const Raster& a, const Raster& b) {
  if (a.width != b.width || a.height != b.height || a.channels != b.channels)
    fail(ErrorCode::InvalidArgument, "seam inputs must share geometry");
  const int w = a.width, h = a.height;

  std::vector<int> node(static_cast<size_t>(w) * h, -1);
  std::vector<int> xs, ys;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (a.is_valid(x, y) && b.is_valid(x, y)) {
        node[a.index(x, y)] = static_cast<int>(xs.size());
        xs.push_back(x);
        ys.push_back(y);
      }
  const int n = static_cast<int>(xs.size());
  if (n == 0) fail(ErrorCode::NoOverlap, "images do not overlap");

  std::vector<double> diff(n, 0.0);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int c = 0; c < a.channels; ++c) {
      const double d = static_cast<double>(a.at(xs[i], ys[i], c)) -
                       static_cast<double>(b.at(xs[i], ys[i], c));
      s += d * d;
    }
    diff[i] = std::sqrt(s);
    total += diff[i];
  }
  const double inf = 4.0 * total + 1.0;

  const int source = n, sink = n + 1;
  MaxFlow mf(n + 2);
  constexpr int dx4[4] = {1, 0, -1, 0};
  constexpr int dy4[4] = {0, 1, 0, -1};
  for (int i = 0; i < n; ++i) {
    const int x = xs[i], y = ys[i];
    bool touches_a = false, touches_b = false;
    for (int k = 0; k < 4; ++k) {
      const int nx = x + dx4[k], ny = y + dy4[k];
      const bool va = a.is_valid(nx, ny), vb = b.is_valid(nx, ny);
      if (va && vb) {
        // add each grid edge once, from its lexicographically first endpoint
        if (k < 2) mf.add_edge(i, node[a.index(nx, ny)],
                               diff[i] + diff[node[a.index(nx, ny)]],
                               diff[i] + diff[node[a.index(nx, ny)]]);
      } else if (va) {
        touches_a = true;
      } else if (vb) {
        touches_b = true;
      }
    }
    if (touches_a) mf.add_edge(source, i, inf);
    if (touches_b) mf.add_edge(i, sink, inf);
  }

  mf.solve(source, sink);
  const auto side = mf.source_side(source);

  SeamResult r;
  r.overlap_count = n;
  r.label.assign(static_cast<size_t>(w) * h, 255);
  for (int i = 0; i < n; ++i)
    r.label[a.index(xs[i], ys[i])] = side[i] ? 0 : 1;
  for (int i = 0; i < n; ++i) {
    const int x = xs[i], y = ys[i];
    for (int k = 0; k < 2; ++k) {  // right and down, each pair counted once
      const int nx = x + dx4[k], ny = y + dy4[k];
      if (nx >= w || ny >= h) continue;
      const int j = node[a.index(nx, ny)];
      if (j >= 0 && r.label[a.index(x, y)] != r.label[a.index(nx, ny)])
        r.cut_cost += diff[i] + diff[j];
    }
  }
  return r;
}

/// Composed canvas with per-pixel source labels and the seam polyline.
struct Mosaic {
  Raster canvas;
  std::vector<std::int16_t> labels;  // -1 empty, 0 reference, k >= 1 targets
  std::vector<std::array<int, 2>> seam;
};

namespace detail {

/// Seam pixels: label-boundary pixels inside the overlap, scanline order.
inline void collect_seam(const Raster& a, const Raster& b,
                         const std::vector<std::int16_t>& labels, int w, int h,
                         std::vector<std::array<int, 2>>& out) {
  constexpr int dx4[4] = {1, 0, -1, 0};
  constexpr int dy4[4] = {0, 1, 0, -1};
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const size_t i = static_cast<size_t>(y) * w + x;
      if (labels[i] < 0 || !a.is_valid(x, y) || !b.is_valid(x, y)) continue;
      for (int k = 0; k < 4; ++k) {
        const int nx = x + dx4[k], ny = y + dy4[k];
        if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
        const std::int16_t nl = labels[static_cast<size_t>(ny) * w + nx];
        if (nl >= 0 && nl != labels[i]) {
          out.push_back({x, y});
          break;
        }
      }
    }
}

inline void feather_seam(Raster& canvas, const Raster& a, const Raster& b,
                         const std::vector<std::int16_t>& labels,
                         const std::vector<std::array<int, 2>>& seam,
                         int feather_px) {
  if (feather_px <= 0 || seam.empty()) return;
  const int w = canvas.width, h = canvas.height;
  std::vector<int> dist(static_cast<size_t>(w) * h, feather_px + 1);
  std::vector<std::array<int, 2>> frontier = seam;
  for (const auto& p : seam) dist[static_cast<size_t>(p[1]) * w + p[0]] = 0;
  constexpr int dx4[4] = {1, 0, -1, 0};
  constexpr int dy4[4] = {0, 1, 0, -1};
  for (int d = 1; d <= feather_px && !frontier.empty(); ++d) {
    std::vector<std::array<int, 2>> next;
    for (const auto& p : frontier)
      for (int k = 0; k < 4; ++k) {
        const int nx = p[0] + dx4[k], ny = p[1] + dy4[k];
        if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
        const size_t i = static_cast<size_t>(ny) * w + nx;
        if (dist[i] <= d) continue;
        dist[i] = d;
        next.push_back({nx, ny});
      }
    frontier = std::move(next);
  }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const size_t i = static_cast<size_t>(y) * w + x;
      if (dist[i] > feather_px || labels[i] < 0) continue;
      if (!a.is_valid(x, y) || !b.is_valid(x, y)) continue;
      // weight ramps from 1/2 on the seam toward the owning source
      const double t = 0.5 + 0.5 * static_cast<double>(dist[i]) / (feather_px + 1);
      const Raster& own = labels[i] == 0 ? a : b;
      const Raster& other = labels[i] == 0 ? b : a;
      for (int c = 0; c < canvas.channels; ++c)
        canvas.at(x, y, c) = static_cast<float>(t * own.at(x, y, c) +
                                                (1.0 - t) * other.at(x, y, c));
    }
}

}  // namespace detail

/// Copies each pixel from its labeled source (0 = reference raster,
/// any positive label = warped target raster).
inline Mosaic blend(const Raster& warped_target, const Raster& ref_on_canvas,
                    const std::vector<std::int16_t>& labels, int feather_px = 0) {
  const Raster& a = ref_on_canvas;
  const Raster& b = warped_target;
  if (a.width != b.width || a.height != b.height || a.channels != b.channels)
    fail(ErrorCode::InvalidArgument, "blend inputs must share geometry");
  const int w = a.width, h = a.height;
  if (labels.size() != static_cast<size_t>(w) * h)
    fail(ErrorCode::InvalidArgument, "label mask size mismatch");

  Mosaic m;
  m.canvas = Raster::make(w, h, a.channels, 0.0f, false);
  m.labels = labels;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const size_t i = static_cast<size_t>(y) * w + x;
      const std::int16_t l = labels[i];
      if (l < 0) {
        if (a.is_valid(x, y) || b.is_valid(x, y))
          fail(ErrorCode::LabelGap, "valid pixel has no label");
        continue;
      }
      const Raster& src = (l == 0) ? a : b;
      if (!src.is_valid(x, y))
        fail(ErrorCode::LabelGap, "labeled pixel is invalid in its source");
      m.canvas.valid[i] = 1;
      for (int c = 0; c < a.channels; ++c) m.canvas.at(x, y, c) = src.at(x, y, c);
    }
  detail::collect_seam(a, b, m.labels, w, h, m.seam);
  detail::feather_seam(m.canvas, a, b, m.labels, m.seam, feather_px);
  return m;
}

}  // namespace quasiwarp
