#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "quasiwarp/compositing.hpp"
#include "quasiwarp/estimation.hpp"
#include "quasiwarp/matching.hpp"
#include "quasiwarp/warp.hpp"

namespace quasiwarp {

enum class WarpMode { Quasi, Homography };

inline const char* warp_mode_name(WarpMode m) {
  return m == WarpMode::Quasi ? "quasi" : "homography";
}

struct StitchOptions {
  WarpMode mode = WarpMode::Quasi;
  bool rectify = false;
  bool refine_partition = false;
  RansacParams ransac;
  int feather_px = 0;
  bool fallback_to_homography = true;
  int canvas_cap = 20000;
};

struct PairReport {
  Homography h;  // target -> reference, in the original (unmirrored) frames
  WarpMode mode_used = WarpMode::Quasi;
  bool fell_back = false;
  bool mirrored = false;  // target lay left of the reference
  bool partition_refined = false;
  // partition/horizon in the estimation frame (mirrored when mirrored=true)
  double x_star = std::numeric_limits<double>::quiet_NaN();
  double y_star = std::numeric_limits<double>::quiet_NaN();
  int inlier_count = 0;
  int overlap_count = 0;
  double seam_cost = 0.0;
  double ms_estimation = 0.0;
  double ms_warp = 0.0;
  double ms_seam = 0.0;
  double ms_blend = 0.0;
  double ms_total = 0.0;
};

struct StitchResult {
  Mosaic mosaic;
  CanvasFrame frame;
  // target -> reference map; lives in the mirrored frames when
  // report.mirrored is set
  WarpStage warp = HomographyStage{};
  std::vector<std::uint8_t> inliers;
  PairReport report;
};

namespace detail {

inline double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - t0)
      .count();
}

inline Homography hmul(const Homography& A, const Homography& B) {
  const auto a = A.matrix();
  const auto b = B.matrix();
  std::array<double, 9> m{};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c)
      for (int k = 0; k < 3; ++k) m[r * 3 + c] += a[r * 3 + k] * b[k * 3 + c];
  return from_matrix(m);
}

/// Rightmost target column whose image lands inside the reference rectangle.
inline int overlap_outer_column(const Homography& H, int tw, int th, int rw,
                                int rh) {
  for (int x = tw - 1; x >= 0; --x)
    for (int y = 0; y < th; ++y) {
      auto q = try_apply(H, Point{static_cast<double>(x), static_cast<double>(y)});
      if (q && q->x >= 0.0 && q->x <= rw - 1.0 && q->y >= 0.0 &&
          q->y <= rh - 1.0)
        return x;
    }
  return -1;
}

/// The layout is left-to-right; a target extending further past the
/// reference's left edge than its right edge gets mirrored first.
inline bool should_mirror(const Homography& H, int tw, int th, int rw) {
  Bounds b;
  include_boundary(b, [&H](Point p) { return try_apply(H, p); }, tw, th);
  const double left_excess = -b.min_x;
  const double right_excess = b.max_x - (rw - 1.0);
  return left_excess > right_excess;
}

inline CorrespondenceSet mirror_correspondences(const CorrespondenceSet& in,
                                                int src_w, int dst_w) {
  CorrespondenceSet out = in;
  for (auto& c : out.items) {
    c.source.x = (src_w - 1.0) - c.source.x;
    c.dest.x = (dst_w - 1.0) - c.dest.x;
  }
  return out;
}

inline WarpStage make_warp(const Homography& H, double x_star,
                           const StitchOptions& opts, WarpMode& mode_used,
                           bool& fell_back, double& xs_out, double& ys_out) {
  if (opts.mode == WarpMode::Homography) {
    mode_used = WarpMode::Homography;
    return make_stage(H);
  }
  try {
    QuasiHomography q = build(H, x_star);
    mode_used = WarpMode::Quasi;
    xs_out = q.x_star;
    ys_out = q.y_star;
    return q;
  } catch (const Error& e) {
    const bool recoverable = e.code() == ErrorCode::AffineDegenerate ||
                             e.code() == ErrorCode::NonMonotoneScale ||
                             e.code() == ErrorCode::DegeneratePoint;
    if (!recoverable || !opts.fallback_to_homography) throw;
    mode_used = WarpMode::Homography;
    fell_back = true;
    return make_stage(H);
  }
}

struct ComposedPair {
  CanvasFrame frame;
  Raster warped;   // backward-resampled target
  Raster refc;     // reference placed on the canvas
  SeamResult seam;
};

inline ComposedPair compose_pair(const Raster& target, const Raster& reference,
                                 const WarpStage& warp, int canvas_cap,
                                 PairReport& rep) {
  ComposedPair c;
  auto t0 = std::chrono::steady_clock::now();
  c.frame = canvas_bounds([&warp](Point p) { return stage_forward(warp, p); },
                          target.width, target.height, reference.width,
                          reference.height, canvas_cap);
  c.warped = warp_image([&warp](Point p) { return stage_backward(warp, p); },
                        target, c.frame);
  c.refc = place_reference(reference, c.frame);
  rep.ms_warp += ms_since(t0);
  t0 = std::chrono::steady_clock::now();
  c.seam = find_seam(c.refc, c.warped);
  rep.ms_seam += ms_since(t0);
  return c;
}

/// Backprojects the provisional seam's boundary pixels into target columns.
/// Pixels next to either exclusive region are terminal-seeded; the label
/// boundary there traces the overlap outline (its pinch corners always sit
/// at the outermost overlap column), not the content cut, so only pairs of
/// interior pixels count.
inline std::vector<int> seam_target_columns(const ComposedPair& c,
                                            const WarpStage& warp) {
  const int w = c.refc.width, h = c.refc.height;
  constexpr int dx4[4] = {1, 0, -1, 0};
  constexpr int dy4[4] = {0, 1, 0, -1};
  auto label_at = [&](int x, int y) -> int {
    if (x < 0 || x >= w || y < 0 || y >= h) return 255;
    return c.seam.label[static_cast<size_t>(y) * w + x];
  };
  auto seeded = [&](int x, int y) -> bool {
    for (int k = 0; k < 4; ++k) {
      const int nx = x + dx4[k], ny = y + dy4[k];
      if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
      const size_t i = static_cast<size_t>(ny) * w + nx;
      if ((c.refc.valid[i] != 0) != (c.warped.valid[i] != 0)) return true;
    }
    return false;
  };
  std::vector<int> cols;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int l = label_at(x, y);
      if (l == 255 || seeded(x, y)) continue;
      bool boundary = false;
      for (int k = 0; k < 4 && !boundary; ++k) {
        const int nx = x + dx4[k], ny = y + dy4[k];
        const int nl = label_at(nx, ny);
        boundary = nl != 255 && nl != l && !seeded(nx, ny);
      }
      if (!boundary) continue;
      auto p = stage_backward(warp, Point{static_cast<double>(x - c.frame.origin_x),
                                          static_cast<double>(y - c.frame.origin_y)});
      if (p) cols.push_back(static_cast<int>(std::lround(p->x)));
    }
  return cols;
}

inline std::vector<std::int16_t> labels_from_seam(const ComposedPair& c) {
  const int w = c.refc.width, h = c.refc.height;
  std::vector<std::int16_t> labels(static_cast<size_t>(w) * h, -1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const size_t i = static_cast<size_t>(y) * w + x;
      const bool va = c.refc.valid[i] != 0;
      const bool vb = c.warped.valid[i] != 0;
      if (va && vb)
        labels[i] = c.seam.label[i] == 0 ? 0 : 1;
      else if (va)
        labels[i] = 0;
      else if (vb)
        labels[i] = 1;
    }
  return labels;
}

inline StitchResult stitch_pair_lr(const Raster& target, const Raster& reference,
                                   const CorrespondenceSet& corrs,
                                   const StitchOptions& opts) {
  StitchResult res;
  PairReport& rep = res.report;
  const auto t_total = std::chrono::steady_clock::now();

  auto t0 = std::chrono::steady_clock::now();
  const RansacResult rr = ransac(corrs, opts.ransac);
  Homography H = rr.h;
  if (opts.rectify)
    H = rectified_fit(corrs, rr.inliers, target.width - 1.0, target.height - 1.0);
  res.inliers = rr.inliers;
  rep.h = H;
  rep.inlier_count = rr.inlier_count;

  const int outer =
      overlap_outer_column(H, target.width, target.height, reference.width,
                           reference.height);
  if (outer < 0) fail(ErrorCode::NoOverlap, "images do not overlap");
  double x_star = outer + 1.0;
  res.warp = make_warp(H, x_star, opts, rep.mode_used, rep.fell_back,
                       rep.x_star, rep.y_star);
  rep.ms_estimation += ms_since(t0);

  ComposedPair c = compose_pair(target, reference, res.warp, opts.canvas_cap, rep);

  const std::vector<int> cols =
      opts.refine_partition && std::holds_alternative<QuasiHomography>(res.warp)
          ? seam_target_columns(c, res.warp)
          : std::vector<int>{};
  if (!cols.empty()) {
    const double refined = refine_partition(cols, outer);
    if (refined != x_star) {
      t0 = std::chrono::steady_clock::now();
      x_star = refined;
      res.warp = make_warp(H, x_star, opts, rep.mode_used, rep.fell_back,
                           rep.x_star, rep.y_star);
      rep.ms_estimation += ms_since(t0);
      c = compose_pair(target, reference, res.warp, opts.canvas_cap, rep);
      rep.partition_refined = true;
      if (std::holds_alternative<QuasiHomography>(res.warp)) {
        for (int col : seam_target_columns(c, res.warp))
          if (col >= static_cast<int>(x_star))
            fail(ErrorCode::PartitionInsideOverlap,
                 "refined partition cuts the overlap interior beyond the seam");
      }
    }
  }

  rep.seam_cost = c.seam.cut_cost;
  rep.overlap_count = c.seam.overlap_count;

  t0 = std::chrono::steady_clock::now();
  res.mosaic = blend(c.warped, c.refc, labels_from_seam(c), opts.feather_px);
  rep.ms_blend += ms_since(t0);

  res.frame = c.frame;
  rep.ms_total = ms_since(t_total);
  return res;
}

inline void unmirror_result(StitchResult& res, int ref_w) {
  const int w = res.mosaic.canvas.width;
  const int h = res.mosaic.canvas.height;
  res.mosaic.canvas = mirror_x(res.mosaic.canvas);
  std::vector<std::int16_t> labels(res.mosaic.labels.size());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      labels[static_cast<size_t>(y) * w + x] =
          res.mosaic.labels[static_cast<size_t>(y) * w + (w - 1 - x)];
  res.mosaic.labels = std::move(labels);
  for (auto& p : res.mosaic.seam) p[0] = w - 1 - p[0];
  std::sort(res.mosaic.seam.begin(), res.mosaic.seam.end(),
            [](const std::array<int, 2>& a, const std::array<int, 2>& b) {
              return a[1] != b[1] ? a[1] < b[1] : a[0] < b[0];
            });
  res.frame.origin_x = w - ref_w - res.frame.origin_x;
}

}  // namespace detail

/// Two-image stitch: estimate, partition, warp, seam-cut, blend. The target
/// may sit on either side of the reference; the left case is handled by
/// mirroring both images, stitching, and unmirroring the mosaic.
inline StitchResult stitch_pair(const Raster& target, const Raster& reference,
                                CorrespondenceSet corrs,
                                const StitchOptions& opts = {}) {
  if (corrs.items.empty()) corrs = detect_and_match(target, reference);
  const Homography probe = ransac(corrs, opts.ransac).h;
  if (!detail::should_mirror(probe, target.width, target.height, reference.width))
    return detail::stitch_pair_lr(target, reference, corrs, opts);

  const Raster mt = mirror_x(target);
  const Raster mr = mirror_x(reference);
  const CorrespondenceSet mc =
      detail::mirror_correspondences(corrs, target.width, reference.width);
  StitchResult res = detail::stitch_pair_lr(mt, mr, mc, opts);
  detail::unmirror_result(res, reference.width);
  res.report.mirrored = true;
  res.report.h = detail::hmul(
      detail::hmul(mirror_homography(reference.width), res.report.h),
      mirror_homography(target.width));
  return res;
}

struct StageReport {
  int target_image = 0;  // the image this stage warps
  int onto_image = 0;    // the adjacent image it was estimated against
  Homography h;          // target -> onto, in the original frames
  bool mirrored = false;
  // x_star/y_star are in the estimation frame (mirrored when mirrored=true)
  WarpMode mode_used = WarpMode::Quasi;
  bool fell_back = false;
  double x_star = std::numeric_limits<double>::quiet_NaN();
  double y_star = std::numeric_limits<double>::quiet_NaN();
  int inlier_count = 0;
};

struct SequenceReport {
  int ref_index = 0;
  std::vector<StageReport> stages;
  std::vector<double> junction_seam_costs;  // in merge order
  double ms_total = 0.0;
};

struct SequenceResult {
  Mosaic mosaic;
  CanvasFrame frame;
  SequenceReport report;
};

namespace detail {

[[noreturn]] inline void chain_break(int a, int b, const Error& e) {
  throw Error(ErrorCode::ChainBreak, "pair " + std::to_string(a) + "-" +
                                         std::to_string(b) + ": " + e.what());
}

/// Estimates one adjacency stage and its quasi (or fallback) warp.
inline WarpStage sequence_stage(const Raster& src_img, const Raster& dst_img,
                                const CorrespondenceSet& corrs,
                                const StitchOptions& opts, StageReport& rep) {
  try {
    const RansacResult rr = ransac(corrs, opts.ransac);
    Homography H = rr.h;
    if (opts.rectify)
      H = rectified_fit(corrs, rr.inliers, src_img.width - 1.0,
                        src_img.height - 1.0);
    rep.h = H;
    rep.inlier_count = rr.inlier_count;
    const int outer = overlap_outer_column(H, src_img.width, src_img.height,
                                           dst_img.width, dst_img.height);
    if (outer < 0) fail(ErrorCode::NoOverlap, "adjacent images do not overlap");
    return make_warp(H, outer + 1.0, opts, rep.mode_used, rep.fell_back,
                     rep.x_star, rep.y_star);
  } catch (const Error& e) {
    chain_break(std::min(rep.target_image, rep.onto_image),
                std::max(rep.target_image, rep.onto_image), e);
  }
}

inline CorrespondenceSet swapped(const CorrespondenceSet& in) {
  CorrespondenceSet out = in;
  for (auto& c : out.items) std::swap(c.source, c.dest);
  return out;
}

}  // namespace detail

/// Multi-image stitch: pairwise warps oriented away from the reference are
/// chained per image, all images share one canvas, and seams are cut while
/// compositing outward from the reference, right side first.
///
/// pair_corrs[i] relates images i and i+1, source points in image i.
/// Labels: targets keep their input order, numbered 1..n-1 around the
/// reference.
inline SequenceResult stitch_sequence(const std::vector<Raster>& images,
                                      std::vector<CorrespondenceSet> pair_corrs,
                                      int ref_index,
                                      const StitchOptions& opts = {}) {
  const int n = static_cast<int>(images.size());
  if (n < 2) fail(ErrorCode::InvalidArgument, "need at least two images");
  if (ref_index < 0 || ref_index >= n)
    fail(ErrorCode::InvalidArgument, "reference index out of range");
  if (pair_corrs.size() != static_cast<size_t>(n) - 1)
    fail(ErrorCode::InvalidArgument,
         "need exactly one correspondence set per adjacent pair");
  for (int i = 0; i + 1 < n; ++i)
    if (pair_corrs[i].items.empty())
      pair_corrs[i] = detect_and_match(images[i], images[i + 1]);

  const auto t_total = std::chrono::steady_clock::now();
  auto label_of = [ref_index](int j) {
    return static_cast<std::int16_t>(j < ref_index ? j + 1 : j);
  };

  if (n == 2) {
    const int tgt = ref_index == 0 ? 1 : 0;
    CorrespondenceSet corrs =
        tgt == 0 ? pair_corrs[0] : detail::swapped(pair_corrs[0]);
    StitchResult pr;
    try {
      pr = stitch_pair(images[tgt], images[ref_index], std::move(corrs), opts);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ChainBreak) throw;
      detail::chain_break(std::min(tgt, ref_index), std::max(tgt, ref_index), e);
    }
    SequenceResult out;
    out.mosaic = std::move(pr.mosaic);
    out.frame = pr.frame;
    out.report.ref_index = ref_index;
    StageReport sr;
    sr.target_image = tgt;
    sr.onto_image = ref_index;
    sr.h = pr.report.h;
    sr.mirrored = pr.report.mirrored;
    sr.mode_used = pr.report.mode_used;
    sr.fell_back = pr.report.fell_back;
    sr.x_star = pr.report.x_star;
    sr.y_star = pr.report.y_star;
    sr.inlier_count = pr.report.inlier_count;
    out.report.stages.push_back(sr);
    out.report.junction_seam_costs.push_back(pr.report.seam_cost);
    out.report.ms_total = detail::ms_since(t_total);
    return out;
  }

  SequenceResult out;
  out.report.ref_index = ref_index;

  // chains toward the reference; left-side stages live in mirrored frames
  std::vector<ChainedWarp> chains(n);
  std::vector<Raster> mirrored;  // cache of mirrored left-side images
  if (ref_index > 0) {
    mirrored.reserve(ref_index + 1);
    for (int j = 0; j <= ref_index; ++j) mirrored.push_back(mirror_x(images[j]));
  }

  std::vector<WarpStage> right_stages;  // i -> i-1, for i = ref+1 .. n-1
  for (int i = ref_index + 1; i < n; ++i) {
    StageReport sr;
    sr.target_image = i;
    sr.onto_image = i - 1;
    right_stages.push_back(detail::sequence_stage(
        images[i], images[i - 1], detail::swapped(pair_corrs[i - 1]), opts, sr));
    out.report.stages.push_back(sr);
    // image i applies its own stage first, then walks down to the reference
    chains[i].stages.assign(right_stages.rbegin(), right_stages.rend());
  }

  std::vector<WarpStage> left_stages;  // mirrored i -> i+1, for i = ref-1 .. 0
  for (int i = ref_index - 1; i >= 0; --i) {
    StageReport sr;
    sr.target_image = i;
    sr.onto_image = i + 1;
    sr.mirrored = true;
    const CorrespondenceSet mc = detail::mirror_correspondences(
        pair_corrs[i], images[i].width, images[i + 1].width);
    left_stages.push_back(
        detail::sequence_stage(mirrored[i], mirrored[i + 1], mc, opts, sr));
    sr.h = detail::hmul(
        detail::hmul(mirror_homography(images[i + 1].width), sr.h),
        mirror_homography(images[i].width));
    out.report.stages.push_back(sr);
    ChainedWarp& ch = chains[i];
    ch.stages.push_back(make_stage(mirror_homography(images[i].width)));
    for (auto it = left_stages.rbegin(); it != left_stages.rend(); ++it)
      ch.stages.push_back(*it);
    ch.stages.push_back(make_stage(mirror_homography(images[ref_index].width)));
  }

  detail::Bounds b;
  b.include({0.0, 0.0});
  b.include({images[ref_index].width - 1.0, images[ref_index].height - 1.0});
  for (int i = 0; i < n; ++i) {
    if (i == ref_index) continue;
    const ChainedWarp& ch = chains[i];
    detail::include_boundary(
        b, [&ch](Point p) { return try_forward(ch, p); }, images[i].width,
        images[i].height);
  }
  out.frame = detail::to_frame(b, opts.canvas_cap);

  Raster acc = place_reference(images[ref_index], out.frame);
  const int w = acc.width, h = acc.height;
  std::vector<std::int16_t> labels(static_cast<size_t>(w) * h, -1);
  for (size_t i = 0; i < acc.valid.size(); ++i)
    if (acc.valid[i]) labels[i] = 0;

  auto merge = [&](int img_index) {
    const ChainedWarp& ch = chains[img_index];
    const Raster warped = warp_image(
        [&ch](Point p) { return try_backward(ch, p); }, images[img_index],
        out.frame);
    Raster before;
    if (opts.feather_px > 0) before = acc;
    const SeamResult s = find_seam(acc, warped);
    out.report.junction_seam_costs.push_back(s.cut_cost);
    const std::int16_t lab = label_of(img_index);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const size_t i = static_cast<size_t>(y) * w + x;
        const bool take_b = s.label[i] == 1 || (s.label[i] == 255 &&
                                                warped.valid[i] && !acc.valid[i]);
        if (!take_b) continue;
        labels[i] = lab;
        acc.valid[i] = 1;
        for (int c = 0; c < acc.channels; ++c)
          acc.at(x, y, c) = warped.at(x, y, c);
      }
    if (opts.feather_px > 0) {
      std::vector<std::int16_t> binary(labels.size(), -1);
      std::vector<std::array<int, 2>> junction;
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          const size_t i = static_cast<size_t>(y) * w + x;
          if (labels[i] < 0) continue;
          binary[i] = labels[i] == lab ? 1 : 0;
        }
      detail::collect_seam(before, warped, binary, w, h, junction);
      detail::feather_seam(acc, before, warped, binary, junction, opts.feather_px);
    }
  };
  for (int i = ref_index + 1; i < n; ++i) merge(i);
  for (int i = ref_index - 1; i >= 0; --i) merge(i);

  Mosaic m;
  m.canvas = std::move(acc);
  m.labels = std::move(labels);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const size_t i = static_cast<size_t>(y) * w + x;
      if (m.labels[i] < 0) continue;
      constexpr int dx4[4] = {1, 0, -1, 0};
      constexpr int dy4[4] = {0, 1, 0, -1};
      for (int k = 0; k < 4; ++k) {
        const int nx = x + dx4[k], ny = y + dy4[k];
        if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
        const std::int16_t nl = m.labels[static_cast<size_t>(ny) * w + nx];
        if (nl >= 0 && nl != m.labels[i]) {
          m.seam.push_back({x, y});
          break;
        }
      }
    }
  out.mosaic = std::move(m);
  out.report.ms_total = detail::ms_since(t_total);
  return out;
}

}  // namespace quasiwarp
