#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "quasiwarp/geometry.hpp"

namespace quasiwarp {

/// Matched point pair, source in the target image, dest in the reference.
struct Correspondence {
  Point source;
  Point dest;
  double weight = 1.0;
};

struct CorrespondenceSet {
  std::vector<Correspondence> items;
  std::vector<std::uint8_t> inlier_mask;  // empty when absent

  size_t size() const { return items.size(); }
};

struct RansacParams {
  double inlier_threshold_px = 3.0;
  int max_iterations = 2000;
  double confidence = 0.995;
  std::uint64_t seed = 0;
};

namespace detail {

struct Similarity {
  double scale = 1.0;
  double cx = 0.0;
  double cy = 0.0;

  Point map(Point p) const { return {scale * (p.x - cx), scale * (p.y - cy)}; }
};

inline Similarity hartley_normalization(const std::vector<Point>& pts) {
  Similarity t;
  const size_t n = pts.size();
  for (const Point& p : pts) {
    t.cx += p.x;
    t.cy += p.y;
  }
  t.cx /= static_cast<double>(n);
  t.cy /= static_cast<double>(n);
  double mean_dist = 0.0;
  for (const Point& p : pts) mean_dist += std::hypot(p.x - t.cx, p.y - t.cy);
  mean_dist /= static_cast<double>(n);
  t.scale = mean_dist > 1e-12 ? std::sqrt(2.0) / mean_dist : 1.0;
  return t;
}

/// H = Td^-1 * Hn * Ts, renormalized to h9 = 1.
inline Homography denormalize(const Eigen::Matrix3d& Hn, const Similarity& ts,
                              const Similarity& td) {
  Eigen::Matrix3d Ts, Tdinv;
  Ts << ts.scale, 0, -ts.scale * ts.cx, 0, ts.scale, -ts.scale * ts.cy, 0, 0, 1;
  Tdinv << 1.0 / td.scale, 0, td.cx, 0, 1.0 / td.scale, td.cy, 0, 0, 1;
  const Eigen::Matrix3d M = Tdinv * Hn * Ts;
  return from_matrix({M(0, 0), M(0, 1), M(0, 2), M(1, 0), M(1, 1), M(1, 2),
                      M(2, 0), M(2, 1), M(2, 2)});
}

inline bool three_collinear(Point a, Point b, Point c, double tol) {
  const double area = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
  const double s = std::max({distance(a, b), distance(a, c), distance(b, c)});
  return std::abs(area) <= tol * s * s;
}

inline Eigen::MatrixXd design_matrix(const std::vector<Correspondence>& items,
                                     const Similarity& ts, const Similarity& td) {
  Eigen::MatrixXd A(2 * items.size(), 9);
  for (size_t i = 0; i < items.size(); ++i) {
    const Point s = ts.map(items[i].source);
    const Point d = td.map(items[i].dest);
    const double w = std::sqrt(std::max(items[i].weight, 0.0));
    A.row(2 * i) << w * s.x, w * s.y, w, 0, 0, 0, -w * d.x * s.x,
        -w * d.x * s.y, -w * d.x;
    A.row(2 * i + 1) << 0, 0, 0, w * s.x, w * s.y, w, -w * d.y * s.x,
        -w * d.y * s.y, -w * d.y;
  }
  return A;
}

}  // namespace detail

/// Hartley-normalized direct linear transform.
inline Homography dlt(const CorrespondenceSet& corrs) {
  const auto& items = corrs.items;
  if (items.size() < 4)
    fail(ErrorCode::DegenerateConfiguration,
         "at least 4 correspondences are required");
  if (items.size() <= 8) {
    for (size_t i = 0; i < items.size(); ++i)
      for (size_t j = i + 1; j < items.size(); ++j) {
        if (distance(items[i].source, items[j].source) < 1e-9 ||
            distance(items[i].dest, items[j].dest) < 1e-9)
          fail(ErrorCode::DegenerateConfiguration, "duplicated points");
        for (size_t k = j + 1; k < items.size(); ++k)
          if (detail::three_collinear(items[i].source, items[j].source,
                                      items[k].source, 1e-9) ||
              detail::three_collinear(items[i].dest, items[j].dest,
                                      items[k].dest, 1e-9))
            fail(ErrorCode::DegenerateConfiguration, "three collinear points");
      }
  }

  std::vector<Point> src(items.size()), dst(items.size());
  for (size_t i = 0; i < items.size(); ++i) {
    src[i] = items[i].source;
    dst[i] = items[i].dest;
  }
  const auto ts = detail::hartley_normalization(src);
  const auto td = detail::hartley_normalization(dst);
  const Eigen::MatrixXd A = detail::design_matrix(items, ts, td);

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double s0 = sv(0);
  const double s8 = sv(sv.size() > 7 ? 7 : sv.size() - 1);
  const double s9 = sv.size() > 8 ? sv(8) : 0.0;
  if (!(s0 > 0.0) || s8 <= 1e-9 * s0)
    fail(ErrorCode::DegenerateConfiguration,
         "correspondences do not determine a unique homography");
  if (s8 - s9 <= 1e-12 * s0)
    fail(ErrorCode::IllConditioned, "singular-value gap below tolerance");

  const Eigen::VectorXd h = svd.matrixV().col(8);
  Eigen::Matrix3d Hn;
  Hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
  return detail::denormalize(Hn, ts, td);
}

/// Squared symmetric transfer error; infinite when either direction is
/// undefined at the point.
inline double symmetric_transfer_sq(const Homography& H, const Homography& Hinv,
                                    const Correspondence& c) {
  auto fwd = try_apply(H, c.source);
  auto bwd = try_apply(Hinv, c.dest);
  if (!fwd || !bwd) return std::numeric_limits<double>::infinity();
  const double df = distance(*fwd, c.dest);
  const double db = distance(*bwd, c.source);
  return df * df + db * db;
}

struct RansacResult {
  Homography h;
  std::vector<std::uint8_t> inliers;
  int inlier_count = 0;
};

inline RansacResult ransac(const CorrespondenceSet& corrs,
                           const RansacParams& params) {
  const auto& items = corrs.items;
  const size_t n = items.size();
  if (n < 4)
    fail(ErrorCode::DegenerateConfiguration,
         "at least 4 correspondences are required");
  if (!(params.inlier_threshold_px > 0.0) || params.max_iterations < 1 ||
      !(params.confidence > 0.0 && params.confidence < 1.0))
    fail(ErrorCode::InvalidArgument, "invalid RANSAC parameters");

  std::mt19937_64 rng(params.seed);
  const double thr_sq = params.inlier_threshold_px * params.inlier_threshold_px;

  std::vector<size_t> idx(n);
  for (size_t i = 0; i < n; ++i) idx[i] = i;

  std::vector<std::uint8_t> best_mask;
  Homography best_h;
  int best_count = 0;
  int best_support = -1;  // inliers outside the minimal sample
  long long iterations = params.max_iterations;

  for (long long it = 0; it < iterations; ++it) {
    for (int k = 0; k < 4; ++k) {
      const size_t j = k + static_cast<size_t>(rng() % (n - k));
      std::swap(idx[k], idx[j]);
    }
    CorrespondenceSet sample;
    sample.items = {items[idx[0]], items[idx[1]], items[idx[2]], items[idx[3]]};

    Homography h, hinv;
    try {
      h = dlt(sample);
      hinv = invert(h);
    } catch (const Error&) {
      continue;
    }

    std::vector<std::uint8_t> mask(n, 0);
    int count = 0;
    for (size_t i = 0; i < n; ++i) {
      if (symmetric_transfer_sq(h, hinv, items[i]) < thr_sq) {
        mask[i] = 1;
        ++count;
      }
    }
    int in_sample = 0;
    for (int k = 0; k < 4; ++k) in_sample += mask[idx[k]];

    if (count > best_count) {
      best_count = count;
      best_support = count - in_sample;
      best_mask = std::move(mask);
      best_h = h;
      const double w = static_cast<double>(count) / static_cast<double>(n);
      const double p_good = w * w * w * w;
      if (p_good >= 1.0 - 1e-12) {
        iterations = it + 1;
      } else if (p_good > 0.0) {
        const double needed =
            std::log(1.0 - params.confidence) / std::log(1.0 - p_good);
        iterations = std::min<long long>(
            params.max_iterations,
            static_cast<long long>(std::ceil(needed)));
      }
    }
  }

  // Consensus requires support beyond the minimal sample; a 4-point sample
  // always fits itself exactly, so it carries no evidence on its own.
  const int needed_support =
      std::min<int>(4, static_cast<int>(n) - 4);
  if (best_count < 4 || best_support < needed_support)
    fail(ErrorCode::NoConsensus, "no model reached consensus");

  CorrespondenceSet inlier_set;
  for (size_t i = 0; i < n; ++i)
    if (best_mask[i]) inlier_set.items.push_back(items[i]);

  RansacResult out;
  try {
    out.h = dlt(inlier_set);
    const Homography hinv = invert(out.h);
    out.inliers.assign(n, 0);
    out.inlier_count = 0;
    for (size_t i = 0; i < n; ++i)
      if (symmetric_transfer_sq(out.h, hinv, items[i]) < thr_sq) {
        out.inliers[i] = 1;
        ++out.inlier_count;
      }
  } catch (const Error&) {
    out.h = best_h;
    out.inliers = best_mask;
    out.inlier_count = best_count;
  }
  return out;
}

/// Constrained least squares on the given inliers: the target's vertical
/// boundary x = width maps to a vertical line, i.e. f0(w, 0) = f0(w, h).
/// Solved by projected alternation on the h9 = 1 normalized form.
inline Homography rectified_fit(const CorrespondenceSet& corrs,
                                const std::vector<std::uint8_t>& mask,
                                double width, double height) {
  std::vector<Correspondence> items;
  for (size_t i = 0; i < corrs.items.size(); ++i)
    if (mask.empty() || mask[i]) items.push_back(corrs.items[i]);
  if (items.size() < 4)
    fail(ErrorCode::DegenerateConfiguration,
         "at least 4 inlier correspondences are required");

  std::vector<Point> src(items.size()), dst(items.size());
  for (size_t i = 0; i < items.size(); ++i) {
    src[i] = items[i].source;
    dst[i] = items[i].dest;
  }
  const auto ts = detail::hartley_normalization(src);
  const auto td = detail::hartley_normalization(dst);
  const double wn = ts.scale * (width - ts.cx);
  const Eigen::MatrixXd A = detail::design_matrix(items, ts, td);

  Eigen::JacobiSVD<Eigen::MatrixXd> svd0(A, Eigen::ComputeFullV);
  Eigen::VectorXd h = svd0.matrixV().col(8);

  constexpr int red_cols[8] = {0, 1, 2, 3, 4, 5, 6, 8};
  for (int iter = 0; iter < 50; ++iter) {
    const double den = h(0) * wn + h(2);
    if (std::abs(den) <= 1e-12 * h.norm() * (1.0 + std::abs(wn)))
      fail(ErrorCode::ConstraintInfeasible,
           "constraint denominator h1*w + h3 vanished");
    const double k = (h(6) * wn + h(8)) / den;

    Eigen::MatrixXd Ar(A.rows(), 8);
    for (int j = 0; j < 8; ++j) Ar.col(j) = A.col(red_cols[j]);
    Ar.col(1) += k * A.col(7);  // fold h8 = k * h2 into the h2 column

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Ar, Eigen::ComputeFullV);
    const Eigen::VectorXd r = svd.matrixV().col(7);
    Eigen::VectorXd next(9);
    for (int j = 0; j < 8; ++j) next(red_cols[j]) = r(j);
    next(7) = k * r(1);
    next.normalize();
    if (next.dot(h) < 0) next = -next;
    const double delta = (next - h).lpNorm<Eigen::Infinity>();
    h = next;
    if (delta <= 1e-10) break;
  }

  Eigen::Matrix3d Hn;
  Hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
  Homography H = detail::denormalize(Hn, ts, td);

  // The constraint form is preserved by the axis-aligned normalizations;
  // re-enforce it exactly in the original frame to absorb rounding.
  const double den = H.h1 * width + H.h3;
  if (std::abs(den) <= 1e-12 * H.frobenius() * (1.0 + std::abs(width)))
    fail(ErrorCode::ConstraintInfeasible,
         "constraint denominator h1*w + h3 vanished");
  H.h8 = H.h2 * (H.h7 * width + 1.0) / den;

  const double fx0 = apply(H, Point{width, 0.0}).x;
  const double fxh = apply(H, Point{width, height}).x;
  if (std::abs(fx0 - fxh) >= 1e-6)
    fail(ErrorCode::ConstraintInfeasible,
         "constrained fit failed to make the boundary vertical");
  return H;
}

inline Homography estimate_rectified(const CorrespondenceSet& corrs,
                                     double width, double height,
                                     const RansacParams& params) {
  const RansacResult r = ransac(corrs, params);
  return rectified_fit(corrs, r.inliers, width, height);
}

/// Partition abscissa just outside the seam's extreme toward the
/// non-overlapping side.
inline double refine_partition(const std::vector<int>& seam_columns,
                               int overlap_max_x) {
  if (seam_columns.empty())
    fail(ErrorCode::EmptySeam, "seam has no pixels");
  const auto [mn, mx] =
      std::minmax_element(seam_columns.begin(), seam_columns.end());
  int x = *mx + 1;
  x = std::min(x, overlap_max_x + 1);
  x = std::max(x, *mn);
  return static_cast<double>(x);
}

}  // namespace quasiwarp
