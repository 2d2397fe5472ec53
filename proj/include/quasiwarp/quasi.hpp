#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "quasiwarp/geometry.hpp"

namespace quasiwarp {

/// Piecewise warp: the base homography on R_O = {x <= x*}, and its
/// slope-preserving, horizontally-linearized extension on R_Q = {x > x*}.
struct QuasiHomography {
  Homography base;
  Homography base_inv;
  double x_star = 0.0;
  double y_star = 0.0;
  double f_at_anchor = 0.0;   // f0(x*, y*)
  double df_at_anchor = 0.0;  // d f0 / dx at (x*, y*)
  double g_at_anchor = 0.0;   // g0(., y*), constant along the horizon row
};

inline QuasiHomography build(const Homography& H0, double x_star,
                             double tol = kDegeneracyTol) {
  if (!std::isfinite(x_star))
    fail(ErrorCode::InvalidArgument, "partition abscissa must be finite");
  QuasiHomography Q;
  Q.base = H0;
  Q.base_inv = invert(H0, tol);
  Q.x_star = x_star;
  Q.y_star = horizon_row(H0, tol);
  const Point anchor{x_star, Q.y_star};
  const Point a = apply(H0, anchor, tol);
  Q.f_at_anchor = a.x;
  Q.g_at_anchor = a.y;
  Q.df_at_anchor = dfdx(H0, anchor, tol);
  if (!(Q.df_at_anchor > 0.0))
    fail(ErrorCode::NonMonotoneScale,
         "linearized scale does not advance rightward at the anchor");
  return Q;
}

/// Linearized scale f*(x, y*) = f0(x*, y*) + f0'(x*, y*) (x - x*).
inline double linear_scale(const QuasiHomography& Q, double x) {
  return Q.f_at_anchor + Q.df_at_anchor * (x - Q.x_star);
}

inline std::optional<Point> try_forward(const QuasiHomography& Q, Point p,
                                        ErrorCode* why = nullptr) {
  if (p.x <= Q.x_star) {
    auto q = try_apply(Q.base, p);
    if (!q && why) *why = ErrorCode::DegeneratePoint;
    return q;
  }
  auto a = try_apply(Q.base, Point{Q.x_star, p.y});
  if (!a) {
    if (why) *why = ErrorCode::DegeneratePoint;
    return std::nullopt;
  }
  const Direction dh = slope_h(Q.base, p.y);
  const Point b{linear_scale(Q, p.x), Q.g_at_anchor};
  const Direction dv = slope_v(Q.base, p.x);
  auto q = try_intersect_lines(*a, dh, b, dv);
  if (!q && why) *why = ErrorCode::ParallelConstraintLines;
  return q;
}

inline Point forward(const QuasiHomography& Q, Point p) {
  ErrorCode why = ErrorCode::DegeneratePoint;
  auto q = try_forward(Q, p, &why);
  if (!q) fail(why, "forward map undefined at this point");
  return *q;
}

namespace detail {

/// Real roots of m1 x^2 + m2 x + m3 = 0, evaluated in the numerically
/// stable form. Returns the count; a negative discriminant yields zero.
inline int quadratic_roots(double m1, double m2, double m3, double roots[2]) {
  if (m1 == 0.0) {
    if (m2 == 0.0) return 0;
    roots[0] = -m3 / m2;
    return 1;
  }
  const double disc = m2 * m2 - 4.0 * m1 * m3;
  if (disc < 0.0) return -1;
  const double s = std::sqrt(disc);
  const double q = -0.5 * (m2 + std::copysign(s, m2));
  if (q == 0.0) {
    roots[0] = 0.0;
    return 1;
  }
  roots[0] = q / m1;
  roots[1] = m3 / q;
  return 2;
}

}  // namespace detail

inline std::optional<Point> try_backward(const QuasiHomography& Q, Point q,
                                         ErrorCode* why = nullptr) {
  auto p0 = try_apply(Q.base_inv, q);
  if (!p0) {
    if (why) *why = ErrorCode::DegeneratePoint;
    return std::nullopt;
  }
  if (p0->x <= Q.x_star) return p0;

  // In R_Q' the y preimage equals the inverse homography's y component;
  // x is the admissible root of the quadratic obtained by substituting the
  // linearized scale and the vertical-slope field into the warp system.
  const Homography& H = Q.base;
  const double u1 = H.h4 * H.h8 - H.h5 * H.h7;
  const double u0 = H.h6 * H.h8 - H.h5;
  const double v1 = H.h1 * H.h8 - H.h2 * H.h7;
  const double v0 = H.h3 * H.h8 - H.h2;
  const double c1 = Q.df_at_anchor;
  const double c0 = Q.f_at_anchor - Q.df_at_anchor * Q.x_star;
  const double gy = q.y - Q.g_at_anchor;
  const double m1 = c1 * u1;
  const double m2 = gy * v1 - q.x * u1 + c1 * u0 + c0 * u1;
  const double m3 = gy * v0 - q.x * u0 + c0 * u0;

  double roots[2];
  const int n = detail::quadratic_roots(m1, m2, m3, roots);
  if (n < 0) {
    if (why) *why = ErrorCode::NoAdmissibleRoot;
    return std::nullopt;
  }

  // Both roots reproduce q when it sits on the row's image line, so the
  // residual cannot arbitrate between them. The map is monotone from x* up
  // to the fold of the vertical-slope pencil and the spurious root is the
  // fold reflection, hence the smaller admissible root is the preimage.
  const double slack = 1e-9 * (1.0 + std::abs(Q.x_star));
  const double max_residual = 1e-3 * (1.0 + std::abs(q.x) + std::abs(q.y));
  bool any_real = n > 0;
  bool best_found = false;
  Point best{};
  for (int i = 0; i < n; ++i) {
    if (!(roots[i] > Q.x_star - slack)) continue;
    if (best_found && roots[i] >= best.x) continue;
    const Point cand{roots[i], p0->y};
    auto img = try_forward(Q, cand);
    if (!img) continue;
    if (distance(*img, q) >= max_residual) continue;
    best = cand;
    best_found = true;
  }
  if (!best_found) {
    if (why)
      *why = any_real ? ErrorCode::OutsideImage : ErrorCode::NoAdmissibleRoot;
    return std::nullopt;
  }
  return best;
}

inline Point backward(const QuasiHomography& Q, Point q) {
  ErrorCode why = ErrorCode::NoAdmissibleRoot;
  auto p = try_backward(Q, q, &why);
  if (!p) fail(why, "backward map undefined at this point");
  return *p;
}

/// Piecewise scale f†(x, y*): rational up to x*, linear beyond.
inline std::vector<double> scale_profile(const QuasiHomography& Q,
                                         const std::vector<double>& xs) {
  std::vector<double> out;
  out.reserve(xs.size());
  for (double x : xs) {
    if (x <= Q.x_star)
      out.push_back(apply(Q.base, Point{x, Q.y_star}).x);
    else
      out.push_back(linear_scale(Q, x));
  }
  return out;
}

}  // namespace quasiwarp
