#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>

#include "quasiwarp/errors.hpp"

namespace quasiwarp {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Homogeneous slope: k = dy/dx, with vertical represented as (0, 1).
struct Direction {
  double dx = 0.0;
  double dy = 0.0;
};

inline double cross(Direction a, Direction b) { return a.dx * b.dy - a.dy * b.dx; }
inline double norm(Direction d) { return std::hypot(d.dx, d.dy); }

/// Default degeneracy tolerance, relative to the matrix Frobenius norm.
constexpr double kDegeneracyTol = 1e-10;

/// Planar projective map x' = (h1 x + h2 y + h3) / d, y' = (h4 x + h5 y + h6) / d
/// with d = h7 x + h8 y + 1 (the bottom-right matrix entry is fixed to 1).
struct Homography {
  double h1 = 1.0, h2 = 0.0, h3 = 0.0;
  double h4 = 0.0, h5 = 1.0, h6 = 0.0;
  double h7 = 0.0, h8 = 0.0;

  static Homography identity() { return {}; }

  std::array<double, 9> matrix() const {
    return {h1, h2, h3, h4, h5, h6, h7, h8, 1.0};
  }

  double frobenius() const {
    return std::sqrt(h1 * h1 + h2 * h2 + h3 * h3 + h4 * h4 + h5 * h5 +
                     h6 * h6 + h7 * h7 + h8 * h8 + 1.0);
  }

  double det() const {
    return h1 * (h5 - h6 * h8) - h2 * (h4 - h6 * h7) + h3 * (h4 * h8 - h5 * h7);
  }
};

inline double fnorm3(const std::array<double, 9>& m) {
  double s = 0.0;
  for (double v : m) s += v * v;
  return std::sqrt(s);
}

/// Renormalizes an arbitrary 3x3 matrix into the h9 = 1 parameterization.
inline Homography from_matrix(const std::array<double, 9>& m,
                              double tol = kDegeneracyTol) {
  const double f = fnorm3(m);
  if (!(f > 0.0) || !std::isfinite(f))
    fail(ErrorCode::SingularHomography, "matrix is zero or non-finite");
  if (std::abs(m[8]) <= tol * f)
    fail(ErrorCode::SingularHomography,
         "bottom-right entry too small to normalize to 1");
  Homography H;
  H.h1 = m[0] / m[8];
  H.h2 = m[1] / m[8];
  H.h3 = m[2] / m[8];
  H.h4 = m[3] / m[8];
  H.h5 = m[4] / m[8];
  H.h6 = m[5] / m[8];
  H.h7 = m[6] / m[8];
  H.h8 = m[7] / m[8];
  const double fn = H.frobenius();
  if (std::abs(H.det()) <= tol * fn * fn * fn)
    fail(ErrorCode::SingularHomography, "matrix determinant below tolerance");
  return H;
}

inline double denominator(const Homography& H, Point p) {
  return H.h7 * p.x + H.h8 * p.y + 1.0;
}

inline std::optional<Point> try_apply(const Homography& H, Point p,
                                      double tol = kDegeneracyTol) {
  const double d = denominator(H, p);
  const double scale = std::hypot(H.h7, H.h8) * (std::abs(p.x) + std::abs(p.y)) + 1.0;
  if (std::abs(d) <= tol * scale) return std::nullopt;
  return Point{(H.h1 * p.x + H.h2 * p.y + H.h3) / d,
               (H.h4 * p.x + H.h5 * p.y + H.h6) / d};
}

inline Point apply(const Homography& H, Point p, double tol = kDegeneracyTol) {
  auto q = try_apply(H, p, tol);
  if (!q)
    fail(ErrorCode::DegeneratePoint, "point lies on the warp's vanishing line");
  return *q;
}

inline Homography invert(const Homography& H, double tol = kDegeneracyTol) {
  const double fn = H.frobenius();
  if (std::abs(H.det()) <= tol * fn * fn * fn)
    fail(ErrorCode::SingularHomography, "determinant below tolerance");
  const std::array<double, 9> adj = {
      H.h5 - H.h6 * H.h8,       H.h3 * H.h8 - H.h2,       H.h2 * H.h6 - H.h3 * H.h5,
      H.h6 * H.h7 - H.h4,       H.h1 - H.h3 * H.h7,       H.h3 * H.h4 - H.h1 * H.h6,
      H.h4 * H.h8 - H.h5 * H.h7, H.h2 * H.h7 - H.h1 * H.h8, H.h1 * H.h5 - H.h2 * H.h4};
  return from_matrix(adj, tol);
}

/// Direction of the image of the horizontal line through (., y).
inline Direction slope_h(const Homography& H, double y) {
  return {(H.h1 * H.h8 - H.h2 * H.h7) * y + (H.h1 - H.h3 * H.h7),
          (H.h4 * H.h8 - H.h5 * H.h7) * y + (H.h4 - H.h6 * H.h7)};
}

/// Direction of the image of the vertical line through (x, .).
inline Direction slope_v(const Homography& H, double x) {
  return {(H.h1 * H.h8 - H.h2 * H.h7) * x + (H.h3 * H.h8 - H.h2),
          (H.h4 * H.h8 - H.h5 * H.h7) * x + (H.h6 * H.h8 - H.h5)};
}

/// The unique row y* whose image stays horizontal.
inline double horizon_row(const Homography& H, double tol = kDegeneracyTol) {
  const double den = H.h4 * H.h8 - H.h5 * H.h7;
  const double fn = H.frobenius();
  if (std::abs(den) <= tol * fn * fn)
    fail(ErrorCode::AffineDegenerate,
         "every horizontal line stays horizontal; no unique horizon row");
  return (H.h6 * H.h7 - H.h4) / den;
}

/// Analytic partial derivative of the warped x-coordinate with respect to x.
inline double dfdx(const Homography& H, Point p, double tol = kDegeneracyTol) {
  const double d = denominator(H, p);
  const double scale = std::hypot(H.h7, H.h8) * (std::abs(p.x) + std::abs(p.y)) + 1.0;
  if (std::abs(d) <= tol * scale)
    fail(ErrorCode::DegeneratePoint, "point lies on the warp's vanishing line");
  const double num = (H.h1 * H.h8 - H.h2 * H.h7) * p.y + (H.h1 - H.h3 * H.h7);
  return num / (d * d);
}

/// Intersection of the lines a + t*da and b + s*db.
inline Point intersect_lines(Point a, Direction da, Point b, Direction db,
                             double tol = 1e-12) {
  const double det = cross(da, db);
  if (std::abs(det) <= tol * norm(da) * norm(db))
    fail(ErrorCode::ParallelConstraintLines, "constraint lines are parallel");
  const double rx = b.x - a.x;
  const double ry = b.y - a.y;
  const double t = (rx * db.dy - ry * db.dx) / det;
  return {a.x + t * da.dx, a.y + t * da.dy};
}

inline std::optional<Point> try_intersect_lines(Point a, Direction da, Point b,
                                                Direction db, double tol = 1e-12) {
  const double det = cross(da, db);
  if (std::abs(det) <= tol * norm(da) * norm(db)) return std::nullopt;
  const double rx = b.x - a.x;
  const double ry = b.y - a.y;
  const double t = (rx * db.dy - ry * db.dx) / det;
  return Point{a.x + t * da.dx, a.y + t * da.dy};
}

/// Parses nine whitespace-separated decimals, row-major, and renormalizes.
inline Homography parse_homography(const std::string& text) {
  std::istringstream in(text);
  std::array<double, 9> m{};
  for (double& v : m) {
    if (!(in >> v))
      fail(ErrorCode::InvalidArgument,
           "homography text must contain nine decimals");
  }
  std::string extra;
  if (in >> extra)
    fail(ErrorCode::InvalidArgument,
         "homography text must contain exactly nine decimals");
  return from_matrix(m);
}

inline std::string format_homography(const Homography& H) {
  const auto m = H.matrix();
  std::string out;
  char buf[32];
  for (int i = 0; i < 9; ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", m[i]);
    out += buf;
    out += (i % 3 == 2) ? '\n' : ' ';
  }
  return out;
}

}  // namespace quasiwarp
