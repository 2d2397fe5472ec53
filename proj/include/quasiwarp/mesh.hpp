#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "quasiwarp/quasi.hpp"

namespace quasiwarp {

/// Regular source grid and its warped image, with per-cell orientation signs.
struct WarpedMesh {
  int nx = 0;  // nodes per row
  int ny = 0;  // nodes per column
  std::vector<Point> src;            // ny * nx, row-major
  std::vector<Point> dst;            // ny * nx, row-major
  std::vector<std::uint8_t> node_valid;
  std::vector<std::int8_t> cell_sign;  // (ny-1) * (nx-1): -1, 0, +1

  int node(int ix, int iy) const { return iy * nx + ix; }
  int cell(int ix, int iy) const { return iy * (nx - 1) + ix; }
};

/// Samples an arbitrary point map over a regular grid. Nodes where the map
/// is undefined are marked invalid; cells touching them get sign 0.
template <class F>
WarpedMesh sample_mesh(F&& map, double x0, double x1, double y0, double y1,
                       int nx, int ny) {
  if (nx < 2 || ny < 2)
    fail(ErrorCode::InvalidArgument, "mesh needs at least 2 steps per axis");
  WarpedMesh m;
  m.nx = nx;
  m.ny = ny;
  m.src.resize(static_cast<size_t>(nx) * ny);
  m.dst.resize(static_cast<size_t>(nx) * ny);
  m.node_valid.assign(static_cast<size_t>(nx) * ny, 0);
  for (int iy = 0; iy < ny; ++iy) {
    const double y = y0 + (y1 - y0) * iy / (ny - 1);
    for (int ix = 0; ix < nx; ++ix) {
      const double x = x0 + (x1 - x0) * ix / (nx - 1);
      const int i = m.node(ix, iy);
      m.src[i] = {x, y};
      if (auto q = map(Point{x, y})) {
        m.dst[i] = *q;
        m.node_valid[i] = 1;
      }
    }
  }
  m.cell_sign.assign(static_cast<size_t>(nx - 1) * (ny - 1), 0);
  for (int iy = 0; iy + 1 < ny; ++iy) {
    for (int ix = 0; ix + 1 < nx; ++ix) {
      const int i00 = m.node(ix, iy), i10 = m.node(ix + 1, iy);
      const int i11 = m.node(ix + 1, iy + 1), i01 = m.node(ix, iy + 1);
      if (!(m.node_valid[i00] && m.node_valid[i10] && m.node_valid[i11] &&
            m.node_valid[i01]))
        continue;
      const Point a = m.dst[i00], b = m.dst[i10], c = m.dst[i11], d = m.dst[i01];
      // shoelace signed area of the quad a-b-c-d
      const double area = 0.5 * ((a.x * b.y - b.x * a.y) + (b.x * c.y - c.x * b.y) +
                                 (c.x * d.y - d.x * c.y) + (d.x * a.y - a.x * d.y));
      m.cell_sign[m.cell(ix, iy)] =
          area > 0.0 ? std::int8_t{1} : (area < 0.0 ? std::int8_t{-1} : std::int8_t{0});
    }
  }
  return m;
}

inline WarpedMesh mesh(const QuasiHomography& Q, double x0, double x1,
                       double y0, double y1, int nx, int ny) {
  return sample_mesh([&Q](Point p) { return try_forward(Q, p); }, x0, x1, y0,
                     y1, nx, ny);
}

inline WarpedMesh mesh(const Homography& H, double x0, double x1, double y0,
                       double y1, int nx, int ny) {
  return sample_mesh([&H](Point p) { return try_apply(H, p); }, x0, x1, y0, y1,
                     nx, ny);
}

/// Number of valid cells whose orientation disagrees with the dominant sign.
inline int fold_count(const WarpedMesh& m) {
  int pos = 0, neg = 0;
  for (std::int8_t s : m.cell_sign) {
    if (s > 0) ++pos;
    if (s < 0) ++neg;
  }
  return pos >= neg ? neg : pos;
}

}  // namespace quasiwarp
