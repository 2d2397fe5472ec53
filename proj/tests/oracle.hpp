#pragma once

// Independent reference computations for the test suite. Everything here is
// written against plain arrays and Eigen rather than the library's own types,
// so the two sides cannot share a bug.

#include <Eigen/Dense>

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace oracle {

using Mat3 = Eigen::Matrix3d;

struct P2 {
  double x = 0.0;
  double y = 0.0;
};

inline Mat3 to_mat(const std::array<double, 9>& m) {
  Mat3 out;
  out << m[0], m[1], m[2], m[3], m[4], m[5], m[6], m[7], m[8];
  return out;
}

inline P2 apply(const Mat3& m, double x, double y) {
  const Eigen::Vector3d v = m * Eigen::Vector3d(x, y, 1.0);
  return {v.x() / v.z(), v.y() / v.z()};
}

inline P2 apply(const std::array<double, 9>& m, double x, double y) {
  return apply(to_mat(m), x, y);
}

inline Mat3 inverse(const Mat3& m) { return m.inverse().eval(); }

inline double cross(P2 u, P2 v) { return u.x * v.y - u.y * v.x; }

inline double norm(P2 u) { return std::hypot(u.x, u.y); }

// scale-free residual: zero iff a, b, c are collinear
inline double collinearity(P2 a, P2 b, P2 c) {
  const P2 u{b.x - a.x, b.y - a.y};
  const P2 v{c.x - a.x, c.y - a.y};
  const double n = norm(u) * norm(v);
  return n == 0.0 ? 0.0 : std::abs(cross(u, v)) / n;
}

inline double direction_mismatch(P2 u, P2 v) {
  const double n = norm(u) * norm(v);
  return n == 0.0 ? 0.0 : std::abs(cross(u, v)) / n;
}

// chord of the images of two points, an estimate of the mapped direction
inline P2 chord(const Mat3& m, P2 a, P2 b) {
  const P2 fa = apply(m, a.x, a.y);
  const P2 fb = apply(m, b.x, b.y);
  return {fb.x - fa.x, fb.y - fa.y};
}

// intersection of the line through p with direction d and the line through q
// with direction e, solved as a dense 2x2 system
inline P2 intersect(P2 p, P2 d, P2 q, P2 e) {
  Eigen::Matrix2d A;
  A << d.x, -e.x, d.y, -e.y;
  const Eigen::Vector2d rhs(q.x - p.x, q.y - p.y);
  const Eigen::Vector2d st = A.fullPivLu().solve(rhs);
  return {p.x + st(0) * d.x, p.y + st(0) * d.y};
}

template <class F>
double deriv_central(F f, double x, double h = 1e-5) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

// second-order one-sided derivative from the left
template <class F>
double deriv_left(F f, double x, double h = 1e-5) {
  return (3.0 * f(x) - 4.0 * f(x - h) + f(x - 2.0 * h)) / (2.0 * h);
}

// Random well-conditioned homographies: modest affine part, small projective
// row, denominator bounded away from zero on [-lim, lim]^2.
struct HGen {
  std::mt19937_64 rng;

  explicit HGen(std::uint64_t seed) : rng(seed) {}

  double uniform(double a, double b) {
    return std::uniform_real_distribution<double>(a, b)(rng);
  }

  int pick(int n) { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); }

  std::array<double, 9> sample(double lim = 2000.0, bool force_h7 = false) {
    for (;;) {
      std::array<double, 9> h;
      h[0] = uniform(0.8, 1.25);
      h[1] = uniform(-0.25, 0.25);
      h[2] = uniform(-100.0, 100.0);
      h[3] = uniform(-0.25, 0.25);
      h[4] = uniform(0.8, 1.25);
      h[5] = uniform(-100.0, 100.0);
      const double s7 = pick(2) ? 1.0 : -1.0;
      const double s8 = pick(2) ? 1.0 : -1.0;
      h[6] = s7 * uniform(force_h7 ? 1.1e-4 : 1e-5, 3.5e-4);
      h[7] = s8 * uniform(1e-5, 6e-5);
      h[8] = 1.0;
      if ((std::abs(h[6]) + std::abs(h[7])) * lim > 0.8) continue;
      if (std::abs(to_mat(h).determinant()) < 0.3) continue;
      if (std::abs(h[3] * h[7] - h[4] * h[6]) < 1e-8) continue;
      return h;
    }
  }

  // additionally keeps the horizon row near the image band and the linearized
  // scale advancing rightward over x_star in [-500, 1200]
  std::array<double, 9> sample_quasi(double* y_star_out = nullptr,
                                     bool force_h7 = false) {
    for (;;) {
      const std::array<double, 9> h = sample(2000.0, force_h7);
      const double den = h[3] * h[7] - h[4] * h[6];
      const double ys = (h[5] * h[6] - h[3]) / den;
      if (!std::isfinite(ys) || std::abs(ys) > 400.0) continue;
      const double dnum = (h[0] * h[7] - h[1] * h[6]) * ys + (h[0] - h[2] * h[6]);
      if (dnum < 0.3) continue;
      if (y_star_out) *y_star_out = ys;
      return h;
    }
  }
};

// Exact minimum labeling cost by Gray-code enumeration. Pixels with
// cost[i] < 0 are outside the overlap; forced[i] is -1 (free), 0, or 1.
// An edge between 4-adjacent overlap pixels with different labels pays
// cost[p] + cost[q].
inline double brute_force_min_cut(int w, int h, const std::vector<double>& cost,
                                  const std::vector<int>& forced) {
  std::vector<int> lab(cost.size(), -1);
  std::vector<int> free_ix;
  for (size_t i = 0; i < cost.size(); ++i) {
    if (cost[i] < 0.0) continue;
    lab[i] = forced[i] >= 0 ? forced[i] : 0;
    if (forced[i] < 0) free_ix.push_back(static_cast<int>(i));
  }
  struct Arm {
    int j;
    double wpq;
  };
  std::vector<std::vector<Arm>> arms(free_ix.size());
  constexpr int dx4[4] = {1, 0, -1, 0};
  constexpr int dy4[4] = {0, 1, 0, -1};
  for (size_t k = 0; k < free_ix.size(); ++k) {
    const int i = free_ix[k];
    const int x = i % w, y = i / w;
    for (int d = 0; d < 4; ++d) {
      const int nx = x + dx4[d], ny = y + dy4[d];
      if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
      const int j = ny * w + nx;
      if (cost[j] < 0.0) continue;
      arms[k].push_back({j, cost[i] + cost[j]});
    }
  }
  auto total = [&]() {
    double s = 0.0;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const int i = y * w + x;
        if (lab[i] < 0) continue;
        if (x + 1 < w && lab[i + 1] >= 0 && lab[i + 1] != lab[i])
          s += cost[i] + cost[i + 1];
        if (y + 1 < h && lab[i + w] >= 0 && lab[i + w] != lab[i])
          s += cost[i] + cost[i + w];
      }
    return s;
  };
  double cur = total();
  double best = cur;
  const std::uint64_t states = 1ull << free_ix.size();
  for (std::uint64_t g = 1; g < states; ++g) {
    const size_t k = static_cast<size_t>(std::countr_zero(g));
    const int i = free_ix[k];
    for (const Arm& a : arms[k]) cur += lab[a.j] == lab[i] ? a.wpq : -a.wpq;
    lab[i] ^= 1;
    best = std::min(best, cur);
  }
  return best;
}

// Analytic smooth panorama; wavelengths are long enough that bilinear
// resampling error stays orders of magnitude below the PSNR gates.
inline std::array<double, 3> scene_rgb(double x, double y) {
  constexpr double pi = 3.14159265358979323846;
  auto clamp01 = [](double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); };
  const double r =
      0.52 + 0.33 * std::sin(2 * pi * x / 310.0 + 0.9) * std::cos(2 * pi * y / 270.0 - 0.4);
  const double g = 0.50 + 0.34 * std::sin(2 * pi * (x + 0.6 * y) / 370.0 + 2.1);
  const double b = 0.50 + 0.33 * std::cos(2 * pi * (x - 0.5 * y) / 330.0 - 1.3);
  return {clamp01(r), clamp01(g), clamp01(b)};
}

inline double psnr(double mse, double peak = 1.0) {
  return 10.0 * std::log10(peak * peak / mse);
}

}  // namespace oracle
