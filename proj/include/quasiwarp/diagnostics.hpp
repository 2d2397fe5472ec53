#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "quasiwarp/mesh.hpp"
#include "quasiwarp/warp.hpp"

namespace quasiwarp {

/// All emitted artifacts format numbers this way so goldens stay byte-stable.
inline std::string fmt12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

template <class F>
std::vector<Point> sample_polyline(F&& map, Point a, Point b, int n) {
  std::vector<Point> pts;
  pts.reserve(static_cast<size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) {
    const double t = static_cast<double>(i) / n;
    const Point p{a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t};
    if (auto q = map(p)) pts.push_back(*q);
  }
  return pts;
}

struct MeshPanel {
  std::string title;
  WarpedMesh mesh;
  std::vector<Point> horizon;    // image of the row y = y*, drawn red
  std::vector<Point> partition;  // image of the column x = x*, drawn blue
  std::string horizon_note;
  std::string partition_note;
};

namespace detail {

struct PanelBox {
  double min_x = std::numeric_limits<double>::infinity();
  double min_y = std::numeric_limits<double>::infinity();
  double max_x = -std::numeric_limits<double>::infinity();
  double max_y = -std::numeric_limits<double>::infinity();

  void add(Point p) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) return;
    min_x = std::min(min_x, p.x);
    min_y = std::min(min_y, p.y);
    max_x = std::max(max_x, p.x);
    max_y = std::max(max_y, p.y);
  }
  bool empty() const { return !(min_x <= max_x); }
};

inline void svg_polyline(std::string& out, const std::vector<Point>& pts,
                         const char* color, const char* width) {
  if (pts.size() < 2) return;
  out += "<polyline fill=\"none\" stroke=\"";
  out += color;
  out += "\" stroke-width=\"";
  out += width;
  out += "\" points=\"";
  for (size_t i = 0; i < pts.size(); ++i) {
    if (i) out += ' ';
    out += fmt12(pts[i].x);
    out += ',';
    out += fmt12(pts[i].y);
  }
  out += "\"/>\n";
}

}  // namespace detail

/// Side-by-side mesh panels, each fitted to its own bounds so the squeezed
/// and the stretched warp stay readable at the same canvas size.
inline std::string mesh_panels_svg(const std::vector<MeshPanel>& panels,
                                   int panel_w = 520, int panel_h = 440) {
  const int pad = 24;
  const int title_h = 20;
  const int total_w = panel_w * static_cast<int>(panels.size());
  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         std::to_string(total_w) + "\" height=\"" + std::to_string(panel_h) +
         "\" viewBox=\"0 0 " + std::to_string(total_w) + " " +
         std::to_string(panel_h) + "\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  for (size_t pi = 0; pi < panels.size(); ++pi) {
    const MeshPanel& panel = panels[pi];
    const WarpedMesh& m = panel.mesh;
    detail::PanelBox box;
    for (size_t i = 0; i < m.dst.size(); ++i)
      if (m.node_valid[i]) box.add(m.dst[i]);
    for (Point p : panel.horizon) box.add(p);
    for (Point p : panel.partition) box.add(p);
    if (box.empty()) continue;

    const double range_x = std::max(box.max_x - box.min_x, 1e-9);
    const double range_y = std::max(box.max_y - box.min_y, 1e-9);
    const double s = std::min((panel_w - 2.0 * pad) / range_x,
                              (panel_h - title_h - 2.0 * pad) / range_y);
    const double ox = pi * panel_w + pad;
    const double oy = title_h + pad;
    auto place = [&](Point p) {
      return Point{ox + (p.x - box.min_x) * s, oy + (p.y - box.min_y) * s};
    };

    out += "<text x=\"" + fmt12(pi * panel_w + pad) +
           "\" y=\"16\" font-family=\"monospace\" font-size=\"13\">" +
           panel.title + "</text>\n";

    std::vector<Point> run;
    auto flush = [&](const char* color, const char* width) {
      detail::svg_polyline(out, run, color, width);
      run.clear();
    };
    for (int iy = 0; iy < m.ny; ++iy) {
      for (int ix = 0; ix < m.nx; ++ix) {
        const int i = m.node(ix, iy);
        if (m.node_valid[i])
          run.push_back(place(m.dst[i]));
        else
          flush("#444444", "1");
      }
      flush("#444444", "1");
    }
    for (int ix = 0; ix < m.nx; ++ix) {
      for (int iy = 0; iy < m.ny; ++iy) {
        const int i = m.node(ix, iy);
        if (m.node_valid[i])
          run.push_back(place(m.dst[i]));
        else
          flush("#444444", "1");
      }
      flush("#444444", "1");
    }

    run = panel.horizon;
    for (Point& p : run) p = place(p);
    flush("#d62728", "1.5");
    run = panel.partition;
    for (Point& p : run) p = place(p);
    flush("#1f6feb", "1.5");

    if (!panel.horizon_note.empty())
      out += "<text x=\"" + fmt12(pi * panel_w + pad) + "\" y=\"" +
             fmt12(panel_h - 18.0) +
             "\" font-family=\"monospace\" font-size=\"11\" fill=\"#d62728\">" +
             panel.horizon_note + "</text>\n";
    if (!panel.partition_note.empty())
      out += "<text x=\"" + fmt12(pi * panel_w + pad) + "\" y=\"" +
             fmt12(panel_h - 6.0) +
             "\" font-family=\"monospace\" font-size=\"11\" fill=\"#1f6feb\">" +
             panel.partition_note + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

inline std::string mesh_json(const WarpedMesh& m) {
  nlohmann::json j;
  j["nx"] = m.nx;
  j["ny"] = m.ny;
  nlohmann::json nodes = nlohmann::json::array();
  for (size_t i = 0; i < m.src.size(); ++i) {
    nlohmann::json n;
    n["src"] = {m.src[i].x, m.src[i].y};
    if (m.node_valid[i])
      n["dst"] = {m.dst[i].x, m.dst[i].y};
    else
      n["dst"] = nullptr;
    nodes.push_back(std::move(n));
  }
  j["nodes"] = std::move(nodes);
  return j.dump();
}

/// f0 and f† along the horizon row; fq falls back to f0 when no quasi warp
/// exists (affine base), which is exactly the h7 = 0 behaviour.
struct ScaleProfileData {
  double y_row = 0.0;
  double x_star = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> xs;
  std::vector<double> f0;
  std::vector<double> fq;
};

inline ScaleProfileData sample_scale(const Homography& H,
                                     const QuasiHomography* Q, double x0,
                                     double x1, int n,
                                     std::optional<double> y_row = {}) {
  if (n < 2) fail(ErrorCode::InvalidArgument, "scale profile needs >= 2 samples");
  ScaleProfileData d;
  if (Q) {
    d.y_row = Q->y_star;
    d.x_star = Q->x_star;
  } else if (y_row) {
    d.y_row = *y_row;
  } else {
    try {
      d.y_row = horizon_row(H);
    } catch (const Error&) {
      d.y_row = 0.0;
    }
  }
  d.xs.resize(static_cast<size_t>(n) + 1);
  d.f0.resize(d.xs.size());
  d.fq.resize(d.xs.size());
  for (int i = 0; i <= n; ++i) {
    const double x = x0 + (x1 - x0) * i / n;
    d.xs[i] = x;
    auto p = try_apply(H, Point{x, d.y_row});
    d.f0[i] = p ? p->x : std::numeric_limits<double>::quiet_NaN();
    if (Q && x > Q->x_star)
      d.fq[i] = linear_scale(*Q, x);
    else
      d.fq[i] = d.f0[i];
  }
  return d;
}

inline std::string scale_csv(const ScaleProfileData& d) {
  std::string out = "x,f0,fq\n";
  for (size_t i = 0; i < d.xs.size(); ++i) {
    out += fmt12(d.xs[i]);
    out += ',';
    out += fmt12(d.f0[i]);
    out += ',';
    out += fmt12(d.fq[i]);
    out += '\n';
  }
  return out;
}

inline std::string scale_svg(const ScaleProfileData& d, int w = 640, int h = 440) {
  const int pad = 48;
  detail::PanelBox box;
  for (size_t i = 0; i < d.xs.size(); ++i) {
    box.add({d.xs[i], d.f0[i]});
    box.add({d.xs[i], d.fq[i]});
  }
  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         std::to_string(w) + "\" height=\"" + std::to_string(h) +
         "\" viewBox=\"0 0 " + std::to_string(w) + " " + std::to_string(h) +
         "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!box.empty()) {
    const double range_x = std::max(box.max_x - box.min_x, 1e-9);
    const double range_y = std::max(box.max_y - box.min_y, 1e-9);
    const double sx = (w - 2.0 * pad) / range_x;
    const double sy = (h - 2.0 * pad) / range_y;
    // value axis points up
    auto place = [&](double x, double v) {
      return Point{pad + (x - box.min_x) * sx, h - pad - (v - box.min_y) * sy};
    };
    out += "<rect x=\"" + fmt12(static_cast<double>(pad)) + "\" y=\"" +
           fmt12(static_cast<double>(pad)) + "\" width=\"" +
           fmt12(w - 2.0 * pad) + "\" height=\"" + fmt12(h - 2.0 * pad) +
           "\" fill=\"none\" stroke=\"#cccccc\" stroke-width=\"1\"/>\n";
    if (std::isfinite(d.x_star) && d.x_star >= box.min_x && d.x_star <= box.max_x) {
      const Point top = place(d.x_star, box.max_y);
      const Point bot = place(d.x_star, box.min_y);
      out += "<line x1=\"" + fmt12(top.x) + "\" y1=\"" + fmt12(top.y) +
             "\" x2=\"" + fmt12(bot.x) + "\" y2=\"" + fmt12(bot.y) +
             "\" stroke=\"#1f6feb\" stroke-width=\"1\" stroke-dasharray=\"4 3\"/>\n";
      out += "<text x=\"" + fmt12(top.x + 4.0) + "\" y=\"" + fmt12(pad + 14.0) +
             "\" font-family=\"monospace\" font-size=\"11\" fill=\"#1f6feb\">x* = " +
             fmt12(d.x_star) + "</text>\n";
    }
    auto curve = [&](const std::vector<double>& f, const char* color,
                     const char* width) {
      std::vector<Point> run;
      for (size_t i = 0; i < d.xs.size(); ++i) {
        if (std::isfinite(f[i])) {
          run.push_back(place(d.xs[i], f[i]));
        } else {
          detail::svg_polyline(out, run, color, width);
          run.clear();
        }
      }
      detail::svg_polyline(out, run, color, width);
    };
    curve(d.f0, "#888888", "1.5");
    curve(d.fq, "#1a7f37", "1.5");
    out += "<text x=\"" + fmt12(static_cast<double>(pad)) + "\" y=\"16\" "
           "font-family=\"monospace\" font-size=\"12\" fill=\"#888888\">f0(x, "
           "y*), y* = " + fmt12(d.y_row) + "</text>\n";
    out += "<text x=\"" + fmt12(w / 2.0) + "\" y=\"16\" "
           "font-family=\"monospace\" font-size=\"12\" "
           "fill=\"#1a7f37\">fq(x, y*)</text>\n";
  }
  out += "</svg>\n";
  return out;
}

/// Projective distortion shows up as curvature of the scale function, the
/// perspective kind as bent images of axis-aligned lines; folds count
/// orientation flips of mesh cells.
struct WarpMetrics {
  double scale_nonlinearity = 0.0;
  double slope_deviation = 0.0;
  int fold_count = 0;
};

struct GridSpec {
  double x0 = 0.0, x1 = 1.0;
  double y0 = 0.0, y1 = 1.0;
  int nx = 21, ny = 21;
};

namespace detail {

inline double collinearity_residual(Point a, Point b, Point c) {
  const double ux = b.x - a.x, uy = b.y - a.y;
  const double vx = c.x - a.x, vy = c.y - a.y;
  const double nu = std::hypot(ux, uy), nv = std::hypot(vx, vy);
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return std::abs(ux * vy - uy * vx) / (nu * nv);
}

}  // namespace detail

inline WarpMetrics compute_metrics(const WarpStage& stage, const GridSpec& g) {
  WarpMetrics m;
  const bool is_quasi = std::holds_alternative<QuasiHomography>(stage);
  const QuasiHomography* Q =
      is_quasi ? &std::get<QuasiHomography>(stage) : nullptr;
  const Homography& H =
      is_quasi ? Q->base : std::get<HomographyStage>(stage).h;

  WarpedMesh mesh = sample_mesh(
      [&stage](Point p) { return stage_forward(stage, p); }, g.x0, g.x1, g.y0,
      g.y1, g.nx, g.ny);
  m.fold_count = fold_count(mesh);

  // straightness of mapped horizontal and vertical sample triples; triples
  // straddling the partition are skipped because the joint is a corner by
  // construction for rows other than y*
  auto same_side = [&](double xa, double xb, double xc) {
    if (!is_quasi) return true;
    const double xs = Q->x_star;
    return (xa <= xs && xb <= xs && xc <= xs) ||
           (xa > xs && xb > xs && xc > xs);
  };
  for (int iy = 0; iy < g.ny; ++iy)
    for (int ix = 0; ix + 2 < g.nx; ++ix) {
      const int i0 = mesh.node(ix, iy), i1 = mesh.node(ix + 1, iy),
                i2 = mesh.node(ix + 2, iy);
      if (!(mesh.node_valid[i0] && mesh.node_valid[i1] && mesh.node_valid[i2]))
        continue;
      if (!same_side(mesh.src[i0].x, mesh.src[i1].x, mesh.src[i2].x)) continue;
      m.slope_deviation =
          std::max(m.slope_deviation, detail::collinearity_residual(
                                          mesh.dst[i0], mesh.dst[i1], mesh.dst[i2]));
    }
  for (int ix = 0; ix < g.nx; ++ix)
    for (int iy = 0; iy + 2 < g.ny; ++iy) {
      const int i0 = mesh.node(ix, iy), i1 = mesh.node(ix, iy + 1),
                i2 = mesh.node(ix, iy + 2);
      if (!(mesh.node_valid[i0] && mesh.node_valid[i1] && mesh.node_valid[i2]))
        continue;
      m.slope_deviation =
          std::max(m.slope_deviation, detail::collinearity_residual(
                                          mesh.dst[i0], mesh.dst[i1], mesh.dst[i2]));
    }

  // second differences of the scale function along the horizon row; for the
  // quasi warp only the linearized side counts
  double y_row;
  if (Q) {
    y_row = Q->y_star;
  } else {
    try {
      y_row = horizon_row(H);
    } catch (const Error&) {
      y_row = g.y0;
    }
  }
  std::vector<double> f(static_cast<size_t>(g.nx));
  std::vector<double> xs(static_cast<size_t>(g.nx));
  for (int i = 0; i < g.nx; ++i) {
    xs[i] = g.x0 + (g.x1 - g.x0) * i / (g.nx - 1);
    if (Q) {
      f[i] = xs[i] > Q->x_star ? linear_scale(*Q, xs[i])
                               : apply(H, Point{xs[i], y_row}).x;
    } else {
      auto p = try_apply(H, Point{xs[i], y_row});
      f[i] = p ? p->x : std::numeric_limits<double>::quiet_NaN();
    }
  }
  for (int i = 1; i + 1 < g.nx; ++i) {
    if (Q && !(xs[i - 1] > Q->x_star)) continue;
    const double d2 = f[i + 1] - 2.0 * f[i] + f[i - 1];
    if (std::isfinite(d2))
      m.scale_nonlinearity = std::max(m.scale_nonlinearity, std::abs(d2));
  }
  return m;
}

}  // namespace quasiwarp
