#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "quasiwarp/diagnostics.hpp"
#include "quasiwarp/io.hpp"
#include "quasiwarp/mesh.hpp"
#include "quasiwarp/pipeline.hpp"
#include "quasiwarp/raster_io.hpp"

namespace qw = quasiwarp;
using nlohmann::json;

namespace {

void write_text(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) qw::fail(qw::ErrorCode::IoError, "cannot open " + path + " for writing");
  out << body;
  if (!out) qw::fail(qw::ErrorCode::IoError, "short write to " + path);
}

std::string stem_of(const std::string& path) {
  const auto dot = path.find_last_of('.');
  const auto slash = path.find_last_of('/');
  if (dot == std::string::npos ||
      (slash != std::string::npos && dot < slash))
    return path;
  return path.substr(0, dot);
}

json h_to_json(const qw::Homography& h) {
  json a = json::array();
  for (double v : h.matrix()) a.push_back(v);
  return a;
}

/// Algorithm parameters shared by the stitching commands. A JSON config file
/// may supply any of them; explicit flags win, unknown keys are rejected, and
/// the effective values are echoed into the report.
struct AlgoOpts {
  std::string mode = "quasi";
  bool rectify = false;
  bool refine_partition = false;
  bool no_fallback = false;
  int feather_px = 0;
  int canvas_cap = 20000;
  double inlier_threshold_px = 3.0;
  int max_iterations = 2000;
  double confidence = 0.995;
  std::uint64_t seed = 0;
  std::string config_path;

  std::map<std::string, CLI::Option*> opts;

  void attach(CLI::App* cmd) {
    opts["mode"] = cmd->add_option("--mode", mode, "warp mode: quasi or homography")
                       ->check(CLI::IsMember({"quasi", "homography"}))
                       ->capture_default_str();
    opts["rectify"] = cmd->add_flag("--rectify", rectify,
                                    "constrain the estimate so the target's outer "
                                    "vertical boundary stays vertical");
    opts["refine_partition"] =
        cmd->add_flag("--refine-partition", refine_partition,
                      "move the partition line next to a provisional seam");
    opts["fallback_to_homography"] =
        cmd->add_flag("--no-fallback", no_fallback,
                      "fail instead of falling back to a plain homography "
                      "when the quasi warp cannot be built");
    opts["feather_px"] = cmd->add_option("--feather", feather_px,
                                         "feather radius across the seam, in px")
                             ->check(CLI::NonNegativeNumber)
                             ->capture_default_str();
    opts["canvas_cap"] = cmd->add_option("--canvas-cap", canvas_cap,
                                         "maximum canvas side length")
                             ->check(CLI::PositiveNumber)
                             ->capture_default_str();
    opts["inlier_threshold_px"] =
        cmd->add_option("--threshold", inlier_threshold_px,
                        "RANSAC inlier threshold in px")
            ->capture_default_str();
    opts["max_iterations"] =
        cmd->add_option("--max-iters", max_iterations, "RANSAC iteration cap")
            ->capture_default_str();
    opts["confidence"] =
        cmd->add_option("--confidence", confidence, "RANSAC confidence")
            ->capture_default_str();
    opts["seed"] =
        cmd->add_option("--seed", seed, "RANSAC seed")->capture_default_str();
    cmd->add_option("--config", config_path,
                    "JSON file with any of the parameter keys; explicit flags "
                    "take precedence");
  }

  void load_config() {
    if (config_path.empty()) return;
    std::ifstream in(config_path);
    if (!in) qw::fail(qw::ErrorCode::IoError, "cannot open " + config_path);
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      qw::fail(qw::ErrorCode::IoError, config_path + ": " + e.what());
    }
    if (!j.is_object())
      qw::fail(qw::ErrorCode::InvalidArgument,
               config_path + ": config must be a JSON object");
    try {
      for (const auto& [key, value] : j.items()) {
        const auto it = opts.find(key);
        if (it == opts.end())
          qw::fail(qw::ErrorCode::InvalidArgument,
                   config_path + ": unknown config key \"" + key + "\"");
        if (it->second->count() > 0) continue;
        if (key == "mode") {
          mode = value.get<std::string>();
          if (mode != "quasi" && mode != "homography")
            qw::fail(qw::ErrorCode::InvalidArgument,
                     config_path + ": mode must be quasi or homography");
        } else if (key == "rectify") {
          rectify = value.get<bool>();
        } else if (key == "refine_partition") {
          refine_partition = value.get<bool>();
        } else if (key == "fallback_to_homography") {
          no_fallback = !value.get<bool>();
        } else if (key == "feather_px") {
          feather_px = value.get<int>();
        } else if (key == "canvas_cap") {
          canvas_cap = value.get<int>();
        } else if (key == "inlier_threshold_px") {
          inlier_threshold_px = value.get<double>();
        } else if (key == "max_iterations") {
          max_iterations = value.get<int>();
        } else if (key == "confidence") {
          confidence = value.get<double>();
        } else if (key == "seed") {
          seed = value.get<std::uint64_t>();
        }
      }
    } catch (const json::exception& e) {
      qw::fail(qw::ErrorCode::InvalidArgument, config_path + ": " + e.what());
    }
  }

  qw::StitchOptions to_options() const {
    qw::StitchOptions o;
    o.mode = mode == "quasi" ? qw::WarpMode::Quasi : qw::WarpMode::Homography;
    o.rectify = rectify;
    o.refine_partition = refine_partition;
    o.fallback_to_homography = !no_fallback;
    o.feather_px = feather_px;
    o.canvas_cap = canvas_cap;
    o.ransac.inlier_threshold_px = inlier_threshold_px;
    o.ransac.max_iterations = max_iterations;
    o.ransac.confidence = confidence;
    o.ransac.seed = seed;
    return o;
  }

  json echo() const {
    return {{"mode", mode},
            {"rectify", rectify},
            {"refine_partition", refine_partition},
            {"fallback_to_homography", !no_fallback},
            {"feather_px", feather_px},
            {"canvas_cap", canvas_cap},
            {"inlier_threshold_px", inlier_threshold_px},
            {"max_iterations", max_iterations},
            {"confidence", confidence},
            {"seed", seed}};
  }
};

struct CorrsInput {
  std::string jsonl, csv_src, csv_dst;
  bool detect = false;

  void attach(CLI::App* cmd, bool allow_detect) {
    cmd->add_option("--corrs", jsonl, "correspondences, one JSON object per line");
    cmd->add_option("--corrs-src", csv_src, "source points CSV (x,y per line)");
    cmd->add_option("--corrs-dst", csv_dst, "dest points CSV, row-aligned");
    if (allow_detect)
      cmd->add_flag("--detect", detect, "detect and match features internally");
  }

  qw::CorrespondenceSet load() const {
    if (!jsonl.empty()) return qw::read_correspondences_jsonl(jsonl);
    if (!csv_src.empty() || !csv_dst.empty()) {
      if (csv_src.empty() || csv_dst.empty())
        qw::fail(qw::ErrorCode::InvalidArgument,
                 "--corrs-src and --corrs-dst must be given together");
      return qw::read_correspondences_csv(csv_src, csv_dst);
    }
    if (detect) return {};
    qw::fail(qw::ErrorCode::InvalidArgument,
             "no correspondences given; pass --corrs, --corrs-src/--corrs-dst, "
             "or --detect");
  }
};

json canvas_json(const qw::CanvasFrame& f) {
  return {{"origin_x", f.origin_x},
          {"origin_y", f.origin_y},
          {"width", f.width},
          {"height", f.height}};
}

void write_mosaic_artifacts(const std::string& out_png,
                            const qw::Mosaic& mosaic, const json& report,
                            std::string out_labels, std::string out_seam,
                            std::string out_report) {
  const std::string base = stem_of(out_png);
  if (out_labels.empty()) out_labels = base + "_labels.png";
  if (out_seam.empty()) out_seam = base + "_seam.json";
  if (out_report.empty()) out_report = base + "_report.json";
  qw::write_image(out_png, mosaic.canvas);
  qw::write_image(out_labels,
                  qw::labels_to_raster(mosaic.labels, mosaic.canvas.width,
                                       mosaic.canvas.height));
  qw::write_seam_json(out_seam, mosaic.seam);
  write_text(out_report, report.dump(2) + "\n");
}

struct GridFlags {
  double x0 = 0.0, x1 = 800.0, y0 = 0.0, y1 = 600.0;
  int nx = 11, ny = 11;

  void attach(CLI::App* cmd, int default_nodes) {
    nx = ny = default_nodes;
    cmd->add_option("--x0", x0, "grid left")->capture_default_str();
    cmd->add_option("--x1", x1, "grid right")->capture_default_str();
    cmd->add_option("--y0", y0, "grid top")->capture_default_str();
    cmd->add_option("--y1", y1, "grid bottom")->capture_default_str();
    cmd->add_option("--nx", nx, "nodes per row")->capture_default_str();
    cmd->add_option("--ny", ny, "nodes per column")->capture_default_str();
  }
};

int run_stitch(const std::string& target_path, const std::string& ref_path,
               const CorrsInput& corrs_in, const AlgoOpts& algo,
               const std::string& out, const std::string& out_labels,
               const std::string& out_seam, const std::string& out_report) {
  const qw::Raster target = qw::read_image(target_path);
  const qw::Raster reference = qw::read_image(ref_path);
  const qw::StitchResult res =
      qw::stitch_pair(target, reference, corrs_in.load(), algo.to_options());

  json rep;
  rep["command"] = "stitch";
  rep["config"] = algo.echo();
  rep["h"] = h_to_json(res.report.h);
  rep["mode"] = qw::warp_mode_name(res.report.mode_used);
  rep["fell_back"] = res.report.fell_back;
  rep["mirrored"] = res.report.mirrored;
  rep["partition_refined"] = res.report.partition_refined;
  rep["x_star"] = res.report.x_star;
  rep["y_star"] = res.report.y_star;
  rep["inlier_count"] = res.report.inlier_count;
  rep["overlap_count"] = res.report.overlap_count;
  rep["seam_cost"] = res.report.seam_cost;
  rep["canvas"] = canvas_json(res.frame);
  rep["timings_ms"] = {{"estimation", res.report.ms_estimation},
                       {"warp", res.report.ms_warp},
                       {"seam", res.report.ms_seam},
                       {"blend", res.report.ms_blend},
                       {"total", res.report.ms_total}};
  write_mosaic_artifacts(out, res.mosaic, rep, out_labels, out_seam, out_report);
  return 0;
}

int run_stitch_multi(const std::vector<std::string>& image_paths,
                     const std::vector<std::string>& corrs_paths, int ref_index,
                     const AlgoOpts& algo, const std::string& out,
                     const std::string& out_labels, const std::string& out_seam,
                     const std::string& out_report) {
  std::vector<qw::Raster> images;
  images.reserve(image_paths.size());
  for (const auto& p : image_paths) images.push_back(qw::read_image(p));
  const int n = static_cast<int>(images.size());
  if (n < 2)
    qw::fail(qw::ErrorCode::InvalidArgument, "need at least two --image inputs");

  std::vector<qw::CorrespondenceSet> pair_corrs(n - 1);
  if (!corrs_paths.empty()) {
    if (corrs_paths.size() != static_cast<size_t>(n) - 1)
      qw::fail(qw::ErrorCode::InvalidArgument,
               "need one --corrs per adjacent pair (" + std::to_string(n - 1) +
                   "), got " + std::to_string(corrs_paths.size()));
    for (size_t i = 0; i < corrs_paths.size(); ++i)
      pair_corrs[i] = qw::read_correspondences_jsonl(corrs_paths[i]);
  }
  if (ref_index < 0) ref_index = n / 2;

  const qw::SequenceResult res =
      qw::stitch_sequence(images, std::move(pair_corrs), ref_index,
                          algo.to_options());

  json rep;
  rep["command"] = "stitch-multi";
  rep["config"] = algo.echo();
  rep["ref_index"] = res.report.ref_index;
  json stages = json::array();
  for (const auto& s : res.report.stages) {
    stages.push_back({{"target_image", s.target_image},
                      {"onto_image", s.onto_image},
                      {"h", h_to_json(s.h)},
                      {"mirrored", s.mirrored},
                      {"mode", qw::warp_mode_name(s.mode_used)},
                      {"fell_back", s.fell_back},
                      {"x_star", s.x_star},
                      {"y_star", s.y_star},
                      {"inlier_count", s.inlier_count}});
  }
  rep["stages"] = std::move(stages);
  rep["junction_seam_costs"] = res.report.junction_seam_costs;
  rep["canvas"] = canvas_json(res.frame);
  rep["timings_ms"] = {{"total", res.report.ms_total}};
  write_mosaic_artifacts(out, res.mosaic, rep, out_labels, out_seam, out_report);
  return 0;
}

int run_estimate(const CorrsInput& corrs_in, const AlgoOpts& algo, bool rectify,
                 double width, double height, const std::string& out,
                 const std::string& out_report) {
  const qw::CorrespondenceSet corrs = corrs_in.load();
  const qw::RansacResult rr = qw::ransac(corrs, algo.to_options().ransac);
  qw::Homography H = rr.h;
  if (rectify) H = qw::rectified_fit(corrs, rr.inliers, width, height);
  qw::write_homography_file(out, H);
  if (!out_report.empty()) {
    double sq = 0.0;
    int count = 0;
    for (size_t i = 0; i < corrs.items.size(); ++i) {
      if (!rr.inliers[i]) continue;
      const auto q = qw::apply(H, corrs.items[i].source);
      const double d = qw::distance(q, corrs.items[i].dest);
      sq += d * d;
      ++count;
    }
    json rep;
    rep["command"] = "estimate";
    rep["config"] = algo.echo();
    rep["rectified"] = rectify;
    rep["h"] = h_to_json(H);
    rep["inlier_count"] = rr.inlier_count;
    rep["inlier_rms_px"] = count ? std::sqrt(sq / count) : 0.0;
    write_text(out_report, rep.dump(2) + "\n");
  }
  return 0;
}

int run_warp(const std::string& image_path, const std::string& h_path,
             const std::string& mode, double x_star, int canvas_cap,
             const std::string& out, const std::string& out_report) {
  const qw::Raster img = qw::read_image(image_path);
  const qw::Homography H = qw::read_homography_file(h_path);
  qw::WarpStage stage = qw::make_stage(H);
  if (mode == "quasi") stage = qw::build(H, x_star);

  const qw::CanvasFrame frame = qw::canvas_bounds(
      [&stage](qw::Point p) { return qw::stage_forward(stage, p); }, img.width,
      img.height, canvas_cap);
  const qw::Raster warped = qw::warp_image(
      [&stage](qw::Point p) { return qw::stage_backward(stage, p); }, img,
      frame);
  qw::write_image(out, warped);
  if (!out_report.empty()) {
    json rep;
    rep["command"] = "warp";
    rep["mode"] = mode;
    rep["h"] = h_to_json(H);
    if (mode == "quasi") {
      const auto& q = std::get<qw::QuasiHomography>(stage);
      rep["x_star"] = q.x_star;
      rep["y_star"] = q.y_star;
    }
    rep["canvas"] = canvas_json(frame);
    write_text(out_report, rep.dump(2) + "\n");
  }
  return 0;
}

int run_diagnose_mesh(const std::string& h_path, const std::string& mode,
                      double x_star, const GridFlags& grid,
                      const std::string& out_svg, const std::string& out_json) {
  const qw::Homography H = qw::read_homography_file(h_path);
  std::vector<qw::MeshPanel> panels;

  std::optional<double> y_star;
  try {
    y_star = qw::horizon_row(H);
  } catch (const qw::Error&) {
    // affine base: every row stays horizontal, nothing to mark
  }

  const int line_samples = 64;
  if (mode == "both" || mode == "homography") {
    qw::MeshPanel p;
    p.title = "homography";
    p.mesh = qw::mesh(H, grid.x0, grid.x1, grid.y0, grid.y1, grid.nx, grid.ny);
    auto fwd = [&H](qw::Point q) { return qw::try_apply(H, q); };
    if (y_star) {
      p.horizon = qw::sample_polyline(fwd, {grid.x0, *y_star},
                                      {grid.x1, *y_star}, line_samples);
      p.horizon_note = "y* = " + qw::fmt12(*y_star);
    }
    if (mode == "both") {
      p.partition = qw::sample_polyline(fwd, {x_star, grid.y0},
                                        {x_star, grid.y1}, line_samples);
      p.partition_note = "x* = " + qw::fmt12(x_star);
    }
    panels.push_back(std::move(p));
  }
  if (mode == "both" || mode == "quasi") {
    qw::QuasiHomography Q;
    try {
      Q = qw::build(H, x_star);
    } catch (const qw::Error& e) {
      if (e.code() == qw::ErrorCode::AffineDegenerate)
        qw::fail(e.code(), std::string(e.what()) +
                               "; an affine map has no horizon row to "
                               "linearize around, use --mode homography");
      throw;
    }
    qw::MeshPanel p;
    p.title = "quasi-homography";
    p.mesh = qw::mesh(Q, grid.x0, grid.x1, grid.y0, grid.y1, grid.nx, grid.ny);
    auto fwd = [&Q](qw::Point q) { return qw::try_forward(Q, q); };
    p.horizon = qw::sample_polyline(fwd, {grid.x0, Q.y_star},
                                    {grid.x1, Q.y_star}, line_samples);
    p.horizon_note = "y* = " + qw::fmt12(Q.y_star);
    p.partition = qw::sample_polyline(fwd, {Q.x_star, grid.y0},
                                      {Q.x_star, grid.y1}, line_samples);
    p.partition_note = "x* = " + qw::fmt12(Q.x_star);
    panels.push_back(std::move(p));
  }

  write_text(out_svg, qw::mesh_panels_svg(panels));
  if (!out_json.empty()) {
    json j;
    j["command"] = "diagnose-mesh";
    j["h"] = h_to_json(H);
    json arr = json::array();
    for (const auto& p : panels)
      arr.push_back({{"title", p.title},
                     {"mesh", json::parse(qw::mesh_json(p.mesh))}});
    j["panels"] = std::move(arr);
    write_text(out_json, j.dump() + "\n");
  }
  return 0;
}

int run_diagnose_scale(const std::string& h_path, double x_star, double x0,
                       double x1, int samples, const std::string& out_csv,
                       const std::string& out_svg) {
  const qw::Homography H = qw::read_homography_file(h_path);
  std::optional<qw::QuasiHomography> Q;
  try {
    Q = qw::build(H, x_star);
  } catch (const qw::Error& e) {
    if (e.code() != qw::ErrorCode::AffineDegenerate &&
        e.code() != qw::ErrorCode::DegeneratePoint &&
        e.code() != qw::ErrorCode::NonMonotoneScale)
      throw;
    std::cout << "note: quasi-homography is not defined for this map ("
              << qw::error_name(e.code())
              << "); emitting the homography profile for both curves\n";
  }

  qw::ScaleProfileData data;
  if (Q) {
    data = qw::sample_scale(H, &*Q, x0, x1, samples);
  } else {
    data = qw::sample_scale(H, nullptr, x0, x1, samples, 0.0);
  }
  write_text(out_csv, qw::scale_csv(data));
  if (!out_svg.empty()) write_text(out_svg, qw::scale_svg(data));
  return 0;
}

int run_metrics(const std::string& h_path, const std::string& mode,
                double x_star, const GridFlags& grid, const std::string& out) {
  const qw::Homography H = qw::read_homography_file(h_path);
  qw::WarpStage stage = qw::make_stage(H);
  if (mode == "quasi") stage = qw::build(H, x_star);
  qw::GridSpec spec;
  spec.x0 = grid.x0;
  spec.x1 = grid.x1;
  spec.y0 = grid.y0;
  spec.y1 = grid.y1;
  spec.nx = grid.nx;
  spec.ny = grid.ny;
  const qw::WarpMetrics m = qw::compute_metrics(stage, spec);
  json j = {{"scale_nonlinearity", m.scale_nonlinearity},
            {"slope_deviation", m.slope_deviation},
            {"fold_count", m.fold_count}};
  if (out.empty())
    std::cout << j.dump() << "\n";
  else
    write_text(out, j.dump() + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quasi-homography warping, stitching, and diagnostics"};
  app.require_subcommand(1);
  int rc = 0;

  // stitch
  auto* stitch = app.add_subcommand("stitch", "stitch a target onto a reference");
  std::string st_target, st_ref, st_out, st_labels, st_seam, st_report;
  CorrsInput st_corrs;
  AlgoOpts st_algo;
  stitch->add_option("--target", st_target, "target image")->required();
  stitch->add_option("--ref", st_ref, "reference image")->required();
  st_corrs.attach(stitch, true);
  stitch->add_option("--out", st_out, "mosaic PNG path")->required();
  stitch->add_option("--out-labels", st_labels, "label mask PNG path");
  stitch->add_option("--out-seam", st_seam, "seam polyline JSON path");
  stitch->add_option("--out-report", st_report, "stitch report JSON path");
  st_algo.attach(stitch);
  stitch->callback([&] {
    st_algo.load_config();
    rc = run_stitch(st_target, st_ref, st_corrs, st_algo, st_out, st_labels,
                    st_seam, st_report);
  });

  // stitch-multi
  auto* multi = app.add_subcommand("stitch-multi",
                                   "stitch an ordered image sequence");
  std::vector<std::string> mu_images, mu_corrs;
  std::string mu_out, mu_labels, mu_seam, mu_report;
  int mu_ref = -1;
  AlgoOpts mu_algo;
  multi->add_option("--image", mu_images,
                    "images left to right; repeat per image")
      ->required();
  multi->add_option("--corrs", mu_corrs,
                    "JSONL correspondences per adjacent pair, source points "
                    "in the left image; repeat per pair or omit to detect");
  multi->add_option("--ref-index", mu_ref,
                    "reference image index; defaults to the middle");
  multi->add_option("--out", mu_out, "mosaic PNG path")->required();
  multi->add_option("--out-labels", mu_labels, "label mask PNG path");
  multi->add_option("--out-seam", mu_seam, "seam polyline JSON path");
  multi->add_option("--out-report", mu_report, "stitch report JSON path");
  mu_algo.attach(multi);
  multi->callback([&] {
    mu_algo.load_config();
    rc = run_stitch_multi(mu_images, mu_corrs, mu_ref, mu_algo, mu_out,
                          mu_labels, mu_seam, mu_report);
  });

  // estimate
  auto* est = app.add_subcommand("estimate",
                                 "estimate a homography from correspondences");
  CorrsInput es_corrs;
  AlgoOpts es_algo;
  double es_w = 0.0, es_h = 0.0;
  std::string es_out, es_report;
  es_corrs.attach(est, false);
  est->add_option("--width", es_w,
                  "x of the outer vertical boundary (with --rectify)");
  est->add_option("--height", es_h, "y extent of that boundary (with --rectify)");
  est->add_option("--out", es_out, "homography text file")->required();
  est->add_option("--out-report", es_report, "estimation report JSON path");
  es_algo.attach(est);
  est->callback([&] {
    es_algo.load_config();
    if (es_algo.rectify && (es_w <= 0.0 || es_h <= 0.0))
      qw::fail(qw::ErrorCode::InvalidArgument,
               "--rectify needs positive --width and --height");
    rc = run_estimate(es_corrs, es_algo, es_algo.rectify, es_w, es_h, es_out,
                      es_report);
  });

  // warp
  auto* warp = app.add_subcommand("warp", "warp a single image");
  std::string wa_image, wa_h, wa_mode = "quasi", wa_out, wa_report;
  double wa_xstar = 0.0;
  int wa_cap = 20000;
  warp->add_option("--image", wa_image, "input image")->required();
  warp->add_option("--hmat", wa_h, "homography text file")->required();
  warp->add_option("--mode", wa_mode, "quasi or homography")
      ->check(CLI::IsMember({"quasi", "homography"}))
      ->capture_default_str();
  auto* wa_xs_opt = warp->add_option("--x-star", wa_xstar,
                                     "partition abscissa (quasi mode)");
  warp->add_option("--canvas-cap", wa_cap, "maximum canvas side length")
      ->capture_default_str();
  warp->add_option("--out", wa_out, "warped PNG path")->required();
  warp->add_option("--out-report", wa_report, "canvas report JSON path");
  warp->callback([&] {
    if (wa_mode == "quasi" && wa_xs_opt->count() == 0)
      qw::fail(qw::ErrorCode::InvalidArgument, "quasi mode needs --x-star");
    rc = run_warp(wa_image, wa_h, wa_mode, wa_xstar, wa_cap, wa_out, wa_report);
  });

  // diagnose-mesh
  auto* dmesh = app.add_subcommand("diagnose-mesh",
                                   "emit warped-grid SVG panels");
  std::string dm_h, dm_mode = "both", dm_svg, dm_json;
  double dm_xstar = 0.0;
  GridFlags dm_grid;
  dmesh->add_option("--hmat", dm_h, "homography text file")->required();
  dmesh->add_option("--mode", dm_mode, "both, quasi, or homography")
      ->check(CLI::IsMember({"both", "quasi", "homography"}))
      ->capture_default_str();
  auto* dm_xs_opt =
      dmesh->add_option("--x-star", dm_xstar, "partition abscissa");
  dm_grid.attach(dmesh, 11);
  dmesh->add_option("--out-svg", dm_svg, "SVG path")->required();
  dmesh->add_option("--out-json", dm_json, "mesh node JSON path");
  dmesh->callback([&] {
    if (dm_mode != "homography" && dm_xs_opt->count() == 0)
      qw::fail(qw::ErrorCode::InvalidArgument,
               "quasi panels need --x-star");
    rc = run_diagnose_mesh(dm_h, dm_mode, dm_xstar, dm_grid, dm_svg, dm_json);
  });

  // diagnose-scale
  auto* dscale = app.add_subcommand(
      "diagnose-scale", "emit the scale profile along the horizon row");
  std::string ds_h, ds_csv, ds_svg;
  double ds_xstar = 0.0, ds_x0 = 0.0, ds_x1 = 800.0;
  int ds_samples = 200;
  dscale->add_option("--hmat", ds_h, "homography text file")->required();
  dscale->add_option("--x-star", ds_xstar, "partition abscissa")->required();
  dscale->add_option("--x0", ds_x0, "range start")->capture_default_str();
  dscale->add_option("--x1", ds_x1, "range end")->capture_default_str();
  dscale->add_option("--samples", ds_samples, "sample count")
      ->capture_default_str();
  dscale->add_option("--out-csv", ds_csv, "CSV path")->required();
  dscale->add_option("--out-svg", ds_svg, "SVG plot path");
  dscale->callback([&] {
    rc = run_diagnose_scale(ds_h, ds_xstar, ds_x0, ds_x1, ds_samples, ds_csv,
                            ds_svg);
  });

  // metrics
  auto* met = app.add_subcommand("metrics", "distortion metrics for a warp");
  std::string me_h, me_mode = "quasi", me_out;
  double me_xstar = 0.0;
  GridFlags me_grid;
  met->add_option("--hmat", me_h, "homography text file")->required();
  met->add_option("--mode", me_mode, "quasi or homography")
      ->check(CLI::IsMember({"quasi", "homography"}))
      ->capture_default_str();
  auto* me_xs_opt = met->add_option("--x-star", me_xstar, "partition abscissa");
  me_grid.attach(met, 21);
  met->add_option("--out", me_out, "JSON path; stdout when omitted");
  met->callback([&] {
    if (me_mode == "quasi" && me_xs_opt->count() == 0)
      qw::fail(qw::ErrorCode::InvalidArgument, "quasi mode needs --x-star");
    rc = run_metrics(me_h, me_mode, me_xstar, me_grid, me_out);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    json err = {{"error", "InvalidArgument"},
                {"category", "input"},
                {"message", e.what()}};
    std::cerr << err.dump() << "\n";
    return 2;
  } catch (const qw::Error& e) {
    json err = {{"error", qw::error_name(e.code())},
                {"category", qw::category_name(e.category())},
                {"message", e.what()}};
    std::cerr << err.dump() << "\n";
    return qw::exit_code(e.category());
  } catch (const std::exception& e) {
    json err = {{"error", "Internal"},
                {"category", "internal"},
                {"message", e.what()}};
    std::cerr << err.dump() << "\n";
    return 4;
  }
  return rc;
}
