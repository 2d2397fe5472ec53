#pragma once

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "quasiwarp/estimation.hpp"
#include "quasiwarp/geometry.hpp"

namespace quasiwarp {

inline Homography read_homography_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_homography(buf.str());
}

inline void write_homography_file(const std::string& path, const Homography& h) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot open " + path + " for writing");
  out << format_homography(h) << '\n';
  if (!out) fail(ErrorCode::IoError, "short write to " + path);
}

/// One JSON object per line: {"sx":..,"sy":..,"dx":..,"dy":..,"w":..}.
/// "w" is optional (default 1). An optional leading {"direction":...} line
/// declares which way the pairs run; "reference_to_target" swaps them so the
/// returned set always maps source=target image, dest=reference image.
inline CorrespondenceSet read_correspondences_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path);
  CorrespondenceSet set;
  bool swap = false;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::IoError,
           path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (j.contains("direction")) {
      const std::string dir = j["direction"].get<std::string>();
      if (dir == "reference_to_target")
        swap = true;
      else if (dir != "target_to_reference")
        fail(ErrorCode::InvalidArgument,
             path + ":" + std::to_string(lineno) + ": unknown direction \"" + dir + "\"");
      continue;
    }
    if (!j.contains("sx") || !j.contains("sy") || !j.contains("dx") || !j.contains("dy"))
      fail(ErrorCode::InvalidArgument,
           path + ":" + std::to_string(lineno) + ": need sx, sy, dx, dy");
    Correspondence c;
    c.source = Point{j["sx"].get<double>(), j["sy"].get<double>()};
    c.dest = Point{j["dx"].get<double>(), j["dy"].get<double>()};
    c.weight = j.value("w", 1.0);
    if (!(c.weight > 0))
      fail(ErrorCode::InvalidArgument,
           path + ":" + std::to_string(lineno) + ": weight must be positive");
    if (swap) std::swap(c.source, c.dest);
    set.items.push_back(c);
  }
  return set;
}

inline void write_correspondences_jsonl(const std::string& path,
                                        const CorrespondenceSet& set) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot open " + path + " for writing");
  for (const auto& c : set.items) {
    nlohmann::json j;
    j["sx"] = c.source.x;
    j["sy"] = c.source.y;
    j["dx"] = c.dest.x;
    j["dy"] = c.dest.y;
    j["w"] = c.weight;
    out << j.dump() << '\n';
  }
  if (!out) fail(ErrorCode::IoError, "short write to " + path);
}

namespace detail {

inline std::vector<Point> read_point_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path);
  std::vector<Point> pts;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r,") == std::string::npos) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    Point p;
    std::string rest;
    if (!(row >> p.x >> p.y) || (row >> rest))
      fail(ErrorCode::InvalidArgument,
           path + ":" + std::to_string(lineno) + ": expected \"x,y\"");
    pts.push_back(p);
  }
  return pts;
}

}  // namespace detail

/// Row-aligned pair of CSV files, one "x,y" per line.
inline CorrespondenceSet read_correspondences_csv(const std::string& src_path,
                                                  const std::string& dst_path) {
  const std::vector<Point> src = detail::read_point_csv(src_path);
  const std::vector<Point> dst = detail::read_point_csv(dst_path);
  if (src.size() != dst.size())
    fail(ErrorCode::InvalidArgument,
         src_path + " and " + dst_path + " differ in row count (" +
             std::to_string(src.size()) + " vs " + std::to_string(dst.size()) + ")");
  CorrespondenceSet set;
  set.items.resize(src.size());
  for (size_t i = 0; i < src.size(); ++i)
    set.items[i] = Correspondence{src[i], dst[i], 1.0};
  return set;
}

inline void write_seam_json(const std::string& path,
                            const std::vector<std::array<int, 2>>& seam) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot open " + path + " for writing");
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& p : seam) arr.push_back({p[0], p[1]});
  out << arr.dump() << '\n';
  if (!out) fail(ErrorCode::IoError, "short write to " + path);
}

}  // namespace quasiwarp
