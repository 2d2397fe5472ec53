#include <quasiwarp/diagnostics.hpp>
#include <quasiwarp/io.hpp>
#include <quasiwarp/raster_io.hpp>

#include <catch2/catch_amalgamated.hpp>

#include "oracle.hpp"
#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using namespace quasiwarp;
using Catch::Matchers::ContainsSubstring;
using support::error_code_of;

namespace fs = std::filesystem;

namespace {

// the stored diagnostics reference warp
constexpr std::array<double, 9> kRefArr = {1.0,    0.2,    10.0, 0.05, 1.1,
                                           20.0,   5e-4,   2e-4, 1.0};

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / "quasiwarp_io_tests";
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

}  // namespace

TEST_CASE("homography text files round-trip exactly") {
  const fs::path dir = scratch_dir();
  const Homography h = from_matrix(kRefArr);
  write_homography_file((dir / "h.txt").string(), h);
  const Homography back = read_homography_file((dir / "h.txt").string());
  CHECK(back.h1 == h.h1);
  CHECK(back.h2 == h.h2);
  CHECK(back.h7 == h.h7);
  CHECK(back.h8 == h.h8);

  CHECK(error_code_of([] { return parse_homography("1 2 3"); }) ==
        ErrorCode::InvalidArgument);
  CHECK(error_code_of([] {
          return parse_homography("1 0 0 0 1 0 0 0 1 99");
        }) == ErrorCode::InvalidArgument);
  CHECK(error_code_of([] { return parse_homography("0 0 0 0 0 0 0 0 0"); }) ==
        ErrorCode::SingularHomography);
  CHECK(error_code_of([&] {
          return read_homography_file((dir / "missing.txt").string());
        }) == ErrorCode::IoError);
}

TEST_CASE("correspondence jsonl round-trips and honors the header") {
  const fs::path dir = scratch_dir();
  CorrespondenceSet set;
  set.items = {{{1.5, 2.0}, {3.25, 4.0}, 1.0}, {{5.0, 6.5}, {7.0, 8.75}, 2.0}};
  write_correspondences_jsonl((dir / "c.jsonl").string(), set);
  const CorrespondenceSet back =
      read_correspondences_jsonl((dir / "c.jsonl").string());
  REQUIRE(back.items.size() == 2);
  CHECK(back.items[0].source.x == 1.5);
  CHECK(back.items[0].dest.y == 4.0);
  CHECK(back.items[1].weight == 2.0);

  spit(dir / "swapped.jsonl",
       "{\"direction\":\"reference_to_target\"}\n"
       "{\"sx\":10,\"sy\":20,\"dx\":30,\"dy\":40}\n");
  const CorrespondenceSet sw =
      read_correspondences_jsonl((dir / "swapped.jsonl").string());
  REQUIRE(sw.items.size() == 1);
  CHECK(sw.items[0].source.x == 30.0);
  CHECK(sw.items[0].dest.x == 10.0);
  CHECK(sw.items[0].weight == 1.0);

  spit(dir / "dir.jsonl", "{\"direction\":\"sideways\"}\n");
  CHECK(error_code_of([&] {
          return read_correspondences_jsonl((dir / "dir.jsonl").string());
        }) == ErrorCode::InvalidArgument);

  spit(dir / "broken.jsonl",
       "{\"sx\":1,\"sy\":2,\"dx\":3,\"dy\":4}\nnot json\n");
  try {
    read_correspondences_jsonl((dir / "broken.jsonl").string());
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IoError);
    CHECK_THAT(e.what(), ContainsSubstring(":2:"));
  }

  spit(dir / "fields.jsonl", "{\"sx\":1,\"sy\":2,\"dx\":3}\n");
  CHECK(error_code_of([&] {
          return read_correspondences_jsonl((dir / "fields.jsonl").string());
        }) == ErrorCode::InvalidArgument);

  spit(dir / "weight.jsonl",
       "{\"sx\":1,\"sy\":2,\"dx\":3,\"dy\":4,\"w\":0}\n");
  CHECK(error_code_of([&] {
          return read_correspondences_jsonl((dir / "weight.jsonl").string());
        }) == ErrorCode::InvalidArgument);
}

TEST_CASE("correspondence csv pairs align by row") {
  const fs::path dir = scratch_dir();
  spit(dir / "src.csv", "1,2\n3, 4\n\n5,6\n");
  spit(dir / "dst.csv", "10,20\n30,40\n50,60\n");
  const CorrespondenceSet set = read_correspondences_csv(
      (dir / "src.csv").string(), (dir / "dst.csv").string());
  REQUIRE(set.items.size() == 3);
  CHECK(set.items[1].source.x == 3.0);
  CHECK(set.items[1].dest.y == 40.0);

  spit(dir / "short.csv", "1,2\n");
  CHECK(error_code_of([&] {
          return read_correspondences_csv((dir / "short.csv").string(),
                                          (dir / "dst.csv").string());
        }) == ErrorCode::InvalidArgument);

  spit(dir / "bad.csv", "1,2,3\n");
  CHECK(error_code_of([&] {
          return read_correspondences_csv((dir / "bad.csv").string(),
                                          (dir / "bad.csv").string());
        }) == ErrorCode::InvalidArgument);

  CHECK(error_code_of([&] {
          return read_correspondences_csv((dir / "absent.csv").string(),
                                          (dir / "dst.csv").string());
        }) == ErrorCode::IoError);
}

TEST_CASE("png and ppm round-trips preserve 8-bit data") {
  const fs::path dir = scratch_dir();
  Raster img = Raster::make(17, 9, 3);
  for (int y = 0; y < 9; ++y)
    for (int x = 0; x < 17; ++x)
      for (int c = 0; c < 3; ++c)
        img.at(x, y, c) = static_cast<float>((x * 13 + y * 7 + c * 37) % 256) / 255.0f;
  img.valid[img.index(4, 4)] = 0;

  for (const char* name : {"img.png", "img.ppm"}) {
    write_image((dir / name).string(), img);
    const Raster back = read_image((dir / name).string());
    REQUIRE(back.width == 17);
    REQUIRE(back.height == 9);
    REQUIRE(back.channels == 3);
    for (int y = 0; y < 9; ++y)
      for (int x = 0; x < 17; ++x)
        for (int c = 0; c < 3; ++c) {
          const float expect = img.is_valid(x, y) ? img.at(x, y, c) : 0.0f;
          CHECK(back.at(x, y, c) == expect);
        }
  }

  Raster gray = Raster::make(5, 4, 1);
  for (size_t i = 0; i < gray.data.size(); ++i)
    gray.data[i] = static_cast<float>(i % 256) / 255.0f;
  write_image((dir / "g.pgm").string(), gray);
  const Raster gback = read_image((dir / "g.pgm").string());
  REQUIRE(gback.channels == 1);
  CHECK(gback.data == gray.data);
  write_image((dir / "g.png").string(), gray);
  CHECK(read_image((dir / "g.png").string()).data == gray.data);

  CHECK(error_code_of([&] { return read_image((dir / "img.bmp").string()); }) ==
        ErrorCode::InvalidArgument);
  CHECK(error_code_of([&] { return write_image((dir / "o.tif").string(), img); }) ==
        ErrorCode::InvalidArgument);
  spit(dir / "junk.ppm", "P9 no header");
  CHECK(error_code_of([&] { return read_ppm((dir / "junk.ppm").string()); }) ==
        ErrorCode::IoError);
}

TEST_CASE("labels_to_raster spreads labels over gray levels") {
  const std::vector<std::int16_t> labels = {-1, 0, 1, 2};
  const Raster img = labels_to_raster(labels, 2, 2);
  CHECK(img.at(0, 0, 0) == 0.0f);
  CHECK(img.at(1, 0, 0) == 1.0f / 3.0f);
  CHECK(img.at(0, 1, 0) == 2.0f / 3.0f);
  CHECK(img.at(1, 1, 0) == 1.0f);
}

TEST_CASE("seam json lists pixel pairs") {
  const fs::path dir = scratch_dir();
  write_seam_json((dir / "seam.json").string(), {{1, 2}, {3, 4}});
  CHECK(slurp(dir / "seam.json") == "[[1,2],[3,4]]\n");
}

TEST_CASE("fmt12 is stable") {
  CHECK(fmt12(0.1) == "0.1");
  CHECK(fmt12(1.0 / 3.0) == "0.333333333333");
  CHECK(fmt12(2.5e-7) == "2.5e-07");
  CHECK(fmt12(-400.0) == "-400");
}

TEST_CASE("sample_polyline follows the map and drops undefined points") {
  const auto half = [](Point p) -> std::optional<Point> {
    if (p.x > 5.0) return std::nullopt;
    return Point{p.x * 2.0, p.y};
  };
  const auto pts = sample_polyline(half, {0.0, 1.0}, {10.0, 1.0}, 10);
  REQUIRE(pts.size() == 6);
  CHECK(pts.front().x == 0.0);
  CHECK(pts.back().x == 10.0);
  CHECK(pts.back().y == 1.0);
}

TEST_CASE("mesh sampling marks undefined nodes and counts folds") {
  const WarpedMesh plain = mesh(Homography::identity(), 0.0, 4.0, 0.0, 2.0, 5, 3);
  CHECK(plain.nx == 5);
  CHECK(plain.ny == 3);
  for (auto v : plain.node_valid) CHECK(v == 1);
  for (auto s : plain.cell_sign) CHECK(s == 1);
  CHECK(fold_count(plain) == 0);

  const WarpedMesh flipped =
      mesh(mirror_homography(5), 0.0, 4.0, 0.0, 2.0, 5, 3);
  for (auto s : flipped.cell_sign) CHECK(s == -1);
  CHECK(fold_count(flipped) == 0);

  const auto vee = [](Point p) -> std::optional<Point> {
    return Point{std::abs(p.x), p.y};
  };
  const WarpedMesh folded = sample_mesh(vee, -2.0, 2.0, 0.0, 2.0, 5, 3);
  CHECK(fold_count(folded) == 4);

  const auto holed = [](Point p) -> std::optional<Point> {
    if (p.x == 0.0) return std::nullopt;
    return p;
  };
  const WarpedMesh gappy = sample_mesh(holed, -2.0, 2.0, 0.0, 2.0, 5, 3);
  CHECK_FALSE(gappy.node_valid[gappy.node(2, 1)]);
  CHECK(gappy.cell_sign[gappy.cell(1, 0)] == 0);
  CHECK(gappy.cell_sign[gappy.cell(2, 0)] == 0);
  CHECK(gappy.cell_sign[gappy.cell(0, 0)] == 1);

  CHECK(error_code_of([] {
          return sample_mesh([](Point p) { return std::optional<Point>(p); },
                             0.0, 1.0, 0.0, 1.0, 1, 3);
        }) == ErrorCode::InvalidArgument);
}

TEST_CASE("mesh panel svg output is deterministic and structured") {
  const Homography h = from_matrix(kRefArr);
  const QuasiHomography q = build(h, 400.0);

  MeshPanel panel;
  panel.title = "quasi";
  panel.mesh = mesh(q, 0.0, 800.0, 0.0, 600.0, 9, 7);
  panel.horizon = sample_polyline(
      [&q](Point p) { return try_forward(q, p); }, {0.0, q.y_star},
      {800.0, q.y_star}, 32);
  panel.partition = sample_polyline(
      [&q](Point p) { return try_forward(q, p); }, {q.x_star, 0.0},
      {q.x_star, 600.0}, 32);
  panel.horizon_note = "y* = " + fmt12(q.y_star);
  panel.partition_note = "x* = " + fmt12(q.x_star);

  const std::string svg = mesh_panels_svg({panel});
  CHECK(svg == mesh_panels_svg({panel}));
  CHECK_THAT(svg, ContainsSubstring("<svg xmlns="));
  CHECK_THAT(svg, ContainsSubstring("</svg>\n"));
  CHECK_THAT(svg, ContainsSubstring(">quasi</text>"));
  CHECK_THAT(svg, ContainsSubstring("#d62728"));
  CHECK_THAT(svg, ContainsSubstring("#1f6feb"));
  CHECK_THAT(svg, ContainsSubstring("y* = " + fmt12(q.y_star)));

  const std::string two = mesh_panels_svg({panel, panel});
  CHECK(two.find("width=\"1040\"") != std::string::npos);
}

TEST_CASE("mesh json carries nulls for undefined nodes") {
  const auto holed = [](Point p) -> std::optional<Point> {
    if (p.x > 1.5) return std::nullopt;
    return p;
  };
  const WarpedMesh m = sample_mesh(holed, 0.0, 2.0, 0.0, 1.0, 3, 2);
  const auto j = nlohmann::json::parse(mesh_json(m));
  CHECK(j["nx"] == 3);
  CHECK(j["ny"] == 2);
  REQUIRE(j["nodes"].size() == 6);
  CHECK(j["nodes"][0]["dst"].is_array());
  CHECK(j["nodes"][2]["dst"].is_null());
  CHECK(j["nodes"][2]["src"][0] == 2.0);
}

TEST_CASE("scale profiles expose the linearized branch") {
  const Homography h = from_matrix(kRefArr);
  const QuasiHomography q = build(h, 400.0);
  const ScaleProfileData d = sample_scale(h, &q, 0.0, 800.0, 100);
  CHECK(d.y_row == q.y_star);
  CHECK(d.x_star == q.x_star);
  REQUIRE(d.xs.size() == 101);
  for (size_t i = 0; i < d.xs.size(); ++i) {
    if (d.xs[i] <= q.x_star)
      CHECK(d.fq[i] == d.f0[i]);
  }
  for (size_t i = 1; i + 1 < d.xs.size(); ++i) {
    if (!(d.xs[i - 1] > q.x_star)) continue;
    CHECK(std::abs(d.fq[i + 1] - 2.0 * d.fq[i] + d.fq[i - 1]) < 1e-9);
  }

  const ScaleProfileData plain = sample_scale(h, nullptr, 0.0, 800.0, 50);
  CHECK(plain.fq == plain.f0);
  CHECK(std::isnan(plain.x_star));
  CHECK(plain.y_row == Catch::Approx(horizon_row(h)));

  const ScaleProfileData pinned = sample_scale(h, nullptr, 0.0, 800.0, 50, 55.0);
  CHECK(pinned.y_row == 55.0);

  Homography affine;
  affine.h3 = 12.0;
  const ScaleProfileData fall = sample_scale(affine, nullptr, 0.0, 100.0, 10);
  CHECK(fall.y_row == 0.0);
  CHECK(fall.fq == fall.f0);

  CHECK(error_code_of([&] { return sample_scale(h, &q, 0.0, 800.0, 1); }) ==
        ErrorCode::InvalidArgument);
}

TEST_CASE("scale csv and svg are deterministic") {
  const Homography h = from_matrix(kRefArr);
  const QuasiHomography q = build(h, 400.0);
  const ScaleProfileData d = sample_scale(h, &q, 0.0, 800.0, 64);

  const std::string csv = scale_csv(d);
  CHECK(csv == scale_csv(d));
  CHECK(csv.rfind("x,f0,fq\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 66);

  const std::string svg = scale_svg(d);
  CHECK(svg == scale_svg(d));
  CHECK_THAT(svg, ContainsSubstring("x* = " + fmt12(q.x_star)));
  CHECK_THAT(svg, ContainsSubstring("#1a7f37"));
  CHECK_THAT(svg, ContainsSubstring("#888888"));
  CHECK_THAT(svg, ContainsSubstring("</svg>\n"));
}

TEST_CASE("warp metrics separate the quasi and projective profiles") {
  const Homography h = from_matrix(kRefArr);
  GridSpec g;
  g.x1 = 800.0;
  g.y1 = 600.0;

  const WarpMetrics quasi = compute_metrics(build(h, 400.0), g);
  CHECK(quasi.scale_nonlinearity < 1e-10);
  CHECK(quasi.slope_deviation < 1e-9);
  CHECK(quasi.fold_count == 0);

  Homography tilt;
  tilt.h7 = 1e-3;
  const WarpMetrics proj = compute_metrics(make_stage(tilt), g);
  CHECK(proj.scale_nonlinearity > 1e-6);
}
