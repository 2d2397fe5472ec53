#include <quasiwarp/mesh.hpp>
#include <quasiwarp/quasi.hpp>

#include <catch2/catch_amalgamated.hpp>

#include "oracle.hpp"
#include "support.hpp"

#include <cmath>

using namespace quasiwarp;
using support::error_code_of;

namespace {

const Homography kTilt{1, 0, 0, 0, 1, 0, 0.001, 0};
const Homography kRef{1, 0.2, 10, 0.05, 1.1, 20, 0.0005, 0.0002};

double f0_of(const Homography& h, double x, double y) {
  return oracle::apply(support::mat_of(h), x, y).x;
}

}  // namespace

TEST_CASE("build caches the anchor constants") {
  const QuasiHomography q0 = build(kTilt, 0.0);
  CHECK(q0.y_star == Catch::Approx(0.0).margin(1e-12));
  CHECK(q0.f_at_anchor == Catch::Approx(0.0).margin(1e-12));
  CHECK(q0.df_at_anchor == Catch::Approx(1.0).epsilon(1e-12));

  const QuasiHomography q1 = build(kTilt, 100.0);
  CHECK(q1.f_at_anchor == Catch::Approx(100.0 / 1.1).epsilon(1e-12));
  CHECK(q1.df_at_anchor == Catch::Approx(1.0 / 1.21).epsilon(1e-12));
  const double fd = oracle::deriv_central(
      [](double t) { return t / (0.001 * t + 1.0); }, 100.0);
  CHECK(q1.df_at_anchor == Catch::Approx(fd).epsilon(1e-8));

  const QuasiHomography qr = build(kRef, 400.0);
  CHECK(qr.f_at_anchor ==
        Catch::Approx(f0_of(kRef, 400.0, qr.y_star)).epsilon(1e-12));
  CHECK(qr.df_at_anchor ==
        Catch::Approx(dfdx(kRef, {400.0, qr.y_star})).epsilon(1e-12));
  CHECK(qr.g_at_anchor ==
        Catch::Approx(apply(kRef, {400.0, qr.y_star}).y).epsilon(1e-12));
}

TEST_CASE("build rejects degenerate bases") {
  CHECK(error_code_of([] { return build(Homography::identity(), 10.0); }) ==
        ErrorCode::AffineDegenerate);

  const Homography shrink{1, 0, 2000, 0, 1, 0, 0.001, 0};
  CHECK(error_code_of([&] { return build(shrink, 0.0); }) ==
        ErrorCode::NonMonotoneScale);

  CHECK(error_code_of([] {
          return build(kRef, std::numeric_limits<double>::infinity());
        }) == ErrorCode::InvalidArgument);
}

TEST_CASE("forward equals the homography on the overlap side") {
  const QuasiHomography q = build(kRef, 400.0);
  oracle::HGen gen(21);
  for (int k = 0; k < 200; ++k) {
    const Point p{gen.uniform(-500, 400), gen.uniform(-400, 700)};
    const Point a = forward(q, p);
    const Point b = apply(kRef, p);
    CHECK(a.x == b.x);
    CHECK(a.y == b.y);
  }
}

TEST_CASE("forward intersects the two constraint lines beyond the partition") {
  const QuasiHomography q = build(kTilt, 0.0);
  const Point p = forward(q, {100, 50});
  CHECK(p.x == Catch::Approx(100.0).margin(1e-9));
  CHECK(p.y == Catch::Approx(45.0).margin(1e-9));

  // independent replay: base point on the row image + row direction against
  // the linearized column position + column direction
  const QuasiHomography qr = build(kRef, 400.0);
  oracle::HGen gen(22);
  const oracle::Mat3 m = support::mat_of(kRef);
  for (int k = 0; k < 100; ++k) {
    const double x = gen.uniform(401, 1200), y = gen.uniform(-300, 600);
    const oracle::P2 a = oracle::apply(m, 400.0, y);
    const Direction dh = slope_h(kRef, y);
    const double fx = qr.f_at_anchor + qr.df_at_anchor * (x - 400.0);
    const Direction dv = slope_v(kRef, x);
    const oracle::P2 want = oracle::intersect(a, {dh.dx, dh.dy},
                                              {fx, qr.g_at_anchor}, {dv.dx, dv.dy});
    const Point got = forward(qr, {x, y});
    CHECK(got.x == Catch::Approx(want.x).margin(1e-8));
    CHECK(got.y == Catch::Approx(want.y).margin(1e-8));
  }
}

TEST_CASE("forward is continuous at the partition line") {
  const QuasiHomography q = build(kRef, 400.0);
  oracle::HGen gen(23);
  for (int k = 0; k < 100; ++k) {
    const double y = gen.uniform(-400, 700);
    const Point left = apply(kRef, {400.0, y});
    const Point right = forward(q, {400.0 + 1e-12, y});
    CHECK(std::hypot(right.x - left.x, right.y - left.y) < 1e-9);
  }
}

TEST_CASE("scale is C1 at the partition line") {
  oracle::HGen gen(24);
  for (int i = 0; i < 20; ++i) {
    double ys = 0.0;
    const auto arr = gen.sample_quasi(&ys);
    const Homography h = from_matrix(arr);
    const double xs = gen.uniform(-200, 900);
    const QuasiHomography q = build(h, xs);
    const oracle::Mat3 m = oracle::to_mat(arr);
    // step large enough that roundoff on values ~1e3 stays below 1e-9
    const double left = oracle::deriv_left(
        [&](double t) { return oracle::apply(m, t, q.y_star).x; }, xs, 1e-3);
    CHECK(std::abs(left - q.df_at_anchor) < 1e-8);
  }
}

TEST_CASE("backward inverts forward") {
  const QuasiHomography q0 = build(kTilt, 0.0);
  const Point p = backward(q0, {100, 45});
  CHECK(p.x == Catch::Approx(100.0).margin(1e-9));
  CHECK(p.y == Catch::Approx(50.0).margin(1e-9));

  oracle::HGen gen(25);
  for (int i = 0; i < 10; ++i) {
    double ys = 0.0;
    const auto arr = gen.sample_quasi(&ys);
    const Homography h = from_matrix(arr);
    const double xs = gen.uniform(-100, 800);
    const QuasiHomography q = build(h, xs);
    for (int k = 0; k < 200; ++k) {
      // half the points beyond the partition so the quadratic branch runs
      const double x = k % 2 ? gen.uniform(xs + 0.01, xs + 700)
                             : gen.uniform(xs - 700, xs);
      const Point src{x, gen.uniform(-350, 350)};
      const auto img = try_forward(q, src);
      if (!img) continue;
      const Point back = backward(q, *img);
      CHECK(std::hypot(back.x - src.x, back.y - src.y) < 1e-6);
      const Point again = forward(q, back);
      CHECK(std::hypot(again.x - img->x, again.y - img->y) < 1e-6);
    }
  }
}

TEST_CASE("backward takes the homography branch on the overlap side") {
  const QuasiHomography q = build(kRef, 400.0);
  oracle::HGen gen(26);
  for (int k = 0; k < 100; ++k) {
    const Point src{gen.uniform(-400, 399), gen.uniform(-300, 600)};
    const Point img = apply(kRef, src);
    const Point a = backward(q, img);
    const Point b = apply(q.base_inv, img);
    CHECK(a.x == b.x);
    CHECK(a.y == b.y);
  }
}

TEST_CASE("backward agrees with both branches on the partition image") {
  const QuasiHomography q = build(kRef, 400.0);
  oracle::HGen gen(27);
  for (int k = 0; k < 100; ++k) {
    const double y = gen.uniform(-300, 600);
    const Point img = apply(kRef, {400.0, y});
    const Point back = backward(q, img);
    CHECK(back.x == Catch::Approx(400.0).margin(1e-9));
    CHECK(back.y == Catch::Approx(y).margin(1e-7));
  }
}

TEST_CASE("backward never answers wrongly on far-out queries") {
  const QuasiHomography q = build(kRef, 400.0);
  oracle::HGen gen(28);
  int valid = 0, rejected = 0;
  for (int k = 0; k < 500; ++k) {
    const Point query{gen.uniform(-4000, 4000), gen.uniform(-4000, 4000)};
    Point back;
    try {
      back = backward(q, query);
    } catch (const Error& e) {
      const bool expected = e.code() == ErrorCode::NoAdmissibleRoot ||
                            e.code() == ErrorCode::OutsideImage ||
                            e.code() == ErrorCode::DegeneratePoint;
      CHECK(expected);
      ++rejected;
      continue;
    }
    const Point again = forward(q, back);
    CHECK(std::hypot(again.x - query.x, again.y - query.y) < 1e-5);
    ++valid;
  }
  CHECK(valid > 0);
}

TEST_CASE("scale_profile is piecewise per the partition") {
  const QuasiHomography q0 = build(kTilt, 0.0);
  const std::vector<double> prof = scale_profile(q0, {-10.0, 0.0, 10.0});
  CHECK(prof[0] == Catch::Approx(-10.0 / 0.99).epsilon(1e-12));
  CHECK(prof[1] == Catch::Approx(0.0).margin(1e-12));
  CHECK(prof[2] == Catch::Approx(10.0).epsilon(1e-12));

  const QuasiHomography q = build(kRef, 400.0);
  for (double x : {-200.0, 0.0, 399.0, 400.0}) {
    CHECK(scale_profile(q, {x})[0] ==
          Catch::Approx(f0_of(kRef, x, q.y_star)).epsilon(1e-12));
  }

  const std::vector<double> lin =
      scale_profile(q, {401.0, 402.0, 403.0, 500.0, 600.0, 700.0});
  CHECK(std::abs(lin[2] - 2.0 * lin[1] + lin[0]) < 1e-10);
  CHECK(std::abs(lin[5] - 2.0 * lin[4] + lin[3]) < 1e-10);
}

TEST_CASE("horizon row maps to a horizontal line") {
  const QuasiHomography q = build(kRef, 400.0);
  for (double x : {-300.0, 0.0, 399.0, 401.0, 700.0, 1500.0}) {
    CHECK(forward(q, {x, q.y_star}).y ==
          Catch::Approx(q.g_at_anchor).margin(1e-9));
  }
}

TEST_CASE("mesh compares against the homography inside the overlap") {
  const QuasiHomography q = build(kRef, 400.0);
  const WarpedMesh mq = mesh(q, -300.0, 350.0, -200.0, 500.0, 8, 8);
  const WarpedMesh mh = mesh(kRef, -300.0, 350.0, -200.0, 500.0, 8, 8);
  REQUIRE(mq.dst.size() == mh.dst.size());
  for (size_t i = 0; i < mq.dst.size(); ++i) {
    CHECK(mq.dst[i].x == mh.dst[i].x);
    CHECK(mq.dst[i].y == mh.dst[i].y);
  }
}

TEST_CASE("mesh cells keep one orientation across the partition") {
  const QuasiHomography q = build(kRef, 400.0);
  const WarpedMesh m = mesh(q, 0.0, 800.0, 0.0, 600.0, 10, 10);
  CHECK(fold_count(m) == 0);
  int pos = 0, neg = 0;
  for (auto s : m.cell_sign) (s > 0 ? pos : neg) += 1;
  CHECK((pos == 0 || neg == 0));
}

TEST_CASE("mesh marks vanishing-line nodes invalid") {
  const QuasiHomography q = build(kTilt, 0.0);
  const WarpedMesh m = mesh(q, -2000.0, 0.0, -100.0, 100.0, 5, 5);
  bool any_invalid = false, any_valid = false;
  for (auto v : m.node_valid) (v ? any_valid : any_invalid) = true;
  CHECK(any_invalid);
  CHECK(any_valid);
}

TEST_CASE("mesh handles the minimal grid") {
  const WarpedMesh m = mesh(kRef, 0.0, 100.0, 0.0, 100.0, 2, 2);
  CHECK(m.src.size() == 4);
  CHECK(m.cell_sign.size() == 1);
  CHECK(error_code_of([] { return mesh(kRef, 0.0, 1.0, 0.0, 1.0, 1, 2); }) ==
        ErrorCode::InvalidArgument);
}
