#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "quasiwarp/quasi.hpp"

namespace quasiwarp {

/// Homography stage with its inverse cached for backward evaluation.
struct HomographyStage {
  Homography h;
  Homography h_inv;
};

inline HomographyStage make_stage(const Homography& H) {
  return {H, invert(H)};
}

using WarpStage = std::variant<HomographyStage, QuasiHomography>;

inline std::optional<Point> stage_forward(const WarpStage& s, Point p,
                                          ErrorCode* why = nullptr) {
  if (const auto* hs = std::get_if<HomographyStage>(&s)) {
    auto q = try_apply(hs->h, p);
    if (!q && why) *why = ErrorCode::DegeneratePoint;
    return q;
  }
  return try_forward(std::get<QuasiHomography>(s), p, why);
}

inline std::optional<Point> stage_backward(const WarpStage& s, Point q,
                                           ErrorCode* why = nullptr) {
  if (const auto* hs = std::get_if<HomographyStage>(&s)) {
    auto p = try_apply(hs->h_inv, q);
    if (!p && why) *why = ErrorCode::DegeneratePoint;
    return p;
  }
  return try_backward(std::get<QuasiHomography>(s), q, why);
}

/// Ordered composition of pairwise warps; forward applies stages first to
/// last, backward applies stage inverses in reverse.
struct ChainedWarp {
  std::vector<WarpStage> stages;
};

inline std::optional<Point> try_forward(const ChainedWarp& c, Point p,
                                        ErrorCode* why = nullptr) {
  for (const auto& s : c.stages) {
    auto q = stage_forward(s, p, why);
    if (!q) return std::nullopt;
    p = *q;
  }
  return p;
}

inline std::optional<Point> try_backward(const ChainedWarp& c, Point q,
                                         ErrorCode* why = nullptr) {
  for (auto it = c.stages.rbegin(); it != c.stages.rend(); ++it) {
    auto p = stage_backward(*it, q, why);
    if (!p) return std::nullopt;
    q = *p;
  }
  return q;
}

inline Point compose_forward(const ChainedWarp& c, Point p) {
  for (size_t i = 0; i < c.stages.size(); ++i) {
    ErrorCode why = ErrorCode::DegeneratePoint;
    auto q = stage_forward(c.stages[i], p, &why);
    if (!q)
      fail(why, "forward chain undefined at stage " + std::to_string(i));
    p = *q;
  }
  return p;
}

inline Point compose_backward(const ChainedWarp& c, Point q) {
  for (size_t i = c.stages.size(); i-- > 0;) {
    ErrorCode why = ErrorCode::DegeneratePoint;
    auto p = stage_backward(c.stages[i], q, &why);
    if (!p)
      fail(why, "backward chain undefined at stage " + std::to_string(i));
    q = *p;
  }
  return q;
}

/// Horizontal mirror x -> (w-1) - x as a homography stage.
inline Homography mirror_homography(int width) {
  Homography M;
  M.h1 = -1.0;
  M.h3 = static_cast<double>(width - 1);
  return M;
}

}  // namespace quasiwarp
