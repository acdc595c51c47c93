#pragma once

#include <array>
#include <cstdint>

#include "prnu/plane.hpp"

namespace prnu::codec {

using MbSamples = std::array<int, 256>; // 16x16 row-major

enum class IntraMode : std::uint8_t { DC = 0, Horizontal = 1, Vertical = 2 };

struct IntraDecision {
  IntraMode mode = IntraMode::DC;
  MbSamples prediction{};
  std::int64_t sse = 0;
};

bool intra_mode_available(IntraMode mode, int mb_x, int mb_y);

// Prediction for the macroblock at pixel (mb_x, mb_y) from the unfiltered
// reconstruction of the current frame. With no neighbors DC predicts 128.
MbSamples intra_prediction(const BytePlane& unfiltered, int mb_x, int mb_y, IntraMode mode);

// Best available mode by SSE against the source block; ties favor DC, then
// horizontal, then vertical.
IntraDecision intra_predict(const BytePlane& unfiltered, const BytePlane& source, int mb_x,
                            int mb_y);

// Prediction source is reference(x + mv.x, y + mv.y); the displaced block
// always lies inside the reference frame.
struct MotionVector {
  int x = 0;
  int y = 0;
  friend bool operator==(const MotionVector&, const MotionVector&) = default;
};

struct InterDecision {
  MotionVector mv;
  MbSamples prediction{};
  std::int64_t sse = 0;
};

bool motion_vector_valid(const BytePlane& reference, int mb_x, int mb_y, MotionVector mv);

MbSamples inter_prediction(const BytePlane& reference, int mb_x, int mb_y, MotionVector mv);

// Integer-pel full search over +-search_range minimizing SSE. Ties go to the
// smallest mv.x^2 + mv.y^2, then to raster order of (mv.y, mv.x).
InterDecision inter_predict(const BytePlane& reference, const BytePlane& source, int mb_x,
                            int mb_y, int search_range);

std::int64_t block_sse(const BytePlane& source, int mb_x, int mb_y, const MbSamples& pred);

} // namespace prnu::codec
