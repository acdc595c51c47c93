#include "prnu/codec/prediction.hpp"

#include <limits>

#include "prnu/codec/types.hpp"

namespace prnu::codec {

bool intra_mode_available(IntraMode mode, int mb_x, int mb_y) {
  switch (mode) {
  case IntraMode::DC:
    return true;
  case IntraMode::Horizontal:
    return mb_x > 0;
  case IntraMode::Vertical:
    return mb_y > 0;
  }
  return false;
}

MbSamples intra_prediction(const BytePlane& rec, int mb_x, int mb_y, IntraMode mode) {
  MbSamples pred{};
  constexpr int n = kMacroblockSize;
  switch (mode) {
  case IntraMode::DC: {
    int sum = 0;
    int count = 0;
    if (mb_y > 0)
      for (int i = 0; i < n; ++i, ++count)
        sum += rec(mb_x + i, mb_y - 1);
    if (mb_x > 0)
      for (int i = 0; i < n; ++i, ++count)
        sum += rec(mb_x - 1, mb_y + i);
    const int dc = count > 0 ? (sum + count / 2) / count : 128;
    pred.fill(dc);
    break;
  }
  case IntraMode::Horizontal:
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x)
        pred[y * n + x] = rec(mb_x - 1, mb_y + y);
    break;
  case IntraMode::Vertical:
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x)
        pred[y * n + x] = rec(mb_x + x, mb_y - 1);
    break;
  }
  return pred;
}

std::int64_t block_sse(const BytePlane& source, int mb_x, int mb_y, const MbSamples& pred) {
  std::int64_t sse = 0;
  for (int y = 0; y < kMacroblockSize; ++y) {
    const auto row = source.row(mb_y + y);
    for (int x = 0; x < kMacroblockSize; ++x) {
      const int d = static_cast<int>(row[mb_x + x]) - pred[y * kMacroblockSize + x];
      sse += d * d;
    }
  }
  return sse;
}

IntraDecision intra_predict(const BytePlane& rec, const BytePlane& source, int mb_x, int mb_y) {
  IntraDecision best;
  best.sse = std::numeric_limits<std::int64_t>::max();
  for (IntraMode mode : {IntraMode::DC, IntraMode::Horizontal, IntraMode::Vertical}) {
    if (!intra_mode_available(mode, mb_x, mb_y))
      continue;
    MbSamples pred = intra_prediction(rec, mb_x, mb_y, mode);
    const std::int64_t sse = block_sse(source, mb_x, mb_y, pred);
    if (sse < best.sse) {
      best.mode = mode;
      best.prediction = pred;
      best.sse = sse;
    }
  }
  return best;
}

bool motion_vector_valid(const BytePlane& ref, int mb_x, int mb_y, MotionVector mv) {
  const int x = mb_x + mv.x;
  const int y = mb_y + mv.y;
  return x >= 0 && y >= 0 && x + kMacroblockSize <= ref.width() &&
         y + kMacroblockSize <= ref.height();
}

MbSamples inter_prediction(const BytePlane& ref, int mb_x, int mb_y, MotionVector mv) {
  MbSamples pred{};
  for (int y = 0; y < kMacroblockSize; ++y) {
    const auto row = ref.row(mb_y + mv.y + y);
    for (int x = 0; x < kMacroblockSize; ++x)
      pred[y * kMacroblockSize + x] = row[mb_x + mv.x + x];
  }
  return pred;
}

InterDecision inter_predict(const BytePlane& ref, const BytePlane& source, int mb_x, int mb_y,
                            int search_range) {
  InterDecision best;
  std::int64_t best_sse = std::numeric_limits<std::int64_t>::max();
  int best_norm = std::numeric_limits<int>::max();

  for (int dy = -search_range; dy <= search_range; ++dy) {
    for (int dx = -search_range; dx <= search_range; ++dx) {
      const MotionVector mv{dx, dy};
      if (!motion_vector_valid(ref, mb_x, mb_y, mv))
        continue;
      std::int64_t sse = 0;
      for (int y = 0; y < kMacroblockSize && sse <= best_sse; ++y) {
        const auto src = source.row(mb_y + y);
        const auto cand = ref.row(mb_y + dy + y);
        for (int x = 0; x < kMacroblockSize; ++x) {
          const int d = static_cast<int>(src[mb_x + x]) - cand[mb_x + dx + x];
          sse += d * d;
        }
      }
      const int norm = dx * dx + dy * dy;
      // Raster scan visits candidates in tie-break order, so strict
      // comparisons keep the earliest one.
      if (sse < best_sse || (sse == best_sse && norm < best_norm)) {
        best_sse = sse;
        best_norm = norm;
        best.mv = mv;
      }
    }
  }
  best.sse = best_sse;
  best.prediction = inter_prediction(ref, mb_x, mb_y, best.mv);
  return best;
}

} // namespace prnu::codec
