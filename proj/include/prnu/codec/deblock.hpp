#pragma once

#include <vector>

#include "prnu/codec/prediction.hpp"
#include "prnu/plane.hpp"

namespace prnu::codec {

// Coding state of one 4x4 transform block, as needed for boundary strength.
struct BlockCodingInfo {
  bool intra = false;
  bool coded = false; // any nonzero level
  int ref = -1;       // reference frame (display index) for inter blocks
  MotionVector mv;
  int qp = 26;
};

// (width / 4) x (height / 4) grid of per-block info.
class BlockInfoGrid {
public:
  BlockInfoGrid() = default;
  BlockInfoGrid(int frame_width, int frame_height)
      : cols_(frame_width / 4), rows_(frame_height / 4),
        blocks_(static_cast<std::size_t>(cols_) * rows_) {}

  int cols() const noexcept { return cols_; }
  int rows() const noexcept { return rows_; }
  BlockCodingInfo& at(int bx, int by) { return blocks_[static_cast<std::size_t>(by) * cols_ + bx]; }
  const BlockCodingInfo& at(int bx, int by) const {
    return blocks_[static_cast<std::size_t>(by) * cols_ + bx];
  }

private:
  int cols_ = 0;
  int rows_ = 0;
  std::vector<BlockCodingInfo> blocks_;
};

// 2 if either side intra; 1 if either side has coded levels, or references
// or motion vectors differ; else 0.
int boundary_strength(const BlockCodingInfo& p, const BlockCodingInfo& q);

// Edge activity threshold alpha = beta = 0.8 * qstep(qp) + 2.
double deblock_threshold(int qp);

// Filters every interior vertical 4x4 edge left to right, then every
// horizontal edge top to bottom. Strength 2 rewrites up to 3 samples per side,
// strength 1 one sample per side. Frame borders are never filtered.
BytePlane deblock_filter(const BytePlane& frame, const BlockInfoGrid& grid);

} // namespace prnu::codec
