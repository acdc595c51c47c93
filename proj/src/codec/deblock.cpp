#include "prnu/codec/deblock.hpp"

#include <cstdlib>

#include "prnu/codec/transform.hpp"

namespace prnu::codec {
namespace {

// Filters the 8 samples p3 p2 p1 p0 | q0 q1 q2 q3 in place.
void filter_line(int s[8], int bs, double threshold) {
  const int p3 = s[0], p2 = s[1], p1 = s[2], p0 = s[3];
  const int q0 = s[4], q1 = s[5], q2 = s[6], q3 = s[7];
  if (!(std::abs(p0 - q0) < threshold && std::abs(p1 - p0) < threshold &&
        std::abs(q1 - q0) < threshold))
    return;
  if (bs >= 2) {
    s[3] = (p2 + 2 * p1 + 2 * p0 + 2 * q0 + q1 + 4) >> 3;
    s[2] = (p2 + p1 + p0 + q0 + 2) >> 2;
    s[1] = (2 * p3 + 3 * p2 + p1 + p0 + q0 + 4) >> 3;
    s[4] = (q2 + 2 * q1 + 2 * q0 + 2 * p0 + p1 + 4) >> 3;
    s[5] = (q2 + q1 + q0 + p0 + 2) >> 2;
    s[6] = (2 * q3 + 3 * q2 + q1 + q0 + p0 + 4) >> 3;
  } else {
    s[3] = (p1 + 2 * p0 + q0 + 2) >> 2;
    s[4] = (p0 + 2 * q0 + q1 + 2) >> 2;
  }
}

double edge_threshold(const BlockCodingInfo& p, const BlockCodingInfo& q) {
  return deblock_threshold((p.qp + q.qp + 1) / 2);
}

} // namespace

int boundary_strength(const BlockCodingInfo& p, const BlockCodingInfo& q) {
  if (p.intra || q.intra)
    return 2;
  if (p.coded || q.coded)
    return 1;
  if (p.ref != q.ref || p.mv != q.mv)
    return 1;
  return 0;
}

double deblock_threshold(int qp) { return 0.8 * qp_to_qstep(qp) + 2.0; }

BytePlane deblock_filter(const BytePlane& frame, const BlockInfoGrid& grid) {
  if (grid.cols() * 4 != frame.width() || grid.rows() * 4 != frame.height())
    throw DimensionError("deblock: block grid does not match frame");
  BytePlane out = frame;
  int s[8];

  for (int bx = 1; bx < grid.cols(); ++bx) {
    const int x = bx * 4;
    for (int by = 0; by < grid.rows(); ++by) {
      const auto& p = grid.at(bx - 1, by);
      const auto& q = grid.at(bx, by);
      const int bs = boundary_strength(p, q);
      if (bs == 0)
        continue;
      const double t = edge_threshold(p, q);
      for (int y = by * 4; y < by * 4 + 4; ++y) {
        for (int k = 0; k < 8; ++k)
          s[k] = out(x - 4 + k, y);
        filter_line(s, bs, t);
        for (int k = 1; k < 7; ++k)
          out(x - 4 + k, y) = static_cast<std::uint8_t>(s[k]);
      }
    }
  }

  for (int by = 1; by < grid.rows(); ++by) {
    const int y = by * 4;
    for (int bx = 0; bx < grid.cols(); ++bx) {
      const auto& p = grid.at(bx, by - 1);
      const auto& q = grid.at(bx, by);
      const int bs = boundary_strength(p, q);
      if (bs == 0)
        continue;
      const double t = edge_threshold(p, q);
      for (int x = bx * 4; x < bx * 4 + 4; ++x) {
        for (int k = 0; k < 8; ++k)
          s[k] = out(x, y - 4 + k);
        filter_line(s, bs, t);
        for (int k = 1; k < 7; ++k)
          out(x, y - 4 + k) = static_cast<std::uint8_t>(s[k]);
      }
    }
  }
  return out;
}

} // namespace prnu::codec
