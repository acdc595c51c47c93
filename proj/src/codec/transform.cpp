#include "prnu/codec/transform.hpp"

#include <cmath>
#include <string>

#include "prnu/codec/types.hpp"
#include "prnu/error.hpp"

namespace prnu::codec {
namespace {

constexpr int kCore[4][4] = {{1, 1, 1, 1}, {2, 1, -1, -2}, {1, -1, -1, 1}, {1, -2, 2, -1}};

// Row norms of the core matrix: 2, sqrt(10), 2, sqrt(10).
const std::array<double, 4>& row_scale() {
  static const std::array<double, 4> s = {0.5, 1.0 / std::sqrt(10.0), 0.5, 1.0 / std::sqrt(10.0)};
  return s;
}

} // namespace

double qp_to_qstep(int qp) {
  if (qp < kMinQp || qp > kMaxQp)
    throw ConfigError("qp out of range [1, 51]: " + std::to_string(qp));
  // Fractional part from a table, octave by ldexp: each +6 doubles exactly.
  static const std::array<double, 6> frac = {1.0,
                                             std::exp2(1.0 / 6.0),
                                             std::exp2(2.0 / 6.0),
                                             std::exp2(3.0 / 6.0),
                                             std::exp2(4.0 / 6.0),
                                             std::exp2(5.0 / 6.0)};
  const int d = qp + 2; // qp - 4 = 6 * (d / 6 - 1) + d % 6, with d > 0
  return std::ldexp(frac[static_cast<std::size_t>(d % 6)], d / 6 - 1);
}

Block4x4 forward_transform_4x4(const Block4x4& x) {
  // tmp = C X
  double tmp[4][4];
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      double s = 0.0;
      for (int k = 0; k < 4; ++k)
        s += kCore[i][k] * x[k * 4 + j];
      tmp[i][j] = s;
    }
  // Y = tmp C^T, scaled
  const auto& sc = row_scale();
  Block4x4 y{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      double s = 0.0;
      for (int k = 0; k < 4; ++k)
        s += tmp[i][k] * kCore[j][k];
      y[i * 4 + j] = s * sc[i] * sc[j];
    }
  return y;
}

Block4x4 inverse_transform_4x4(const Block4x4& y) {
  const auto& sc = row_scale();
  double scaled[4][4];
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      scaled[i][j] = y[i * 4 + j] * sc[i] * sc[j];
  // tmp = C^T Y
  double tmp[4][4];
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      double s = 0.0;
      for (int k = 0; k < 4; ++k)
        s += kCore[k][i] * scaled[k][j];
      tmp[i][j] = s;
    }
  // X = tmp C
  Block4x4 x{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      double s = 0.0;
      for (int k = 0; k < 4; ++k)
        s += tmp[i][k] * kCore[k][j];
      x[i * 4 + j] = s;
    }
  return x;
}

Levels4x4 quantize(const Block4x4& coeffs, int qp) {
  const double step = qp_to_qstep(qp);
  Levels4x4 levels{};
  for (int i = 0; i < 16; ++i)
    levels[i] = static_cast<int>(std::lround(coeffs[i] / step));
  return levels;
}

Block4x4 dequantize(const Levels4x4& levels, int qp) {
  const double step = qp_to_qstep(qp);
  Block4x4 coeffs{};
  for (int i = 0; i < 16; ++i)
    coeffs[i] = levels[i] * step;
  return coeffs;
}

} // namespace prnu::codec
