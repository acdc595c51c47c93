#pragma once

#include <array>

namespace prnu::codec {

using Block4x4 = std::array<double, 16>; // row-major
using Levels4x4 = std::array<int, 16>;

// Qstep = 2^((qp - 4) / 6): 1 at qp 4, doubling every +6.
double qp_to_qstep(int qp);

// Core integer transform C X C^T followed by the explicit orthonormalizing
// scale, so inverse(forward(x)) == x and coefficient energy equals pixel
// energy.
Block4x4 forward_transform_4x4(const Block4x4& block);
Block4x4 inverse_transform_4x4(const Block4x4& coeffs);

// level = round(coef / qstep), ties away from zero.
Levels4x4 quantize(const Block4x4& coeffs, int qp);
Block4x4 dequantize(const Levels4x4& levels, int qp);

// Zigzag scan position -> raster index within the 4x4 block.
inline constexpr std::array<int, 16> kZigzag4x4 = {0, 1, 4, 8, 5, 2, 3, 6,
                                                   9, 12, 13, 10, 7, 11, 14, 15};

} // namespace prnu::codec
