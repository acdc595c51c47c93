#pragma once

#include <cstdint>

namespace prnu::codec {

inline constexpr double kRateControlGain = 2.0;
inline constexpr int kRateControlMaxStep = 3;

// qp += clamp(round(gain * log2(actual / target)), -3, +3), then clamp to
// [1, 51]. A zero-bit frame counts as a maximal undershoot.
int rate_control_step(double target_bits_per_frame, double actual_bits_last_frame,
                      int current_qp);

} // namespace prnu::codec
