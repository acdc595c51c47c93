#include "prnu/codec/rate_control.hpp"

#include <algorithm>
#include <cmath>

#include "prnu/codec/types.hpp"
#include "prnu/error.hpp"

namespace prnu::codec {

int rate_control_step(double target_bits_per_frame, double actual_bits_last_frame,
                      int current_qp) {
  if (current_qp < kMinQp || current_qp > kMaxQp)
    throw ConfigError("qp out of range [1, 51]");
  if (!(target_bits_per_frame > 0.0))
    throw ConfigError("target bits per frame must be positive");
  int delta = -kRateControlMaxStep;
  if (actual_bits_last_frame > 0.0) {
    const double step =
        std::round(kRateControlGain * std::log2(actual_bits_last_frame / target_bits_per_frame));
    delta = static_cast<int>(std::clamp(step, double(-kRateControlMaxStep),
                                        double(kRateControlMaxStep)));
  }
  return std::clamp(current_qp + delta, kMinQp, kMaxQp);
}

} // namespace prnu::codec
