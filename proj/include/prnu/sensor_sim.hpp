#pragma once

#include <cstdint>

#include "prnu/frame_io.hpp"
#include "prnu/pattern.hpp"

namespace prnu::sim {

struct SensorProfile {
  PrnuPattern k_true;       // zero-mean multiplicative deviations
  double k_strength = 0.03; // std of k_true entries
  double theta_std = 2.0;   // std of temporal noise, intensity units
};

enum class SceneKind { SmoothGradient, Texture, Mixed };

struct SceneConfig {
  SceneKind kind = SceneKind::Mixed;
  // Content translation per frame, pixels. Default is 1 px/frame diagonal.
  double drift_x = 1.0;
  double drift_y = 1.0;
  double mean_intensity = 128.0;
  // Peak deviation of the content around mean_intensity.
  double contrast = 40.0;
  std::uint64_t seed = 1;
};

PrnuPattern generate_prnu_factor(std::uint64_t seed, int width, int height, double k_strength);

SensorProfile make_profile(std::uint64_t seed, int width, int height, double k_strength = 0.03,
                           double theta_std = 2.0);

// Noise-free scene intensity I0 at frame t (before sensor response).
RealPlane render_scene(const SceneConfig& scene, int width, int height, int t);

// frame_t = clip_round(I0_t + I0_t * K + theta_t). Dimensions follow k_true.
io::RawVideo simulate_video(const SceneConfig& scene, const SensorProfile& profile, int n_frames,
                            std::uint32_t fps = 25);

} // namespace prnu::sim
