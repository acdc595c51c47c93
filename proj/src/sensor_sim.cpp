#include "prnu/sensor_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace prnu::sim {
namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct Wave {
  double fx, fy, phase, amplitude;
};

std::vector<Wave> scene_waves(const SceneConfig& scene, int width, int height) {
  std::mt19937_64 rng(mix_seed(scene.seed, 0x5ce4e));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  constexpr double two_pi = 2.0 * std::numbers::pi;
  std::vector<Wave> waves;

  const bool smooth = scene.kind != SceneKind::Texture;
  const bool texture = scene.kind != SceneKind::SmoothGradient;
  const double share = (smooth && texture) ? 0.5 : 1.0;

  if (smooth) {
    // Slow undulations spanning roughly the frame; never flat across a block.
    const double span = std::max(width, height);
    for (int i = 0; i < 3; ++i) {
      const double angle = two_pi * unit(rng);
      const double wavelength = span * (1.0 + 1.5 * unit(rng));
      const double f = two_pi / wavelength;
      waves.push_back({f * std::cos(angle), f * std::sin(angle), two_pi * unit(rng),
                       share * scene.contrast / 3.0});
    }
  }
  if (texture) {
    constexpr int kTextureWaves = 24;
    // Wavelengths from 6 to 48 px.
    for (int i = 0; i < kTextureWaves; ++i) {
      const double angle = two_pi * unit(rng);
      const double wavelength = 6.0 * std::pow(8.0, unit(rng));
      const double f = two_pi / wavelength;
      waves.push_back({f * std::cos(angle), f * std::sin(angle), two_pi * unit(rng),
                       share * scene.contrast / std::sqrt(kTextureWaves / 2.0)});
    }
  }
  return waves;
}

} // namespace

PrnuPattern generate_prnu_factor(std::uint64_t seed, int width, int height, double k_strength) {
  if (width <= 0 || height <= 0)
    throw DimensionError("PRNU factor dimensions must be positive");
  if (!(k_strength >= 0.0))
    throw ConfigError("k_strength must be non-negative");
  RealPlane k(width, height, 0.0);
  if (k_strength == 0.0)
    return PrnuPattern(std::move(k));

  std::mt19937_64 rng(mix_seed(seed, 0x4b));
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& v : k.samples())
    v = normal(rng);

  // Standardize so the sample moments hit the target exactly at any size.
  const auto s = k.samples();
  const double n = static_cast<double>(s.size());
  double mean = 0.0;
  for (double v : s)
    mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : s)
    var += (v - mean) * (v - mean);
  var /= n;
  const double scale = var > 0.0 ? k_strength / std::sqrt(var) : 0.0;
  for (double& v : s)
    v = (v - mean) * scale;
  return PrnuPattern(std::move(k));
}

SensorProfile make_profile(std::uint64_t seed, int width, int height, double k_strength,
                           double theta_std) {
  if (!(theta_std >= 0.0))
    throw ConfigError("theta_std must be non-negative");
  return {generate_prnu_factor(seed, width, height, k_strength), k_strength, theta_std};
}

RealPlane render_scene(const SceneConfig& scene, int width, int height, int t) {
  if (!(scene.mean_intensity > 0.0 && scene.mean_intensity < 255.0))
    throw ConfigError("mean_intensity must lie in (0, 255)");
  if (std::hypot(scene.drift_x, scene.drift_y) >= std::min(width, height))
    throw ConfigError("drift magnitude must be smaller than the frame");

  RealPlane out(width, height, scene.mean_intensity);
  const double ox = -scene.drift_x * t;
  const double oy = -scene.drift_y * t;
  std::vector<double> sx(width), cx(width), sy(height), cy(height);
  for (const Wave& w : scene_waves(scene, width, height)) {
    // sin(a + b) = sin a cos b + cos a sin b keeps the inner loop separable.
    for (int x = 0; x < width; ++x) {
      const double a = w.fx * (x + ox) + w.phase;
      sx[x] = std::sin(a);
      cx[x] = std::cos(a);
    }
    for (int y = 0; y < height; ++y) {
      const double b = w.fy * (y + oy);
      sy[y] = std::sin(b) * w.amplitude;
      cy[y] = std::cos(b) * w.amplitude;
    }
    for (int y = 0; y < height; ++y) {
      auto row = out.row(y);
      for (int x = 0; x < width; ++x)
        row[x] += sx[x] * cy[y] + cx[x] * sy[y];
    }
  }
  return out;
}

io::RawVideo simulate_video(const SceneConfig& scene, const SensorProfile& profile, int n_frames,
                            std::uint32_t fps) {
  const int width = profile.k_true.width();
  const int height = profile.k_true.height();
  if (n_frames < 1)
    throw ConfigError("n_frames must be at least 1");
  if (!(profile.theta_std >= 0.0))
    throw ConfigError("theta_std must be non-negative");

  io::RawVideo video;
  video.width = width;
  video.height = height;
  video.fps_num = fps;
  video.fps_den = 1;
  video.frames.reserve(n_frames);

  const auto k = profile.k_true.values().samples();
  for (int t = 0; t < n_frames; ++t) {
    RealPlane frame = render_scene(scene, width, height, t);
    std::mt19937_64 rng(mix_seed(scene.seed, 1000 + static_cast<std::uint64_t>(t)));
    std::normal_distribution<double> theta(0.0, 1.0);
    auto s = frame.samples();
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double noise = profile.theta_std > 0.0 ? profile.theta_std * theta(rng) : 0.0;
      s[i] = s[i] + s[i] * k[i] + noise;
    }
    video.frames.push_back(to_bytes_clipped(frame));
  }
  video.validate();
  return video;
}

} // namespace prnu::sim
