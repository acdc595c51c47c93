#include <doctest.h>

#include <cmath>

#include "prnu/core.hpp"
#include "prnu/error.hpp"
#include "prnu/pipeline.hpp"
#include "prnu/sensor_sim.hpp"

using namespace prnu;

namespace {

double sample_mean(const PrnuPattern& p) {
  double s = 0.0;
  for (double v : p.values().samples())
    s += v;
  return s / static_cast<double>(p.values().size());
}

double sample_std(const PrnuPattern& p) {
  const double m = sample_mean(p);
  double s = 0.0;
  for (double v : p.values().samples())
    s += (v - m) * (v - m);
  return std::sqrt(s / static_cast<double>(p.values().size()));
}

double full_pce(const io::RawVideo& video, const PrnuPattern& truth) {
  const auto ev = pipeline::prepare_evidence(video);
  return core::pce(pipeline::estimate(ev, {}), truth).pce;
}

} // namespace

TEST_CASE("prnu factor: zero strength gives an all-zero pattern") {
  const auto k = sim::generate_prnu_factor(3, 64, 48, 0.0);
  for (double v : k.values().samples())
    CHECK(v == 0.0);
}

TEST_CASE("prnu factor: deterministic per seed, distinct across seeds") {
  CHECK(sim::generate_prnu_factor(11, 64, 64, 0.03) == sim::generate_prnu_factor(11, 64, 64, 0.03));
  CHECK_FALSE(sim::generate_prnu_factor(11, 64, 64, 0.03) ==
              sim::generate_prnu_factor(12, 64, 64, 0.03));
}

TEST_CASE("prnu factor: sample statistics") {
  const auto k = sim::generate_prnu_factor(5, 256, 256, 0.03);
  const double sd = sample_std(k);
  CHECK(sd >= 0.0285);
  CHECK(sd <= 0.0315);
  CHECK(std::abs(sample_mean(k)) <= 3 * 0.03 / 256.0);
  for (std::uint64_t seed : {1, 2, 3, 4})
    for (double strength : {0.001, 0.01, 0.05}) {
      const auto p = sim::generate_prnu_factor(seed, 64, 32, strength);
      CHECK(std::abs(sample_std(p) - strength) <= 0.05 * strength);
      CHECK(std::abs(sample_mean(p)) <= 3 * strength / std::sqrt(64.0 * 32.0));
    }
}

TEST_CASE("simulate: no sensor factor and no noise reproduces the clipped scene") {
  sim::SceneConfig scene;
  scene.seed = 9;
  scene.contrast = 200; // forces clipping at both ends
  const auto profile = sim::make_profile(1, 64, 48, 0.0, 0.0);
  const auto video = sim::simulate_video(scene, profile, 4);
  for (int t = 0; t < 4; ++t)
    CHECK(video.frames[t] == to_bytes_clipped(sim::render_scene(scene, 64, 48, t)));
}

TEST_CASE("simulate: constant scene follows the multiplicative model exactly") {
  sim::SceneConfig scene;
  scene.contrast = 0.0;
  scene.mean_intensity = 100.0;
  const auto profile = sim::make_profile(4, 32, 32, 0.05, 0.0);
  const auto video = sim::simulate_video(scene, profile, 2);
  for (const auto& f : video.frames)
    for (int y = 0; y < 32; ++y)
      for (int x = 0; x < 32; ++x) {
        const double expect = std::clamp(std::round(100.0 * (1.0 + profile.k_true(x, y))), 0.0, 255.0);
        CHECK(f(x, y) == expect);
      }
}

TEST_CASE("simulate: deterministic given seeds") {
  sim::SceneConfig scene;
  scene.seed = 21;
  const auto profile = sim::make_profile(2, 48, 32);
  CHECK(sim::simulate_video(scene, profile, 3) == sim::simulate_video(scene, profile, 3));
  auto other = scene;
  other.seed = 22;
  CHECK_FALSE(sim::simulate_video(scene, profile, 3) == sim::simulate_video(other, profile, 3));
}

TEST_CASE("scene: default content is non-flat and drifts one pixel diagonally") {
  sim::SceneConfig scene;
  CHECK(scene.drift_x == 1.0);
  CHECK(scene.drift_y == 1.0);
  const auto a = sim::render_scene(scene, 64, 64, 3);
  const auto b = sim::render_scene(scene, 64, 64, 4);
  double lo = 1e9, hi = -1e9;
  for (double v : a.samples()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(hi - lo > 10.0);
  for (int y = 0; y < 63; ++y)
    for (int x = 0; x < 63; ++x)
      CHECK(b(x + 1, y + 1) == doctest::Approx(a(x, y)).epsilon(1e-9));
}

TEST_CASE("scene: every kind renders around the mean intensity") {
  for (auto kind : {sim::SceneKind::SmoothGradient, sim::SceneKind::Texture, sim::SceneKind::Mixed}) {
    sim::SceneConfig scene;
    scene.kind = kind;
    const auto p = sim::render_scene(scene, 128, 128, 0);
    double s = 0.0;
    for (double v : p.samples())
      s += v;
    CHECK(std::abs(s / 16384.0 - 128.0) < 20.0);
  }
}

TEST_CASE("simulate: invalid configuration") {
  sim::SceneConfig scene;
  scene.drift_x = 64;
  CHECK_THROWS_AS(sim::render_scene(scene, 64, 64, 0), ConfigError);
  scene = {};
  scene.mean_intensity = 300;
  CHECK_THROWS_AS(sim::render_scene(scene, 64, 64, 0), ConfigError);
  CHECK_THROWS_AS(sim::simulate_video({}, sim::make_profile(1, 32, 32), 0), ConfigError);
  CHECK_THROWS_AS(sim::generate_prnu_factor(1, 32, 32, -0.1), ConfigError);
}

TEST_CASE("simulate: default profile yields a strong uncompressed fingerprint") {
  const auto profile = sim::make_profile(7, 256, 256);
  sim::SceneConfig scene;
  scene.seed = 8;
  const auto video = sim::simulate_video(scene, profile, 100);
  CHECK(full_pce(video, profile.k_true) > 1000.0);
}

TEST_CASE("simulate: fingerprint strength grows with the number of frames") {
  // A weak sensor so the estimate is far from saturating PCE.
  const auto profile = sim::make_profile(3, 128, 128, 0.002, 2.0);
  sim::SceneConfig scene;
  scene.seed = 4;
  const auto video = sim::simulate_video(scene, profile, 100);
  double previous = 0.0;
  for (int n : {10, 50, 100}) {
    io::RawVideo head = video;
    head.frames.resize(static_cast<std::size_t>(n));
    const double p = full_pce(head, profile.k_true);
    CHECK(p >= 0.95 * previous);
    previous = p;
  }
}

TEST_CASE("simulate: a sensor without a factor never matches") {
  const auto blank = sim::make_profile(3, 128, 128, 0.0, 2.0);
  const auto other = sim::generate_prnu_factor(99, 128, 128, 0.03);
  sim::SceneConfig scene;
  const auto video = sim::simulate_video(scene, blank, 40);
  CHECK(full_pce(video, other) < core::kMatchThreshold);
}
