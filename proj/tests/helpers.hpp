#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "prnu/frame_io.hpp"
#include "prnu/plane.hpp"
#include "prnu/sensor_sim.hpp"

namespace testutil {

// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
public:
  explicit TempDir(const std::string& tag) {
    static std::mt19937_64 rng(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() /
            ("prnu_test_" + tag + "_" + std::to_string(rng()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
  std::filesystem::path path_;
};

inline prnu::RealPlane random_plane(int w, int h, std::uint64_t seed, double lo = -1.0,
                                    double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(lo, hi);
  prnu::RealPlane p(w, h);
  for (auto& v : p.samples())
    v = d(rng);
  return p;
}

inline prnu::BytePlane random_bytes(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> d(0, 255);
  prnu::BytePlane p(w, h);
  for (auto& v : p.samples())
    v = static_cast<std::uint8_t>(d(rng));
  return p;
}

inline prnu::io::RawVideo random_video(int w, int h, int n, std::uint64_t seed) {
  prnu::io::RawVideo v;
  v.width = w;
  v.height = h;
  for (int i = 0; i < n; ++i)
    v.frames.push_back(random_bytes(w, h, seed + static_cast<std::uint64_t>(i)));
  return v;
}

// Drifting mixed scene through a synthetic sensor.
inline prnu::io::RawVideo sim_video(int w, int h, int n, std::uint64_t seed, double k = 0.03,
                                    double theta = 2.0) {
  prnu::sim::SceneConfig scene;
  scene.seed = seed + 1000;
  const auto profile = prnu::sim::make_profile(seed, w, h, k, theta);
  return prnu::sim::simulate_video(scene, profile, n);
}

} // namespace testutil
