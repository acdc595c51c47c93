#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "prnu/codec/types.hpp"
#include "prnu/sensor_sim.hpp"

namespace prnu::exp {

// A synthetic camera and the scene it films. Seed s gives the sensor factor
// and the scene content of one independent run.
struct CameraConfig {
  int width = 256;
  int height = 256;
  std::uint32_t fps = 25;
  double k_strength = 0.003;
  double theta_std = 2.0;
  sim::SceneConfig scene;
  std::string gop_pattern = "IBP";
};

sim::SensorProfile camera_profile(const CameraConfig& camera, std::uint64_t seed);
sim::SceneConfig camera_scene(const CameraConfig& camera, std::uint64_t seed);

// Generic CSV carrier: "# key=value" lines echo the configuration, then a
// header row and one row per grid cell.
struct ExperimentReport {
  std::string name;
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::string to_csv() const;
  void write_csv(const std::string& path) const;
};

std::string format_number(double v);

struct QpSweepConfig {
  CameraConfig camera;
  std::vector<int> qp_grid{5, 10, 15, 20, 25, 30, 35};
  std::vector<std::uint64_t> seeds{1, 2, 3};
  int frames = 30;
  int threads = 1;
};

struct QpSweepRow {
  int qp = 0;
  double mean_pce = 0.0;
  double normalized_pce = 0.0;
};

struct QpSweepResult {
  std::vector<QpSweepRow> rows; // qp ascending
  ExperimentReport report;
};

// Per qp: constant-qp encode, intervention decode, mean single-frame PCE
// against the true factor, normalized by the qp-15 mean.
QpSweepResult exp_qp_sweep(const QpSweepConfig& config);

enum class Method { Basic, LoopComp, Masking, Weighting };
std::string to_string(Method m);

struct MethodCompareConfig {
  CameraConfig camera;
  std::vector<double> bitrates{1000000, 1400000, 2000000, 4000000, 40000000};
  std::vector<std::uint64_t> seeds{1, 2, 3};
  int seconds = 8;
  int threads = 1;
};

struct MethodCompareRow {
  double bitrate = 0.0;
  double mean_qp = 0.0;
  double basic = 0.0;
  double loop_comp = 0.0;
  double masking = 0.0;
  double weighting = 0.0;
};

struct MethodCompareResult {
  std::vector<MethodCompareRow> rows; // bitrate ascending
  ExperimentReport report;
};

// Per bitrate: full-video PCE against the true factor for the four methods,
// averaged over seeds.
MethodCompareResult exp_method_compare(const MethodCompareConfig& config);

struct FrameTypeConfig {
  CameraConfig camera;
  std::vector<int> qp_grid{15, 20, 25, 30};
  std::vector<std::uint64_t> seeds{1, 2, 3};
  int frames = 30;
  int threads = 1;
};

struct FrameTypeRow {
  int qp = 0;
  codec::FrameType type = codec::FrameType::I;
  double mean_pce = 0.0;
  double normalized_pce = 0.0; // by the I-frame mean at this qp
  double mean_residual_energy = 0.0;
};

struct FrameTypeResult {
  std::vector<FrameTypeRow> rows; // qp ascending, then I, P, B
  ExperimentReport report;
};

FrameTypeResult exp_frame_type(const FrameTypeConfig& config);

// A weaker sensor than the other experiments use, so that reaching the
// threshold takes more than one second at the low end of the grid.
inline CameraConfig weak_camera() {
  CameraConfig c;
  c.k_strength = 0.0007;
  return c;
}

struct MinDurationConfig {
  CameraConfig camera = weak_camera();
  std::vector<double> bitrates{800000, 1000000, 1400000, 2000000, 4000000};
  std::vector<std::uint64_t> seeds{1, 2, 3};
  double threshold = 60.0;
  int max_seconds = 8;
  int threads = 1;
};

struct MinDurationRow {
  double bitrate = 0.0;
  Method method = Method::Basic;
  double mean_seconds = 0.0; // censored runs count as max_seconds
  int censored = 0;          // seeds that never reached the threshold
};

struct MinDurationResult {
  std::vector<MinDurationRow> rows; // bitrate ascending, then basic, loop-comp, weighting
  ExperimentReport report;
};

// Smallest whole second whose accumulated pattern reaches the PCE threshold
// against the true factor. Methods: basic, loop-comp, weighting.
MinDurationResult exp_min_duration(const MinDurationConfig& config);

} // namespace prnu::exp
