#include "prnu/experiments.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "prnu/codec/decoder.hpp"
#include "prnu/codec/encoder.hpp"
#include "prnu/error.hpp"
#include "prnu/parallel.hpp"
#include "prnu/pipeline.hpp"

namespace prnu::exp {
namespace {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double mean(std::span<const double> v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::string join(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i)
    s += (i ? " " : "") + std::to_string(v[i]);
  return s;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i)
    s += (i ? " " : "") + format_number(v[i]);
  return s;
}

void echo_camera(ExperimentReport& r, const CameraConfig& c) {
  r.config.emplace_back("width", std::to_string(c.width));
  r.config.emplace_back("height", std::to_string(c.height));
  r.config.emplace_back("fps", std::to_string(c.fps));
  r.config.emplace_back("k_strength", format_number(c.k_strength));
  r.config.emplace_back("theta_std", format_number(c.theta_std));
  r.config.emplace_back("scene_kind", std::to_string(static_cast<int>(c.scene.kind)));
  r.config.emplace_back("drift", format_number(c.scene.drift_x) + " " + format_number(c.scene.drift_y));
  r.config.emplace_back("contrast", format_number(c.scene.contrast));
  r.config.emplace_back("gop", c.gop_pattern);
}

struct SeedRun {
  sim::SensorProfile profile;
  io::RawVideo video;
};

std::vector<SeedRun> simulate_seeds(const CameraConfig& camera,
                                    const std::vector<std::uint64_t>& seeds, int frames,
                                    int threads) {
  if (seeds.empty())
    throw ConfigError("experiment needs at least one seed");
  if (frames <= 0)
    throw ConfigError("experiment needs at least one frame");
  std::vector<SeedRun> runs(seeds.size());
  parallel_for(seeds.size(), threads, [&](std::size_t i) {
    runs[i].profile = camera_profile(camera, seeds[i]);
    runs[i].video =
        sim::simulate_video(camera_scene(camera, seeds[i]), runs[i].profile, frames, camera.fps);
  });
  return runs;
}

codec::EncoderConfig encoder_config(const CameraConfig& camera, codec::RateMode rate) {
  codec::EncoderConfig cfg;
  cfg.gop_pattern = camera.gop_pattern;
  cfg.rate_mode = rate;
  return cfg;
}

} // namespace

sim::SensorProfile camera_profile(const CameraConfig& camera, std::uint64_t seed) {
  return sim::make_profile(derive_seed(seed, 1), camera.width, camera.height, camera.k_strength,
                           camera.theta_std);
}

sim::SceneConfig camera_scene(const CameraConfig& camera, std::uint64_t seed) {
  sim::SceneConfig scene = camera.scene;
  scene.seed = derive_seed(seed, 2);
  return scene;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string ExperimentReport::to_csv() const {
  std::ostringstream out;
  out << "# experiment=" << name << '\n';
  out << "# seeds=";
  for (std::size_t i = 0; i < seeds.size(); ++i)
    out << (i ? " " : "") << seeds[i];
  out << '\n';
  for (const auto& [key, value] : config)
    out << "# " << key << '=' << value << '\n';
  for (std::size_t i = 0; i < columns.size(); ++i)
    out << (i ? "," : "") << columns[i];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      out << (i ? "," : "") << row[i];
    out << '\n';
  }
  return out.str();
}

void ExperimentReport::write_csv(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw IoError("cannot write " + path);
  out << to_csv();
  if (!out)
    throw IoError("write failed for " + path);
}

std::string to_string(Method m) {
  switch (m) {
  case Method::Basic: return "basic";
  case Method::LoopComp: return "loop-comp";
  case Method::Masking: return "masking";
  case Method::Weighting: return "weighting";
  }
  return "basic";
}

QpSweepResult exp_qp_sweep(const QpSweepConfig& config) {
  if (std::find(config.qp_grid.begin(), config.qp_grid.end(), comp::kBaseQp) ==
      config.qp_grid.end())
    throw ConfigError("qp grid must include qp 15");
  for (int qp : config.qp_grid)
    if (qp < codec::kMinQp || qp > codec::kMaxQp)
      throw ConfigError("qp grid value out of range");

  const auto runs = simulate_seeds(config.camera, config.seeds, config.frames, config.threads);
  const std::size_t nq = config.qp_grid.size();
  const std::size_t ns = runs.size();
  std::vector<std::vector<double>> pces(nq * ns);
  parallel_for(nq * ns, config.threads, [&](std::size_t job) {
    const std::size_t q = job / ns;
    const std::size_t s = job % ns;
    const auto enc = codec::encode(
        runs[s].video, encoder_config(config.camera, codec::ConstantQp{config.qp_grid[q]}));
    const auto dec = codec::decode(enc.stream, codec::DecodeMode::Intervention);
    pces[job] = pipeline::single_frame_pce(pipeline::prepare_evidence(dec), runs[s].profile.k_true);
  });

  std::map<int, double> by_qp;
  for (std::size_t q = 0; q < nq; ++q) {
    std::vector<double> all;
    for (std::size_t s = 0; s < ns; ++s)
      all.insert(all.end(), pces[q * ns + s].begin(), pces[q * ns + s].end());
    by_qp[config.qp_grid[q]] = mean(all);
  }

  QpSweepResult result;
  const double base = by_qp.at(comp::kBaseQp);
  for (const auto& [qp, m] : by_qp)
    result.rows.push_back({qp, m, base > 0.0 ? m / base : 0.0});

  auto& r = result.report;
  r.name = "qp-sweep";
  r.seeds = config.seeds;
  echo_camera(r, config.camera);
  r.config.emplace_back("frames", std::to_string(config.frames));
  r.config.emplace_back("qp_grid", join(config.qp_grid));
  r.columns = {"qp", "mean_pce", "normalized_pce"};
  for (const auto& row : result.rows)
    r.rows.push_back({std::to_string(row.qp), format_number(row.mean_pce),
                      format_number(row.normalized_pce)});
  return result;
}

MethodCompareResult exp_method_compare(const MethodCompareConfig& config) {
  if (config.bitrates.empty())
    throw ConfigError("bitrate grid is empty");
  for (double b : config.bitrates)
    if (!(b > 0.0))
      throw ConfigError("bitrates must be positive");
  if (config.seconds <= 0)
    throw ConfigError("video duration must be positive");

  const int frames = config.seconds * static_cast<int>(config.camera.fps);
  const auto runs = simulate_seeds(config.camera, config.seeds, frames, config.threads);
  std::vector<double> bitrates = config.bitrates;
  std::sort(bitrates.begin(), bitrates.end());
  const std::size_t nb = bitrates.size();
  const std::size_t ns = runs.size();

  struct Cell {
    double pce[4];
    double mean_qp;
  };
  std::vector<Cell> cells(nb * ns);
  parallel_for(nb * ns, config.threads, [&](std::size_t job) {
    const std::size_t b = job / ns;
    const std::size_t s = job % ns;
    const auto& truth = runs[s].profile.k_true;
    const auto enc = codec::encode(
        runs[s].video, encoder_config(config.camera, codec::TargetBitrate{bitrates[b]}));
    const auto filtered =
        pipeline::prepare_evidence(codec::decode(enc.stream, codec::DecodeMode::Filtered));
    const auto unfiltered =
        pipeline::prepare_evidence(codec::decode(enc.stream, codec::DecodeMode::Intervention));

    pipeline::EstimateOptions none, mask, weight;
    mask.compensation = pipeline::Compensation::Mask;
    weight.compensation = pipeline::Compensation::Weight;
    auto& cell = cells[job];
    cell.pce[0] = core::pce(pipeline::estimate(filtered, none), truth).pce;
    cell.pce[1] = core::pce(pipeline::estimate(unfiltered, none), truth).pce;
    cell.pce[2] = core::pce(pipeline::estimate(unfiltered, mask), truth).pce;
    cell.pce[3] = core::pce(pipeline::estimate(unfiltered, weight), truth).pce;
    cell.mean_qp = std::accumulate(enc.frame_qp.begin(), enc.frame_qp.end(), 0.0) /
                   static_cast<double>(enc.frame_qp.size());
  });

  MethodCompareResult result;
  for (std::size_t b = 0; b < nb; ++b) {
    double sums[4] = {};
    double qp = 0.0;
    for (std::size_t s = 0; s < ns; ++s) {
      for (int m = 0; m < 4; ++m)
        sums[m] += cells[b * ns + s].pce[m];
      qp += cells[b * ns + s].mean_qp;
    }
    const double k = static_cast<double>(ns);
    result.rows.push_back(
        {bitrates[b], qp / k, sums[0] / k, sums[1] / k, sums[2] / k, sums[3] / k});
  }

  auto& r = result.report;
  r.name = "method-compare";
  r.seeds = config.seeds;
  echo_camera(r, config.camera);
  r.config.emplace_back("seconds", std::to_string(config.seconds));
  r.config.emplace_back("bitrates", join(bitrates));
  r.columns = {"bitrate", "mean_qp", "basic", "loop_comp", "masking", "weighting"};
  for (const auto& row : result.rows)
    r.rows.push_back({format_number(row.bitrate), format_number(row.mean_qp),
                      format_number(row.basic), format_number(row.loop_comp),
                      format_number(row.masking), format_number(row.weighting)});
  return result;
}

FrameTypeResult exp_frame_type(const FrameTypeConfig& config) {
  const auto& gop = config.camera.gop_pattern;
  for (char t : {'I', 'P', 'B'})
    if (gop.find(t) == std::string::npos)
      throw ConfigError("frame-type experiment needs a GOP with I, P and B frames");
  for (int qp : config.qp_grid)
    if (qp < codec::kMinQp || qp > codec::kMaxQp)
      throw ConfigError("qp grid value out of range");

  const auto runs = simulate_seeds(config.camera, config.seeds, config.frames, config.threads);
  const std::size_t nq = config.qp_grid.size();
  const std::size_t ns = runs.size();

  struct Cell {
    std::vector<double> pce[3];
    std::vector<double> energy[3];
  };
  std::vector<Cell> cells(nq * ns);
  parallel_for(nq * ns, config.threads, [&](std::size_t job) {
    const std::size_t q = job / ns;
    const std::size_t s = job % ns;
    const auto enc = codec::encode(
        runs[s].video, encoder_config(config.camera, codec::ConstantQp{config.qp_grid[q]}));
    const auto dec = codec::decode(enc.stream, codec::DecodeMode::Intervention);
    const auto evidence = pipeline::prepare_evidence(dec);
    const auto pces = pipeline::single_frame_pce(evidence, runs[s].profile.k_true);
    auto& cell = cells[job];
    for (std::size_t i = 0; i < evidence.size(); ++i)
      cell.pce[static_cast<int>(evidence[i].type)].push_back(pces[i]);
    for (const auto& m : enc.meta)
      cell.energy[static_cast<int>(enc.frame_types[m.frame_index])].push_back(m.residual_energy);
  });

  FrameTypeResult result;
  for (std::size_t q = 0; q < nq; ++q) {
    std::vector<double> pce[3], energy[3];
    for (std::size_t s = 0; s < ns; ++s)
      for (int t = 0; t < 3; ++t) {
        const auto& c = cells[q * ns + s];
        pce[t].insert(pce[t].end(), c.pce[t].begin(), c.pce[t].end());
        energy[t].insert(energy[t].end(), c.energy[t].begin(), c.energy[t].end());
      }
    const double i_mean = mean(pce[0]);
    for (int t = 0; t < 3; ++t) {
      const double m = mean(pce[t]);
      result.rows.push_back({config.qp_grid[q], static_cast<codec::FrameType>(t), m,
                             i_mean > 0.0 ? m / i_mean : 0.0, mean(energy[t])});
    }
  }

  auto& r = result.report;
  r.name = "frame-type";
  r.seeds = config.seeds;
  echo_camera(r, config.camera);
  r.config.emplace_back("frames", std::to_string(config.frames));
  r.config.emplace_back("qp_grid", join(config.qp_grid));
  r.columns = {"qp", "type", "normalized_pce", "mean_pce", "mean_residual_energy"};
  for (const auto& row : result.rows)
    r.rows.push_back({std::to_string(row.qp), std::string(1, codec::to_char(row.type)),
                      format_number(row.normalized_pce), format_number(row.mean_pce),
                      format_number(row.mean_residual_energy)});
  return result;
}

MinDurationResult exp_min_duration(const MinDurationConfig& config) {
  if (config.bitrates.empty())
    throw ConfigError("bitrate grid is empty");
  if (config.max_seconds <= 0)
    throw ConfigError("max seconds must be positive");

  const int fps = static_cast<int>(config.camera.fps);
  const auto runs =
      simulate_seeds(config.camera, config.seeds, config.max_seconds * fps, config.threads);
  std::vector<double> bitrates = config.bitrates;
  std::sort(bitrates.begin(), bitrates.end());
  const std::size_t nb = bitrates.size();
  const std::size_t ns = runs.size();
  constexpr Method kMethods[3] = {Method::Basic, Method::LoopComp, Method::Weighting};

  // seconds[job][method]; 0 means censored.
  std::vector<std::array<int, 3>> seconds(nb * ns);
  parallel_for(nb * ns, config.threads, [&](std::size_t job) {
    const std::size_t b = job / ns;
    const std::size_t s = job % ns;
    const auto enc = codec::encode(
        runs[s].video, encoder_config(config.camera, codec::TargetBitrate{bitrates[b]}));
    const auto filtered =
        pipeline::prepare_evidence(codec::decode(enc.stream, codec::DecodeMode::Filtered));
    const auto unfiltered =
        pipeline::prepare_evidence(codec::decode(enc.stream, codec::DecodeMode::Intervention));

    for (int m = 0; m < 3; ++m) {
      const auto& frames = kMethods[m] == Method::Basic ? filtered : unfiltered;
      pipeline::EstimateOptions options;
      if (kMethods[m] == Method::Weighting)
        options.compensation = pipeline::Compensation::Weight;
      core::Accumulator acc(config.camera.width, config.camera.height);
      seconds[job][m] = 0;
      std::size_t next = 0;
      for (int sec = 1; sec <= config.max_seconds; ++sec) {
        for (; next < frames.size() && frames[next].display_index < sec * fps; ++next)
          acc.accumulate(frames[next].intensity, frames[next].residue,
                         pipeline::frame_weights(frames[next], options));
        const auto pattern = core::postprocess(core::finalize(acc));
        if (core::pce(pattern, runs[s].profile.k_true).pce >= config.threshold) {
          seconds[job][m] = sec;
          break;
        }
      }
    }
  });

  MinDurationResult result;
  for (std::size_t b = 0; b < nb; ++b)
    for (int m = 0; m < 3; ++m) {
      MinDurationRow row;
      row.bitrate = bitrates[b];
      row.method = kMethods[m];
      double total = 0.0;
      for (std::size_t s = 0; s < ns; ++s) {
        const int sec = seconds[b * ns + s][m];
        if (sec == 0)
          ++row.censored;
        total += sec == 0 ? config.max_seconds : sec;
      }
      row.mean_seconds = total / static_cast<double>(ns);
      result.rows.push_back(row);
    }

  auto& r = result.report;
  r.name = "min-duration";
  r.seeds = config.seeds;
  echo_camera(r, config.camera);
  r.config.emplace_back("threshold", format_number(config.threshold));
  r.config.emplace_back("max_seconds", std::to_string(config.max_seconds));
  r.config.emplace_back("bitrates", join(bitrates));
  r.columns = {"bitrate", "method", "mean_seconds", "censored"};
  for (const auto& row : result.rows)
    r.rows.push_back({format_number(row.bitrate), to_string(row.method),
                      format_number(row.mean_seconds), std::to_string(row.censored)});
  return result;
}

} // namespace prnu::exp
