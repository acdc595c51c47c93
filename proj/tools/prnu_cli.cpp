#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "prnu/codec/decoder.hpp"
#include "prnu/codec/encoder.hpp"
#include "prnu/error.hpp"
#include "prnu/experiments.hpp"
#include "prnu/frame_io.hpp"
#include "prnu/pipeline.hpp"
#include "prnu/qp_comp.hpp"
#include "prnu/sensor_sim.hpp"

namespace {

using namespace prnu;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNoMatch = 3;

struct Globals {
  std::uint64_t seed = 1;
  int threads = 1;
  std::string out;
};

std::string require_out(const Globals& g, const char* what) {
  if (g.out.empty())
    throw ConfigError(std::string(what) + " needs --out");
  return g.out;
}

// Writes to --out when given, else stdout.
void emit(const Globals& g, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(g.out, std::ios::binary);
  if (!f)
    throw IoError("cannot write " + g.out);
  f << text;
}

std::string file_magic(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("cannot open " + path);
  char m[4] = {};
  in.read(m, 4);
  return std::string(m, static_cast<std::size_t>(in.gcount()));
}

sim::SceneKind scene_kind(const std::string& s) {
  if (s == "smooth")
    return sim::SceneKind::SmoothGradient;
  if (s == "texture")
    return sim::SceneKind::Texture;
  if (s == "mixed")
    return sim::SceneKind::Mixed;
  throw ConfigError("unknown scene '" + s + "' (expected smooth, texture or mixed)");
}

codec::DecodeMode decode_mode(const std::string& s) {
  if (s == "filtered")
    return codec::DecodeMode::Filtered;
  if (s == "intervention")
    return codec::DecodeMode::Intervention;
  throw ConfigError("unknown decode mode '" + s + "' (expected filtered or intervention)");
}

struct EstimateFlags {
  bool intervention = false;
  std::string compensation = "none";
  std::string curve_path;
  int mask_threshold = comp::kDefaultMaskThreshold;

  void add(CLI::App* cmd) {
    cmd->add_flag("--intervention", intervention,
                  "decode with loop-filter compensation (unfiltered output)");
    cmd->add_option("--compensation", compensation, "none, mask or weight")
        ->check(CLI::IsMember({"none", "mask", "weight"}));
    cmd->add_option("--curve", curve_path, "weight curve CSV (default: built-in curve)");
    cmd->add_option("--mask-threshold", mask_threshold, "highest qp kept by masking");
  }

  pipeline::EstimateOptions options(int threads) const {
    pipeline::EstimateOptions o;
    o.compensation = pipeline::compensation_from_string(compensation);
    o.mask_threshold_qp = mask_threshold;
    if (!curve_path.empty())
      o.curve = comp::read_curve_csv(curve_path);
    o.threads = threads;
    return o;
  }

  std::string method_tag() const {
    return std::string(intervention ? "intervention" : "filtered") + "+" + compensation;
  }
};

struct Estimate {
  PrnuPattern pattern;
  int frames = 0;
};

// Stream input: decode then estimate. Raw input: estimate straight from the
// frames; compensation needs coding metadata, so only "none" applies.
Estimate estimate_file(const std::string& path, const EstimateFlags& flags, int threads) {
  const auto options = flags.options(threads);
  const std::string magic = file_magic(path);
  std::vector<pipeline::FrameEvidence> evidence;
  if (magic == "PRVC") {
    const auto stream = codec::Bitstream::read(path);
    const auto decoded = codec::decode(
        stream, flags.intervention ? codec::DecodeMode::Intervention : codec::DecodeMode::Filtered);
    evidence = pipeline::prepare_evidence(decoded, options.denoise, threads);
  } else if (magic == "PRVW") {
    if (options.compensation != pipeline::Compensation::None)
      throw ConfigError("mask/weight compensation needs a coded stream, not raw video");
    evidence = pipeline::prepare_evidence(io::read_raw_video(path), options.denoise, threads);
  } else {
    throw FormatError(path + ": neither a PRVC stream nor a PRVW video");
  }
  return {pipeline::estimate(evidence, options), static_cast<int>(evidence.size())};
}

struct CameraFlags {
  int width = 256;
  int height = 256;
  std::uint32_t fps = 25;
  double k_strength = 0.03;
  double theta = 2.0;
  std::string scene = "mixed";
  double drift_x = 1.0;
  double drift_y = 1.0;
  double contrast = 40.0;
  double mean = 128.0;

  void add(CLI::App* cmd) {
    cmd->add_option("--width", width, "frame width (multiple of 16)");
    cmd->add_option("--height", height, "frame height (multiple of 16)");
    cmd->add_option("--fps", fps, "frames per second");
    cmd->add_option("--k-strength", k_strength, "std of the sensor factor");
    cmd->add_option("--theta", theta, "std of temporal noise");
    cmd->add_option("--scene", scene, "smooth, texture or mixed");
    cmd->add_option("--drift-x", drift_x, "content motion per frame, px");
    cmd->add_option("--drift-y", drift_y, "content motion per frame, px");
    cmd->add_option("--contrast", contrast, "scene contrast");
    cmd->add_option("--mean", mean, "scene mean intensity");
  }

  exp::CameraConfig camera() const {
    exp::CameraConfig c;
    c.width = width;
    c.height = height;
    c.fps = fps;
    c.k_strength = k_strength;
    c.theta_std = theta;
    c.scene.kind = scene_kind(scene);
    c.scene.drift_x = drift_x;
    c.scene.drift_y = drift_y;
    c.scene.contrast = contrast;
    c.scene.mean_intensity = mean;
    return c;
  }
};

std::vector<std::uint64_t> seeds_or_default(const std::vector<std::uint64_t>& given,
                                            std::uint64_t seed) {
  if (!given.empty())
    return given;
  return {seed, seed + 1, seed + 2};
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"PRNU estimation from block-coded video"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "base random seed")->capture_default_str();
  app.add_option("--threads", g.threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", g.out, "output path");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "render a synthetic sensor video");
  CameraFlags sim_camera;
  sim_camera.add(simulate);
  int sim_frames = 100;
  std::optional<std::uint64_t> sim_scene_seed;
  std::string sim_pattern_out;
  simulate->add_option("--frames", sim_frames, "number of frames")->check(CLI::PositiveNumber);
  simulate->add_option("--scene-seed", sim_scene_seed, "scene seed (default: --seed)");
  simulate->add_option("--pattern-out", sim_pattern_out, "also write the true sensor factor");

  // encode
  auto* encode = app.add_subcommand("encode", "encode a raw video");
  std::string enc_in, enc_meta_out, enc_gop = "IBP";
  std::optional<int> enc_qp;
  std::optional<double> enc_bitrate;
  int enc_initial_qp = 26, enc_range = 8;
  bool enc_no_deblock = false;
  encode->add_option("input", enc_in, "PRVW video")->required();
  auto* qp_opt = encode->add_option("--qp", enc_qp, "constant qp")->check(CLI::Range(1, 51));
  encode->add_option("--bitrate", enc_bitrate, "target bits per second")
      ->excludes(qp_opt)
      ->check(CLI::PositiveNumber);
  encode->add_option("--initial-qp", enc_initial_qp, "starting qp under rate control")
      ->check(CLI::Range(1, 51));
  encode->add_option("--gop", enc_gop, "GOP pattern, display order");
  encode->add_option("--search-range", enc_range, "motion search range, px");
  encode->add_flag("--no-deblock", enc_no_deblock, "disable the loop filter");
  encode->add_option("--meta-out", enc_meta_out, "macroblock metadata CSV");

  // decode
  auto* decode = app.add_subcommand("decode", "decode a stream to raw video");
  std::string dec_in, dec_mode = "filtered";
  bool dec_i_only = false;
  int dec_first_gop = 0;
  decode->add_option("input", dec_in, "PRVC stream")->required();
  decode->add_option("--mode", dec_mode, "filtered or intervention")
      ->check(CLI::IsMember({"filtered", "intervention"}));
  decode->add_flag("--i-only", dec_i_only, "decode I frames only");
  decode->add_option("--first-gop", dec_first_gop, "start decoding at this GOP");

  // fingerprint
  auto* fingerprint = app.add_subcommand("fingerprint", "estimate a sensor pattern");
  std::string fp_in, fp_store, fp_camera;
  EstimateFlags fp_flags;
  fingerprint->add_option("input", fp_in, "PRVC stream or PRVW video")->required();
  fp_flags.add(fingerprint);
  auto* store_opt = fingerprint->add_option("--store", fp_store, "enroll into this store");
  fingerprint->add_option("--camera-id", fp_camera, "camera id for enrollment")->needs(store_opt);

  // match
  auto* match = app.add_subcommand("match", "match a video against stored fingerprints");
  std::string m_in, m_store, m_camera = "all";
  double m_threshold = core::kMatchThreshold;
  bool m_verify = false;
  EstimateFlags m_flags;
  match->add_option("input", m_in, "PRVC stream or PRVW video")->required();
  match->add_option("--store", m_store, "fingerprint store directory")->required();
  match->add_option("--camera-id", m_camera, "camera id or 'all'");
  match->add_option("--threshold", m_threshold, "PCE match threshold");
  match->add_flag("--verify", m_verify, "exit 3 when nothing matches");
  m_flags.add(match);

  // calibrate
  auto* calibrate = app.add_subcommand("calibrate", "calibrate a qp weight curve");
  CameraFlags cal_camera;
  cal_camera.k_strength = exp::CameraConfig{}.k_strength;
  cal_camera.add(calibrate);
  std::vector<int> cal_grid{5, 10, 15, 20, 25, 30, 35};
  int cal_frames = 30;
  std::string cal_video, cal_reference;
  calibrate->add_option("--qp-grid", cal_grid, "qp values (must include 15)");
  calibrate->add_option("--frames", cal_frames, "frames per simulated video");
  auto* cal_video_opt = calibrate->add_option("--video", cal_video, "raw video to encode");
  calibrate->add_option("--reference", cal_reference, "reference pattern for --video")
      ->needs(cal_video_opt);
  cal_video_opt->needs("--reference");

  // export-meta
  auto* export_meta = app.add_subcommand("export-meta", "dump macroblock metadata as CSV");
  std::string em_in;
  export_meta->add_option("input", em_in, "PRVC stream")->required();

  // experiments
  auto* qp_sweep = app.add_subcommand("exp-qp-sweep", "single-frame PCE against qp");
  exp::QpSweepConfig qs_cfg;
  CameraFlags qs_camera;
  qs_camera.k_strength = qs_cfg.camera.k_strength;
  qs_camera.add(qp_sweep);
  std::vector<std::uint64_t> qs_seeds;
  qp_sweep->add_option("--qp-grid", qs_cfg.qp_grid, "qp values (must include 15)");
  qp_sweep->add_option("--frames", qs_cfg.frames, "frames per video");
  qp_sweep->add_option("--seeds", qs_seeds, "seeds (default: seed, seed+1, seed+2)");

  auto* method_compare = app.add_subcommand("exp-method-compare", "compare estimation methods");
  exp::MethodCompareConfig mc_cfg;
  CameraFlags mc_camera;
  mc_camera.k_strength = mc_cfg.camera.k_strength;
  mc_camera.add(method_compare);
  std::vector<std::uint64_t> mc_seeds;
  method_compare->add_option("--bitrates", mc_cfg.bitrates, "bits per second");
  method_compare->add_option("--seconds", mc_cfg.seconds, "video duration");
  method_compare->add_option("--seeds", mc_seeds, "seeds (default: seed, seed+1, seed+2)");

  auto* frame_type = app.add_subcommand("exp-frame-type", "PCE by frame type");
  exp::FrameTypeConfig ft_cfg;
  CameraFlags ft_camera;
  ft_camera.k_strength = ft_cfg.camera.k_strength;
  ft_camera.add(frame_type);
  std::vector<std::uint64_t> ft_seeds;
  std::string ft_gop = "IBP";
  frame_type->add_option("--qp-grid", ft_cfg.qp_grid, "qp values");
  frame_type->add_option("--frames", ft_cfg.frames, "frames per video");
  frame_type->add_option("--gop", ft_gop, "GOP pattern");
  frame_type->add_option("--seeds", ft_seeds, "seeds (default: seed, seed+1, seed+2)");

  auto* min_duration = app.add_subcommand("exp-min-duration", "seconds needed to match");
  exp::MinDurationConfig md_cfg;
  CameraFlags md_camera;
  md_camera.k_strength = md_cfg.camera.k_strength;
  md_camera.add(min_duration);
  std::vector<std::uint64_t> md_seeds;
  min_duration->add_option("--bitrates", md_cfg.bitrates, "bits per second");
  min_duration->add_option("--max-seconds", md_cfg.max_seconds, "censoring cap");
  min_duration->add_option("--threshold", md_cfg.threshold, "PCE threshold");
  min_duration->add_option("--seeds", md_seeds, "seeds (default: seed, seed+1, seed+2)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (simulate->parsed()) {
      const auto camera = sim_camera.camera();
      const auto profile =
          sim::make_profile(g.seed, camera.width, camera.height, camera.k_strength, camera.theta_std);
      sim::SceneConfig scene = camera.scene;
      scene.seed = sim_scene_seed.value_or(g.seed);
      const auto video = sim::simulate_video(scene, profile, sim_frames, camera.fps);
      io::write_raw_video(video, require_out(g, "simulate"));
      if (!sim_pattern_out.empty())
        io::write_pattern(profile.k_true, sim_pattern_out);
    } else if (encode->parsed()) {
      codec::EncoderConfig cfg;
      cfg.gop_pattern = enc_gop;
      cfg.search_range = enc_range;
      cfg.deblock_enabled = !enc_no_deblock;
      cfg.initial_qp = enc_initial_qp;
      if (enc_bitrate)
        cfg.rate_mode = codec::TargetBitrate{*enc_bitrate};
      else
        cfg.rate_mode = codec::ConstantQp{enc_qp.value_or(26)};
      const auto result = codec::encode(io::read_raw_video(enc_in), cfg);
      result.stream.write(require_out(g, "encode"));
      if (!enc_meta_out.empty())
        io::export_mb_metadata(result.meta, enc_meta_out);
    } else if (decode->parsed()) {
      const auto stream = codec::Bitstream::read(dec_in);
      const auto mode = decode_mode(dec_mode);
      const auto out = dec_i_only ? codec::decode_i_frames_only(stream, mode)
                                  : codec::decode(stream, mode, {dec_first_gop});
      io::RawVideo video;
      video.width = stream.header.width;
      video.height = stream.header.height;
      video.fps_num = stream.header.fps_num;
      video.fps_den = stream.header.fps_den;
      video.frames = out.frames;
      io::write_raw_video(video, require_out(g, "decode"));
    } else if (fingerprint->parsed()) {
      if (!fp_store.empty() && fp_camera.empty())
        throw ConfigError("enrollment needs --camera-id");
      const auto est = estimate_file(fp_in, fp_flags, g.threads);
      if (!g.out.empty())
        io::write_pattern(est.pattern, g.out);
      if (!fp_store.empty())
        io::FingerprintStore(fp_store).store(
            {fp_camera, est.pattern, fp_in, fp_flags.method_tag(), est.frames});
      if (g.out.empty() && fp_store.empty())
        throw ConfigError("fingerprint needs --out or --store");
    } else if (match->parsed()) {
      const io::FingerprintStore store(m_store);
      std::vector<std::string> ids;
      if (m_camera == "all")
        ids = store.camera_ids();
      else
        ids = {m_camera};
      std::vector<io::FingerprintRecord> records;
      for (const auto& id : ids)
        records.push_back(store.load(id));
      if (records.empty())
        throw NotFoundError("fingerprint store is empty");

      const auto est = estimate_file(m_in, m_flags, g.threads);
      struct Ranked {
        std::string id;
        core::PceResult r;
      };
      std::vector<Ranked> ranked;
      for (const auto& rec : records)
        ranked.push_back({rec.camera_id, core::pce(est.pattern, rec.pattern)});
      std::stable_sort(ranked.begin(), ranked.end(),
                       [](const Ranked& a, const Ranked& b) { return a.r.pce > b.r.pce; });

      std::string text = "rank,camera_id,pce,peak_corr,peak_row,peak_col,match\n";
      bool any = false;
      for (std::size_t i = 0; i < ranked.size(); ++i) {
        const auto& r = ranked[i].r;
        const bool hit = r.pce >= m_threshold;
        any = any || hit;
        text += std::to_string(i + 1) + "," + ranked[i].id + "," + exp::format_number(r.pce) +
                "," + exp::format_number(r.peak_corr) + "," + std::to_string(r.peak_row) + "," +
                std::to_string(r.peak_col) + "," + (hit ? "yes" : "no") + "\n";
      }
      emit(g, text);
      std::cerr << (any ? "match: " + ranked.front().id : std::string("no match")) << '\n';
      if (m_verify && !any)
        return kExitNoMatch;
    } else if (calibrate->parsed()) {
      std::map<int, codec::DecodeOutput> decoded;
      PrnuPattern reference;
      io::RawVideo video;
      if (!cal_video.empty()) {
        video = io::read_raw_video(cal_video);
        reference = io::read_pattern(cal_reference);
      } else {
        const auto camera = cal_camera.camera();
        const auto profile = exp::camera_profile(camera, g.seed);
        reference = profile.k_true;
        video = sim::simulate_video(exp::camera_scene(camera, g.seed), profile, cal_frames,
                                    camera.fps);
      }
      for (int qp : cal_grid) {
        codec::EncoderConfig cfg;
        cfg.rate_mode = codec::ConstantQp{qp};
        decoded[qp] = codec::decode(codec::encode(video, cfg).stream,
                                    codec::DecodeMode::Intervention);
      }
      const auto curve = pipeline::calibrate_curve(reference, decoded, g.threads);
      comp::write_curve_csv(curve, require_out(g, "calibrate"));
    } else if (export_meta->parsed()) {
      const auto out = codec::decode(codec::Bitstream::read(em_in), codec::DecodeMode::Filtered);
      emit(g, io::format_mb_metadata(out.meta));
    } else if (qp_sweep->parsed()) {
      qs_cfg.camera = qs_camera.camera();
      qs_cfg.seeds = seeds_or_default(qs_seeds, g.seed);
      qs_cfg.threads = g.threads;
      emit(g, exp::exp_qp_sweep(qs_cfg).report.to_csv());
    } else if (method_compare->parsed()) {
      mc_cfg.camera = mc_camera.camera();
      mc_cfg.seeds = seeds_or_default(mc_seeds, g.seed);
      mc_cfg.threads = g.threads;
      emit(g, exp::exp_method_compare(mc_cfg).report.to_csv());
    } else if (frame_type->parsed()) {
      ft_cfg.camera = ft_camera.camera();
      ft_cfg.camera.gop_pattern = ft_gop;
      ft_cfg.seeds = seeds_or_default(ft_seeds, g.seed);
      ft_cfg.threads = g.threads;
      emit(g, exp::exp_frame_type(ft_cfg).report.to_csv());
    } else if (min_duration->parsed()) {
      md_cfg.camera = md_camera.camera();
      md_cfg.seeds = seeds_or_default(md_seeds, g.seed);
      md_cfg.threads = g.threads;
      emit(g, exp::exp_min_duration(md_cfg).report.to_csv());
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}
