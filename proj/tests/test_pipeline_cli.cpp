#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <iterator>
#include <sstream>

#include "helpers.hpp"
#include "prnu/codec/decoder.hpp"
#include "prnu/codec/encoder.hpp"
#include "prnu/core.hpp"
#include "prnu/error.hpp"
#include "prnu/experiments.hpp"
#include "prnu/frame_io.hpp"
#include "prnu/pipeline.hpp"

using namespace prnu;

#ifndef PRNU_CLI
#error "PRNU_CLI must point at the built command-line tool"
#endif

namespace {

int run(const std::string& args, const std::filesystem::path& log = {}) {
  std::string cmd = std::string(PRNU_CLI) + " " + args;
  cmd += log.empty() ? " >/dev/null 2>&1" : " >" + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

codec::EncoderConfig constant(int qp) {
  codec::EncoderConfig c;
  c.rate_mode = codec::ConstantQp{qp};
  return c;
}

// First CSV row after the header of a match listing.
std::vector<std::string> match_rows(const std::string& csv) {
  std::vector<std::string> rows;
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line))
    rows.push_back(line);
  return rows;
}

std::string field(const std::string& row, int index) {
  std::istringstream in(row);
  std::string f;
  for (int i = 0; i <= index; ++i)
    std::getline(in, f, ',');
  return f;
}

} // namespace

TEST_CASE("cli: simulate/encode/fingerprint equal the library composition") {
  testutil::TempDir dir("cli_golden");
  REQUIRE(run("--seed 5 --out " + q(dir / "v.prvw") +
              " simulate --width 64 --height 64 --frames 12 --k-strength 0.03 --pattern-out " +
              q(dir / "k.prnk")) == 0);

  const auto profile = sim::make_profile(5, 64, 64, 0.03, 2.0);
  sim::SceneConfig scene;
  scene.seed = 5;
  const auto video = sim::simulate_video(scene, profile, 12);
  CHECK(io::read_raw_video(dir / "v.prvw") == video);
  CHECK(io::read_pattern(dir / "k.prnk") == io::to_float_precision(profile.k_true));

  for (int qp : {1, 25}) {
    const auto stream = dir / ("s" + std::to_string(qp) + ".prvc");
    REQUIRE(run("--out " + q(stream) + " encode " + q(dir / "v.prvw") + " --qp " +
                std::to_string(qp)) == 0);
    const auto enc = codec::encode(video, constant(qp));
    CHECK(codec::Bitstream::read(stream) == enc.stream);

    // Basic: filtered decode, no compensation.
    REQUIRE(run("--out " + q(dir / "basic.prnk") + " fingerprint " + q(stream)) == 0);
    pipeline::EstimateOptions basic;
    const auto ev = pipeline::prepare_evidence(codec::decode(enc.stream, codec::DecodeMode::Filtered));
    CHECK(io::read_pattern(dir / "basic.prnk") ==
          io::to_float_precision(pipeline::estimate(ev, basic)));

    // Intervention with weighting, across thread counts.
    REQUIRE(run("--threads 3 --out " + q(dir / "w.prnk") + " fingerprint " + q(stream) +
                " --intervention --compensation weight") == 0);
    pipeline::EstimateOptions weighted;
    weighted.compensation = pipeline::Compensation::Weight;
    const auto evi =
        pipeline::prepare_evidence(codec::decode(enc.stream, codec::DecodeMode::Intervention));
    CHECK(io::read_pattern(dir / "w.prnk") ==
          io::to_float_precision(pipeline::estimate(evi, weighted)));
  }

  // export-meta prints the decoder metadata.
  REQUIRE(run("--out " + q(dir / "meta.csv") + " export-meta " + q(dir / "s25.prvc")) == 0);
  const auto dec = codec::decode(codec::Bitstream::read(dir / "s25.prvc"), codec::DecodeMode::Filtered);
  CHECK(slurp(dir / "meta.csv") == io::format_mb_metadata(dec.meta));

  // decode writes the chosen output.
  REQUIRE(run("--out " + q(dir / "d.prvw") + " decode " + q(dir / "s25.prvc") +
              " --mode intervention") == 0);
  const auto inter = codec::decode(codec::Bitstream::read(dir / "s25.prvc"),
                                   codec::DecodeMode::Intervention);
  CHECK(io::read_raw_video(dir / "d.prvw").frames == inter.frames);
}

TEST_CASE("cli: exit codes") {
  testutil::TempDir dir("cli_exit");
  CHECK(run("") == 1);
  CHECK(run("no-such-command") == 1);
  CHECK(run("encode") == 1);
  CHECK(run("--threads 0 simulate") == 1);
  CHECK(run("simulate --frames 2") == 1); // no --out
  CHECK(run("--out " + q(dir / "x") + " simulate --scene swirl --frames 2") == 1);
  CHECK(run("--out " + q(dir / "x") + " encode " + q(dir / "missing.prvw")) == 2);

  REQUIRE(run("--out " + q(dir / "v.prvw") + " simulate --width 64 --height 64 --frames 6") == 0);
  REQUIRE(run("--out " + q(dir / "s.prvc") + " encode " + q(dir / "v.prvw") + " --qp 20") == 0);
  // Missing weight curve is a configuration error.
  CHECK(run("--out " + q(dir / "k.prnk") + " fingerprint " + q(dir / "s.prvc") +
            " --compensation weight --curve " + q(dir / "nope.csv")) == 1);
  // A raw file pretending to be a stream is a data error.
  {
    std::ofstream junk(dir / "junk.prvc", std::ios::binary);
    junk << "PRVCgarbage";
  }
  CHECK(run("--out " + q(dir / "k.prnk") + " fingerprint " + q(dir / "junk.prvc")) == 2);

  REQUIRE(run("fingerprint " + q(dir / "s.prvc") + " --store " + q(dir / "store") +
              " --camera-id cam") == 0);
  CHECK(run("fingerprint " + q(dir / "s.prvc") + " --store " + q(dir / "store") +
            " --camera-id cam") == 2); // duplicate id
  CHECK(run("match " + q(dir / "s.prvc") + " --store " + q(dir / "store") +
            " --camera-id ghost") == 2);
  CHECK(run("match " + q(dir / "s.prvc") + " --store " + q(dir / "store")) == 0);
  CHECK(run("match " + q(dir / "s.prvc") + " --store " + q(dir / "store") + " --verify") == 0);
  CHECK(run("match " + q(dir / "s.prvc") + " --store " + q(dir / "store") +
            " --threshold 1e9 --verify") == 3);
}

TEST_CASE("cli: gallery ranks the source camera first") {
  testutil::TempDir dir("cli_gallery");
  const std::string store = q(dir / "store");
  const std::vector<std::string> cams{"A", "B", "C"};
  for (std::size_t i = 0; i < cams.size(); ++i) {
    const auto seed = std::to_string(10 + i);
    const auto enroll = dir / (cams[i] + "_enroll.prvw");
    REQUIRE(run("--seed " + seed + " --out " + q(enroll) +
                " simulate --width 128 --height 128 --frames 30 --scene-seed 1" + seed) == 0);
    REQUIRE(run("fingerprint " + q(enroll) + " --store " + store + " --camera-id " + cams[i]) == 0);
  }
  // Test video: camera B's sensor, different content, coded at qp 24.
  REQUIRE(run("--seed 11 --out " + q(dir / "t.prvw") +
              " simulate --width 128 --height 128 --frames 30 --scene-seed 999") == 0);
  REQUIRE(run("--out " + q(dir / "t.prvc") + " encode " + q(dir / "t.prvw") + " --qp 24") == 0);
  REQUIRE(run("--out " + q(dir / "m.csv") + " match " + q(dir / "t.prvc") + " --store " + store +
              " --intervention --compensation weight --verify") == 0);
  const auto rows = match_rows(slurp(dir / "m.csv"));
  REQUIRE(rows.size() == 3);
  CHECK(field(rows[0], 1) == "B");
  CHECK(std::stod(field(rows[0], 2)) >= 60.0);
  CHECK(field(rows[0], 6) == "yes");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(std::stod(field(rows[i], 2)) < 60.0);
    CHECK(field(rows[i], 6) == "no");
  }

  // A sensor without a pattern matches nothing.
  REQUIRE(run("--seed 50 --out " + q(dir / "flat.prvw") +
              " simulate --width 128 --height 128 --frames 30 --k-strength 0") == 0);
  CHECK(run("match " + q(dir / "flat.prvw") + " --store " + store + " --verify") == 3);
}

TEST_CASE("pipeline: masks and weights follow macroblock qp") {
  const auto v = testutil::sim_video(64, 64, 6, 3);
  auto enc = codec::encode(v, constant(30));
  const auto ev = pipeline::prepare_evidence(codec::decode(enc.stream, codec::DecodeMode::Filtered));
  REQUIRE(ev.size() == 6);
  pipeline::EstimateOptions o;
  CHECK(pipeline::frame_weights(ev[0], o).sum() == 64.0 * 64);
  o.compensation = pipeline::Compensation::Mask;
  CHECK(pipeline::frame_weights(ev[0], o).sum() == 0.0);
  o.mask_threshold_qp = 30;
  CHECK(pipeline::frame_weights(ev[0], o).sum() == 64.0 * 64);
  o.compensation = pipeline::Compensation::Weight;
  CHECK(pipeline::frame_weights(ev[0], o).sum() == 0.0);

  CHECK(pipeline::compensation_from_string("weight") == pipeline::Compensation::Weight);
  CHECK(pipeline::to_string(pipeline::Compensation::Mask) == "mask");
  CHECK_THROWS_AS(pipeline::compensation_from_string("magic"), ConfigError);
}

TEST_CASE("pipeline: estimate is independent of the thread count") {
  const auto v = testutil::sim_video(64, 64, 10, 4);
  const auto ev = pipeline::prepare_evidence(v);
  pipeline::EstimateOptions o;
  const auto one = pipeline::estimate(ev, o);
  o.threads = 4;
  CHECK(pipeline::estimate(ev, o) == one);
  CHECK(pipeline::prepare_evidence(v, {}, 3).size() == ev.size());
  CHECK(pipeline::prepare_evidence(v, {}, 3)[5].residue == ev[5].residue);
}

TEST_CASE("pipeline: intervention with weighting beats basic on qp-25 content") {
  const exp::CameraConfig camera;
  const auto profile = exp::camera_profile(camera, 1);
  const auto v = sim::simulate_video(exp::camera_scene(camera, 1), profile, 25);
  const auto enc = codec::encode(v, constant(25));
  pipeline::EstimateOptions basic;
  pipeline::EstimateOptions weighted;
  weighted.compensation = pipeline::Compensation::Weight;
  const auto b = pipeline::estimate(
      pipeline::prepare_evidence(codec::decode(enc.stream, codec::DecodeMode::Filtered)), basic);
  const auto w = pipeline::estimate(
      pipeline::prepare_evidence(codec::decode(enc.stream, codec::DecodeMode::Intervention)),
      weighted);
  const double pb = core::pce(b, profile.k_true).pce;
  const double pw = core::pce(w, profile.k_true).pce;
  INFO("basic " << pb << " weighted " << pw);
  CHECK(pw > pb);
}

TEST_CASE("experiments: deterministic and thread-independent CSV") {
  exp::CameraConfig small;
  small.width = 64;
  small.height = 64;

  exp::QpSweepConfig qs;
  qs.camera = small;
  qs.qp_grid = {10, 15, 30};
  qs.seeds = {1, 2};
  qs.frames = 6;
  const auto a = exp::exp_qp_sweep(qs);
  qs.threads = 3;
  const auto b = exp::exp_qp_sweep(qs);
  CHECK(a.report.to_csv() == b.report.to_csv());
  REQUIRE(a.rows.size() == 3);
  CHECK(a.rows[1].normalized_pce == 1.0);
  CHECK(a.report.to_csv().rfind("# experiment=", 0) == 0);
  CHECK(a.report.to_csv().find("\nqp,mean_pce,normalized_pce\n") != std::string::npos);

  exp::MethodCompareConfig mc;
  mc.camera = small;
  mc.bitrates = {100000, 2000000};
  mc.seeds = {1};
  mc.seconds = 1;
  const auto m1 = exp::exp_method_compare(mc);
  mc.threads = 2;
  CHECK(exp::exp_method_compare(mc).report.to_csv() == m1.report.to_csv());
  CHECK(m1.rows.size() == 2);
  CHECK(m1.rows[0].mean_qp > m1.rows[1].mean_qp);

  exp::FrameTypeConfig ft;
  ft.camera = small;
  ft.qp_grid = {20};
  ft.seeds = {1};
  ft.frames = 9;
  const auto f1 = exp::exp_frame_type(ft);
  CHECK(exp::exp_frame_type(ft).report.to_csv() == f1.report.to_csv());
  REQUIRE(f1.rows.size() == 3);
  CHECK(f1.rows[0].type == codec::FrameType::I);
  CHECK(f1.rows[0].normalized_pce == 1.0);

  exp::MinDurationConfig md;
  md.camera = small;
  md.camera.k_strength = 0.01;
  md.bitrates = {40000000};
  md.seeds = {1};
  md.max_seconds = 2;
  const auto d1 = exp::exp_min_duration(md);
  md.threads = 2;
  CHECK(exp::exp_min_duration(md).report.to_csv() == d1.report.to_csv());
  REQUIRE(d1.rows.size() == 3);
  for (const auto& r : d1.rows) {
    CHECK(r.mean_seconds == 1.0); // near-lossless: one second suffices
    CHECK(r.censored == 0);
  }
}

TEST_CASE("cli: experiment output equals the library report") {
  testutil::TempDir dir("cli_exp");
  REQUIRE(run("--seed 4 --out " + q(dir / "qs.csv") +
              " exp-qp-sweep --width 64 --height 64 --frames 4 --qp-grid 15 25") == 0);
  exp::QpSweepConfig qs;
  qs.camera.width = 64;
  qs.camera.height = 64;
  qs.frames = 4;
  qs.qp_grid = {15, 25};
  qs.seeds = {4, 5, 6};
  CHECK(slurp(dir / "qs.csv") == exp::exp_qp_sweep(qs).report.to_csv());
  CHECK(run("--out " + q(dir / "x.csv") + " exp-qp-sweep --qp-grid 20 25") == 1);
}
