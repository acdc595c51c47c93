#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "helpers.hpp"
#include "prnu/codec/bitio.hpp"
#include "prnu/codec/bitstream.hpp"
#include "prnu/codec/deblock.hpp"
#include "prnu/codec/decoder.hpp"
#include "prnu/codec/encoder.hpp"
#include "prnu/codec/prediction.hpp"
#include "prnu/codec/rate_control.hpp"
#include "prnu/codec/transform.hpp"
#include "prnu/error.hpp"

using namespace prnu;
using namespace prnu::codec;

namespace {

Block4x4 random_block(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  Block4x4 b{};
  for (auto& v : b)
    v = d(rng);
  return b;
}

double mse(const BytePlane& a, const BytePlane& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = double(a.samples()[i]) - double(b.samples()[i]);
    s += d * d;
  }
  return s / static_cast<double>(a.size());
}

EncoderConfig constant(int qp, std::string gop = "IBP") {
  EncoderConfig c;
  c.gop_pattern = std::move(gop);
  c.rate_mode = ConstantQp{qp};
  return c;
}

EncoderConfig bitrate(double bps, std::string gop = "IBP") {
  EncoderConfig c;
  c.gop_pattern = std::move(gop);
  c.rate_mode = TargetBitrate{bps};
  return c;
}

double mean(const std::vector<int>& v) {
  double s = 0.0;
  for (int x : v)
    s += x;
  return s / static_cast<double>(v.size());
}

} // namespace

TEST_CASE("qstep anchors and doubling") {
  CHECK(qp_to_qstep(4) == 1.0);
  CHECK(qp_to_qstep(10) == 2.0);
  CHECK(qp_to_qstep(16) == 4.0);
  CHECK(qp_to_qstep(28) == 16.0);
  for (int qp = 1; qp + 6 <= 51; ++qp)
    CHECK(qp_to_qstep(qp + 6) == 2.0 * qp_to_qstep(qp));
  for (int qp = 1; qp <= 51; ++qp)
    CHECK(qp_to_qstep(qp) == doctest::Approx(std::pow(2.0, (qp - 4) / 6.0)).epsilon(1e-14));
  CHECK_THROWS_AS(qp_to_qstep(0), ConfigError);
  CHECK_THROWS_AS(qp_to_qstep(52), ConfigError);
}

TEST_CASE("transform: zero, DC-only and roundtrip") {
  const auto zero = forward_transform_4x4(Block4x4{});
  for (double c : zero)
    CHECK(c == 0.0);

  Block4x4 flat;
  flat.fill(37.0);
  const auto dc = forward_transform_4x4(flat);
  CHECK(std::abs(dc[0]) > 1.0);
  for (int i = 1; i < 16; ++i)
    CHECK(std::abs(dc[static_cast<std::size_t>(i)]) < 1e-9);

  std::mt19937_64 rng(11);
  for (int t = 0; t < 500; ++t) {
    const auto x = random_block(rng, -255, 255);
    const auto c = forward_transform_4x4(x);
    const auto y = inverse_transform_4x4(c);
    double ex = 0.0, ec = 0.0;
    for (int i = 0; i < 16; ++i) {
      CHECK(std::abs(y[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(i)]) < 1e-9);
      ex += x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
      ec += c[static_cast<std::size_t>(i)] * c[static_cast<std::size_t>(i)];
    }
    CHECK(ec == doctest::Approx(ex).epsilon(1e-12));
  }
}

TEST_CASE("transform: zigzag is a permutation") {
  auto z = kZigzag4x4;
  std::ranges::sort(z);
  for (int i = 0; i < 16; ++i)
    CHECK(z[static_cast<std::size_t>(i)] == i);
}

TEST_CASE("quantize: rounding arithmetic") {
  Block4x4 c{};
  c[0] = 7.9;
  c[1] = -7.9;
  c[2] = 2.0;  // exactly half a step: ties away from zero
  c[3] = -2.0;
  c[4] = 1.99;
  const auto levels = quantize(c, 16);
  CHECK(levels[0] == 2);
  CHECK(levels[1] == -2);
  CHECK(levels[2] == 1);
  CHECK(levels[3] == -1);
  CHECK(levels[4] == 0);
  const auto back = dequantize(levels, 16);
  CHECK(back[0] == doctest::Approx(8.0));
  CHECK(back[1] == doctest::Approx(-8.0));
}

TEST_CASE("quantize: unit step rounds coefficients") {
  std::mt19937_64 rng(2);
  const auto c = random_block(rng, -100, 100);
  const auto levels = quantize(c, 4);
  const auto back = dequantize(levels, 4);
  for (int i = 0; i < 16; ++i) {
    const auto k = static_cast<std::size_t>(i);
    CHECK(levels[k] == static_cast<int>(std::lround(c[k])));
    CHECK(std::abs(back[k] - c[k]) <= 0.5 + 1e-12);
  }
}

TEST_CASE("quantize: error bound qstep/2 at every qp") {
  std::mt19937_64 rng(3);
  for (int qp = kMinQp; qp <= kMaxQp; ++qp) {
    const double step = qp_to_qstep(qp);
    for (int t = 0; t < 50; ++t) {
      const auto c = random_block(rng, -2000, 2000);
      const auto back = dequantize(quantize(c, qp), qp);
      for (int i = 0; i < 16; ++i) {
        const auto k = static_cast<std::size_t>(i);
        CHECK(std::abs(back[k] - c[k]) <= step / 2 + 1e-9);
      }
    }
  }
}

TEST_CASE("bitio: fixed width and exp-Golomb roundtrip") {
  BitWriter w;
  std::vector<std::uint64_t> ue{0, 1, 2, 3, 7, 8, 255, 1000000, (1ull << 40) + 5};
  std::vector<std::int64_t> se{0, 1, -1, 2, -2, 17, -300, 123456789, -987654321};
  w.put_bits(0b1011, 4);
  for (auto v : ue)
    w.put_ue(v);
  for (auto v : se)
    w.put_se(v);
  w.put_bit(true);
  w.align();
  w.put_bits(0xAB, 8);
  CHECK(w.bit_count() % 8 == 0);

  BitReader r(w.bytes());
  CHECK(r.get_bits(4) == 0b1011);
  for (auto v : ue)
    CHECK(r.get_ue() == v);
  for (auto v : se)
    CHECK(r.get_se() == v);
  CHECK(r.get_bit());
  r.align();
  CHECK(r.get_bits(8) == 0xAB);
  CHECK(r.remaining() == 0);
  CHECK_THROWS_AS(r.get_bit(), FormatError);
}

TEST_CASE("bitio: exp-Golomb code lengths") {
  // ue(v) takes 2*floor(log2(v+1)) + 1 bits.
  for (std::uint64_t v : {0ull, 1ull, 2ull, 6ull, 7ull, 100ull}) {
    BitWriter w;
    w.put_ue(v);
    const int lz = static_cast<int>(std::floor(std::log2(static_cast<double>(v + 1))));
    CHECK(w.bit_count() == 2 * lz + 1);
  }
  // A run of zeros with no terminating one is malformed.
  std::vector<std::uint8_t> zeros(2, 0);
  BitReader r(zeros);
  CHECK_THROWS_AS(r.get_ue(), FormatError);
}

TEST_CASE("intra: top-left macroblock predicts 128") {
  BytePlane recon(32, 32, 0);
  const auto source = testutil::random_bytes(32, 32, 1);
  const auto d = intra_predict(recon, source, 0, 0);
  CHECK(d.mode == IntraMode::DC);
  for (int v : d.prediction)
    CHECK(v == 128);
  CHECK_FALSE(intra_mode_available(IntraMode::Horizontal, 0, 0));
  CHECK_FALSE(intra_mode_available(IntraMode::Vertical, 0, 0));
  CHECK(intra_mode_available(IntraMode::Horizontal, 16, 0));
  CHECK(intra_mode_available(IntraMode::Vertical, 0, 16));
}

TEST_CASE("intra: constant frame predicts exactly away from the corner") {
  const BytePlane frame(48, 48, 90);
  for (int y = 0; y < 48; y += 16)
    for (int x = 0; x < 48; x += 16) {
      if (x == 0 && y == 0)
        continue;
      const auto d = intra_predict(frame, frame, x, y);
      CHECK(d.sse == 0);
      for (int v : d.prediction)
        CHECK(v == 90);
    }
}

TEST_CASE("intra: vertical stripes choose vertical mode") {
  BytePlane frame(64, 64);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x)
      frame(x, y) = static_cast<std::uint8_t>((x * 37) % 200 + 20);
  for (int y = 16; y < 64; y += 16)
    for (int x = 16; x < 64; x += 16) {
      const auto d = intra_predict(frame, frame, x, y);
      CHECK(d.mode == IntraMode::Vertical);
      CHECK(d.sse == 0);
    }
}

TEST_CASE("inter: planted motion is found") {
  const auto ref = testutil::random_bytes(64, 64, 4);
  // current(x, y) = ref(x + 3, y - 2) so the prediction source offset is (3, -2).
  BytePlane cur(64, 64);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x)
      cur(x, y) = ref(std::clamp(x + 3, 0, 63), std::clamp(y - 2, 0, 63));
  const auto d = inter_predict(ref, cur, 16, 16, 8);
  CHECK(d.mv == MotionVector{3, -2});
  CHECK(d.sse == 0);
  CHECK(block_sse(cur, 16, 16, inter_prediction(ref, 16, 16, d.mv)) == 0);
}

TEST_CASE("inter: static scene keeps zero vectors") {
  const BytePlane flat(48, 48, 50);
  for (int y = 0; y < 48; y += 16)
    for (int x = 0; x < 48; x += 16) {
      const auto d = inter_predict(flat, flat, x, y, 8);
      CHECK(d.mv == MotionVector{0, 0});
      CHECK(d.sse == 0);
    }
  const auto ref = testutil::random_bytes(48, 48, 9);
  CHECK(inter_predict(ref, ref, 16, 16, 8).mv == MotionVector{0, 0});
  CHECK_FALSE(motion_vector_valid(ref, 0, 0, {-1, 0}));
  CHECK_FALSE(motion_vector_valid(ref, 32, 32, {0, 1}));
  CHECK(motion_vector_valid(ref, 16, 16, {16, 16}));
}

TEST_CASE("deblock: boundary strength rules") {
  BlockCodingInfo a, b;
  a.ref = b.ref = 0;
  CHECK(boundary_strength(a, b) == 0);
  b.coded = true;
  CHECK(boundary_strength(a, b) == 1);
  b.coded = false;
  b.mv = {1, 0};
  CHECK(boundary_strength(a, b) == 1);
  b.mv = {};
  b.ref = 2;
  CHECK(boundary_strength(a, b) == 1);
  a.intra = true;
  CHECK(boundary_strength(a, b) == 2);
  CHECK(deblock_threshold(28) == doctest::Approx(0.8 * 16 + 2));
}

TEST_CASE("deblock: constant frame unchanged") {
  BlockInfoGrid grid(64, 64);
  for (int by = 0; by < grid.rows(); ++by)
    for (int bx = 0; bx < grid.cols(); ++bx) {
      grid.at(bx, by).intra = true;
      grid.at(bx, by).qp = 40;
    }
  const BytePlane flat(64, 64, 77);
  CHECK(deblock_filter(flat, grid) == flat);
}

TEST_CASE("deblock: real step edge at low qp passes through") {
  BlockInfoGrid grid(64, 64);
  for (int by = 0; by < grid.rows(); ++by)
    for (int bx = 0; bx < grid.cols(); ++bx) {
      grid.at(bx, by).intra = true;
      grid.at(bx, by).qp = 10;
    }
  BytePlane step(64, 64);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x)
      step(x, y) = x < 32 ? 100 : 160;
  CHECK(deblock_filter(step, grid) == step);
}

TEST_CASE("deblock: blocky frame is smoothed locally") {
  // Each 4x4 block is flat with a small offset, as coarse quantization leaves it.
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> off(-6, 6);
  BytePlane blocky(64, 64);
  for (int by = 0; by < 16; ++by)
    for (int bx = 0; bx < 16; ++bx) {
      const int v = 128 + off(rng);
      for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x)
          blocky(bx * 4 + x, by * 4 + y) = static_cast<std::uint8_t>(v);
    }
  // Only the macroblock at (16, 16) is intra; everything else is skipped.
  BlockInfoGrid grid(64, 64);
  for (int by = 0; by < grid.rows(); ++by)
    for (int bx = 0; bx < grid.cols(); ++bx) {
      auto& b = grid.at(bx, by);
      b.ref = 0;
      b.qp = 30;
      b.intra = bx >= 4 && bx < 8 && by >= 4 && by < 8;
    }
  const auto out = deblock_filter(blocky, grid);

  auto edge_jump = [](const BytePlane& p) {
    double s = 0.0;
    for (int y = 16; y < 32; ++y)
      for (int x = 16; x <= 32; x += 4) {
        const double d = double(p(x, y)) - double(p(x - 1, y));
        s += d * d;
      }
    return s;
  };
  CHECK(edge_jump(out) < edge_jump(blocky));
  // Nothing changes farther than 3 px from the edges of the intra macroblock.
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x)
      if (x < 13 || x > 34 || y < 13 || y > 34)
        CHECK(out(x, y) == blocky(x, y));
}

TEST_CASE("rate control: proportional step") {
  CHECK(rate_control_step(1000, 1000, 26) == 26);
  CHECK(rate_control_step(1000, 4000, 26) == 29);
  CHECK(rate_control_step(1000, 1e9, 26) == 29);
  CHECK(rate_control_step(1000, 250, 26) == 22 + 1); // round(2 * -2) = -4, clamped to -3
  CHECK(rate_control_step(1000, 0, 26) == 23);
  CHECK(rate_control_step(1000, 1414.3, 26) == 27); // 2*log2(1.414) ~ 1
  CHECK(rate_control_step(1000, 4000, 50) == 51);
  CHECK(rate_control_step(1000, 100, 2) == 1);
}

TEST_CASE("encode: all-black video costs almost no coefficient bits") {
  io::RawVideo v;
  v.width = 64;
  v.height = 64;
  v.frames.assign(6, BytePlane(64, 64, 0));
  const auto r = encode(v, constant(26));
  // Every 4x4 block pays its one-bit empty flag; beyond that only the first
  // macroblock of each of the two I frames codes levels (against DC 128).
  const std::int64_t flags = 6 * 16 * 16;
  CHECK(r.coefficient_bits >= flags);
  CHECK(r.coefficient_bits - flags < 2 * 300);
  for (const auto& f : r.reconstruction)
    for (auto s : f.samples())
      CHECK(s <= 1);
}

TEST_CASE("encode: constant qp tags every macroblock") {
  const auto v = testutil::sim_video(64, 48, 5, 3);
  for (int qp : {1, 17, 51}) {
    const auto r = encode(v, constant(qp));
    CHECK(r.meta.size() == 5u * 4 * 3);
    for (const auto& m : r.meta)
      CHECK(m.qp == qp);
    for (int q : r.frame_qp)
      CHECK(q == qp);
  }
}

TEST_CASE("encode: metadata layout and frame types") {
  const auto v = testutil::sim_video(64, 48, 7, 3);
  const auto r = encode(v, constant(26));
  const std::vector<FrameType> want{FrameType::I, FrameType::B, FrameType::P, FrameType::I,
                                    FrameType::B, FrameType::P, FrameType::I};
  CHECK(r.frame_types == want);
  std::size_t i = 0;
  for (int f = 0; f < 7; ++f)
    for (int y = 0; y < 48; y += 16)
      for (int x = 0; x < 64; x += 16) {
        const auto& m = r.meta[i++];
        CHECK(m.frame_index == f);
        CHECK(m.x == x);
        CHECK(m.y == y);
        CHECK(m.width == 16);
        CHECK(m.height == 16);
        if (want[static_cast<std::size_t>(f)] == FrameType::I)
          CHECK(m.mb_type == FrameType::I);
      }
}

TEST_CASE("encode: invalid configuration and dimensions") {
  const auto v = testutil::sim_video(32, 32, 2, 1);
  CHECK_THROWS_AS(encode(v, constant(0)), ConfigError);
  CHECK_THROWS_AS(encode(v, constant(52)), ConfigError);
  CHECK_THROWS_AS(encode(v, constant(20, "PBI")), ConfigError);
  CHECK_THROWS_AS(encode(v, constant(20, "")), ConfigError);
  CHECK_THROWS_AS(encode(v, constant(20, "IXP")), ConfigError);
  CHECK_THROWS_AS(encode(v, bitrate(0)), ConfigError);
  auto bad = constant(20);
  bad.search_range = -1;
  CHECK_THROWS_AS(encode(v, bad), ConfigError);
  CHECK_THROWS_AS(encode(testutil::random_video(40, 32, 2, 1), constant(20)), DimensionError);
}

TEST_CASE("encode: double the bitrate, lower mean qp") {
  const auto v = testutil::sim_video(64, 64, 30, 5);
  const auto lo = encode(v, bitrate(150000));
  const auto hi = encode(v, bitrate(300000));
  CHECK(mean(hi.frame_qp) < mean(lo.frame_qp));
}

TEST_CASE("rate control: closed loop converges on textured video") {
  const auto v = testutil::sim_video(128, 128, 60, 6);
  const double target = 400000.0;
  const auto r = encode(v, bitrate(target));
  double bits = 0.0;
  for (std::size_t i = r.frame_bits.size() / 2; i < r.frame_bits.size(); ++i)
    bits += static_cast<double>(r.frame_bits[i]);
  const double seconds = static_cast<double>(r.frame_bits.size() - r.frame_bits.size() / 2) / 25.0;
  const double rate = bits / seconds;
  CHECK(rate >= 0.75 * target);
  CHECK(rate <= 1.25 * target);
}

TEST_CASE("encode: distortion grows with qp") {
  const auto v = testutil::sim_video(64, 64, 6, 7);
  std::vector<double> err;
  for (int qp = 5; qp <= 45; qp += 5) {
    const auto r = encode(v, constant(qp));
    double s = 0.0;
    for (std::size_t f = 0; f < v.frames.size(); ++f)
      s += mse(r.reconstruction[f], v.frames[f]);
    err.push_back(s);
  }
  int inversions = 0;
  for (std::size_t i = 1; i < err.size(); ++i)
    if (err[i] < err[i - 1])
      ++inversions;
  CHECK(inversions <= 1);
  CHECK(err.back() > err.front());
}

TEST_CASE("encode: predicted blocks carry less residual than intra blocks") {
  const auto v = testutil::sim_video(128, 128, 12, 8);
  const auto r = encode(v, constant(26));
  double e[3] = {0, 0, 0};
  int n[3] = {0, 0, 0};
  for (const auto& m : r.meta) {
    const auto t = static_cast<int>(r.frame_types[static_cast<std::size_t>(m.frame_index)]);
    e[t] += m.residual_energy;
    ++n[t];
  }
  REQUIRE(n[0] > 0);
  REQUIRE(n[1] > 0);
  CHECK(e[1] / n[1] < e[0] / n[0]);
  CHECK(e[2] / n[2] < e[0] / n[0]);
}

TEST_CASE("bitstream: serialize and parse roundtrip") {
  const auto v = testutil::sim_video(48, 32, 5, 2);
  const auto r = encode(v, constant(22));
  const auto bytes = r.stream.serialize();
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "PRVC");
  const auto parsed = Bitstream::parse(bytes);
  CHECK(parsed == r.stream);
  CHECK(parsed.header.width == 48);
  CHECK(parsed.header.height == 32);
  CHECK(parsed.header.frame_count == 5);
  CHECK(parsed.header.gop_pattern == "IBP");

  testutil::TempDir dir("bitstream");
  r.stream.write(dir / "s.prvc");
  CHECK(Bitstream::read(dir / "s.prvc") == r.stream);
  CHECK_THROWS_AS(Bitstream::read(dir / "missing.prvc"), IoError);
}

TEST_CASE("bitstream: corrupt containers are rejected") {
  const auto r = encode(testutil::sim_video(32, 32, 3, 2), constant(22));
  const auto bytes = r.stream.serialize();

  auto magic = bytes;
  magic[0] = 'X';
  CHECK_THROWS_AS(Bitstream::parse(magic), FormatError);

  for (std::size_t cut : {std::size_t{0}, std::size_t{3}, std::size_t{10}, bytes.size() / 2,
                          bytes.size() - 1}) {
    const std::vector<std::uint8_t> head(bytes.begin(), bytes.begin() + static_cast<long>(cut));
    CHECK_THROWS_AS(Bitstream::parse(head), FormatError);
  }
  auto trailing = bytes;
  trailing.push_back(0);
  CHECK_THROWS_AS(Bitstream::parse(trailing), FormatError);
}

TEST_CASE("coding plan: IBP order and closed GOPs") {
  const auto plan = coding_plan("IBP", 8);
  REQUIRE(plan.size() == 8);
  const std::vector<int> order{0, 2, 1, 3, 5, 4, 6, 7};
  for (std::size_t i = 0; i < plan.size(); ++i)
    CHECK(plan[i].display_index == order[i]);
  // Display 1 is a B between anchors 0 and 2.
  CHECK(plan[2].type == FrameType::B);
  CHECK(plan[2].past_ref == 0);
  CHECK(plan[2].future_ref == 2);
  CHECK(plan[1].type == FrameType::P);
  CHECK(plan[1].past_ref == 0);
  // Trailing B in an incomplete GOP has only a past anchor.
  CHECK(plan[7].display_index == 7);
  CHECK(plan[7].type == FrameType::B);
  CHECK(plan[7].past_ref == 6);
  CHECK(plan[7].future_ref == -1);
  for (const auto& s : plan)
    CHECK(s.gop == s.display_index / 3);

  CHECK(frame_type_at("IPPP", 5) == FrameType::P);
  CHECK(frame_type_at("IPPP", 4) == FrameType::I);
  const auto intra = coding_plan("I", 4);
  for (std::size_t i = 0; i < intra.size(); ++i) {
    CHECK(intra[i].type == FrameType::I);
    CHECK(intra[i].display_index == static_cast<int>(i));
  }
}
