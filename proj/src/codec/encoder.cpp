#include "prnu/codec/encoder.hpp"

#include <cmath>
#include <map>

#include "macroblock.hpp"
#include "prnu/codec/deblock.hpp"
#include "prnu/codec/rate_control.hpp"

namespace prnu::codec {
namespace {

using detail::MacroblockSyntax;
using detail::MbKind;

struct ModeChoice {
  MacroblockSyntax syntax;
  MbSamples prediction{};
};

ModeChoice choose_mode(const BytePlane& source, const BytePlane& unfiltered,
                       const detail::References& refs, FrameType frame_type, int mb_x, int mb_y,
                       int search_range) {
  ModeChoice choice;
  std::int64_t best_sse = 0;
  bool have = false;

  // Inter candidates first so ties keep the cheaper-to-code prediction.
  if (frame_type != FrameType::I && refs.past != nullptr) {
    const auto past = inter_predict(*refs.past, source, mb_x, mb_y, search_range);
    choice.syntax.kind = MbKind::InterPast;
    choice.syntax.mv = past.mv;
    choice.prediction = past.prediction;
    best_sse = past.sse;
    have = true;
  }
  if (frame_type == FrameType::B && refs.future != nullptr) {
    const auto future = inter_predict(*refs.future, source, mb_x, mb_y, search_range);
    if (!have || future.sse < best_sse) {
      choice.syntax.kind = MbKind::InterFuture;
      choice.syntax.mv = future.mv;
      choice.prediction = future.prediction;
      best_sse = future.sse;
      have = true;
    }
  }
  const auto intra = intra_predict(unfiltered, source, mb_x, mb_y);
  if (!have || intra.sse < best_sse) {
    choice.syntax.kind = MbKind::Intra;
    choice.syntax.intra_mode = intra.mode;
    choice.syntax.mv = {};
    choice.prediction = intra.prediction;
  }
  return choice;
}

} // namespace

EncodeResult encode(const io::RawVideo& video, const EncoderConfig& config) {
  config.validate();
  video.validate();

  const int n = static_cast<int>(video.frames.size());
  const auto plan = coding_plan(config.gop_pattern, n);
  const auto* bitrate = std::get_if<TargetBitrate>(&config.rate_mode);
  int qp = bitrate ? config.initial_qp : std::get<ConstantQp>(config.rate_mode).qp;
  const double target_bits =
      bitrate ? bitrate->bits_per_second / video.frame_rate() : 0.0;

  EncodeResult result;
  auto& header = result.stream.header;
  header.width = video.width;
  header.height = video.height;
  header.fps_num = video.fps_num;
  header.fps_den = video.fps_den;
  header.gop_pattern = config.gop_pattern;
  header.frame_count = n;
  header.deblock_enabled = config.deblock_enabled;

  result.reconstruction.resize(n);
  result.unfiltered.resize(n);
  result.frame_types.resize(n);
  result.frame_qp.resize(n);
  result.frame_bits.resize(n);
  std::vector<std::vector<MacroblockMeta>> meta_by_frame(n);

  std::map<int, BytePlane> anchors; // filtered references of the current GOP
  int current_gop = -1;

  for (const CodingStep& step : plan) {
    if (step.gop != current_gop) {
      anchors.clear();
      current_gop = step.gop;
    }
    detail::References refs;
    if (step.past_ref >= 0) {
      refs.past = &anchors.at(step.past_ref);
      refs.past_index = step.past_ref;
    }
    if (step.future_ref >= 0) {
      refs.future = &anchors.at(step.future_ref);
      refs.future_index = step.future_ref;
    }

    const BytePlane& source = video.frames[step.display_index];
    BitWriter out;
    detail::write_frame_header(out, {step.type, step.display_index, qp});

    BytePlane unfiltered(video.width, video.height);
    BlockInfoGrid grid(video.width, video.height);
    auto& frame_meta = meta_by_frame[step.display_index];

    for (int mb_y = 0; mb_y < video.height; mb_y += kMacroblockSize) {
      for (int mb_x = 0; mb_x < video.width; mb_x += kMacroblockSize) {
        ModeChoice choice = choose_mode(source, unfiltered, refs, step.type, mb_x, mb_y,
                                        config.search_range);
        double energy = 0.0;
        for (int b = 0; b < 16; ++b) {
          const int bx = (b % 4) * 4;
          const int by = (b / 4) * 4;
          Block4x4 residual{};
          for (int y = 0; y < 4; ++y)
            for (int x = 0; x < 4; ++x) {
              const double r = static_cast<double>(source(mb_x + bx + x, mb_y + by + y)) -
                               choice.prediction[(by + y) * kMacroblockSize + bx + x];
              residual[y * 4 + x] = r;
              energy += r * r;
            }
          choice.syntax.levels[b] = quantize(forward_transform_4x4(residual), qp);
        }

        const std::int64_t start = out.bit_count();
        result.coefficient_bits += detail::write_macroblock(out, step.type, choice.syntax);
        detail::reconstruct_macroblock(choice.syntax, mb_x, mb_y, qp, refs, unfiltered, grid);

        MacroblockMeta m;
        m.frame_index = step.display_index;
        m.x = mb_x;
        m.y = mb_y;
        m.mb_type = detail::macroblock_type(choice.syntax.kind, step.type);
        m.qp = qp;
        m.bits = out.bit_count() - start;
        m.residual_energy = energy;
        frame_meta.push_back(m);
      }
    }
    const std::int64_t frame_bits = out.bit_count();

    // Analysis side channel: integer residual energies, not counted as coded bits.
    out.align();
    for (const auto& m : frame_meta)
      out.put_ue(static_cast<std::uint64_t>(std::llround(m.residual_energy)));
    out.align();
    result.stream.payloads.push_back(out.take());

    BytePlane filtered = config.deblock_enabled ? deblock_filter(unfiltered, grid) : unfiltered;
    if (step.type != FrameType::B)
      anchors.insert_or_assign(step.display_index, filtered);
    result.reconstruction[step.display_index] = std::move(filtered);
    result.unfiltered[step.display_index] = std::move(unfiltered);
    result.frame_types[step.display_index] = step.type;
    result.frame_qp[step.display_index] = qp;
    result.frame_bits[step.display_index] = frame_bits;

    if (bitrate)
      qp = rate_control_step(target_bits, static_cast<double>(frame_bits), qp);
  }

  for (auto& fm : meta_by_frame)
    result.meta.insert(result.meta.end(), fm.begin(), fm.end());
  return result;
}

} // namespace prnu::codec
