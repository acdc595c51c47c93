#include "macroblock.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "prnu/error.hpp"

namespace prnu::codec::detail {
namespace {

constexpr int kMaxLevel = 1 << 20;

void write_levels(BitWriter& out, const Levels4x4& levels) {
  int nonzero = 0;
  for (int v : levels)
    nonzero += v != 0;
  out.put_ue(static_cast<std::uint64_t>(nonzero));
  int run = 0;
  for (int scan = 0; scan < 16; ++scan) {
    const int v = levels[kZigzag4x4[scan]];
    if (v == 0) {
      ++run;
      continue;
    }
    out.put_ue(static_cast<std::uint64_t>(run));
    out.put_se(v);
    run = 0;
  }
}

Levels4x4 read_levels(BitReader& in) {
  Levels4x4 levels{};
  const std::uint64_t nonzero = in.get_ue();
  if (nonzero > 16)
    throw FormatError("corrupt stream: too many coefficients in block");
  int scan = 0;
  for (std::uint64_t i = 0; i < nonzero; ++i) {
    const std::uint64_t run = in.get_ue();
    if (run > 15 || scan + static_cast<int>(run) > 15)
      throw FormatError("corrupt stream: coefficient run past block end");
    scan += static_cast<int>(run);
    const std::int64_t v = in.get_se();
    if (v == 0 || std::llabs(v) > kMaxLevel)
      throw FormatError("corrupt stream: invalid coefficient level");
    levels[kZigzag4x4[scan]] = static_cast<int>(v);
    ++scan;
  }
  return levels;
}

} // namespace

void write_frame_header(BitWriter& out, const FrameHeader& h) {
  out.put_ue(static_cast<std::uint64_t>(h.type));
  out.put_ue(static_cast<std::uint64_t>(h.display_index));
  out.put_ue(static_cast<std::uint64_t>(h.qp));
}

FrameHeader read_frame_header(BitReader& in) {
  FrameHeader h;
  const auto type = in.get_ue();
  if (type > 2)
    throw FormatError("corrupt stream: invalid frame type");
  h.type = static_cast<FrameType>(type);
  const auto display = in.get_ue();
  if (display > (1u << 24))
    throw FormatError("corrupt stream: invalid display index");
  h.display_index = static_cast<int>(display);
  const auto qp = in.get_ue();
  if (qp < kMinQp || qp > kMaxQp)
    throw FormatError("corrupt stream: qp out of range");
  h.qp = static_cast<int>(qp);
  return h;
}

std::int64_t write_macroblock(BitWriter& out, FrameType frame_type,
                              const MacroblockSyntax& mb) {
  if (frame_type != FrameType::I)
    out.put_ue(static_cast<std::uint64_t>(mb.kind));
  if (mb.kind == MbKind::Intra) {
    out.put_ue(static_cast<std::uint64_t>(mb.intra_mode));
  } else {
    out.put_se(mb.mv.x);
    out.put_se(mb.mv.y);
  }
  const std::int64_t start = out.bit_count();
  for (const auto& block : mb.levels)
    write_levels(out, block);
  return out.bit_count() - start;
}

MacroblockSyntax read_macroblock(BitReader& in, FrameType frame_type) {
  MacroblockSyntax mb;
  if (frame_type != FrameType::I) {
    const auto kind = in.get_ue();
    if (kind > 2)
      throw FormatError("corrupt stream: invalid macroblock mode");
    mb.kind = static_cast<MbKind>(kind);
  }
  if (mb.kind == MbKind::Intra) {
    const auto mode = in.get_ue();
    if (mode > 2)
      throw FormatError("corrupt stream: invalid intra mode");
    mb.intra_mode = static_cast<IntraMode>(mode);
  } else {
    const auto x = in.get_se();
    const auto y = in.get_se();
    if (std::llabs(x) > (1 << 14) || std::llabs(y) > (1 << 14))
      throw FormatError("corrupt stream: motion vector out of range");
    mb.mv = {static_cast<int>(x), static_cast<int>(y)};
  }
  for (auto& block : mb.levels)
    block = read_levels(in);
  return mb;
}

void validate_macroblock(const MacroblockSyntax& mb, FrameType frame_type, int mb_x, int mb_y,
                         const References& refs) {
  switch (mb.kind) {
  case MbKind::Intra:
    if (!intra_mode_available(mb.intra_mode, mb_x, mb_y))
      throw FormatError("corrupt stream: intra mode needs unavailable neighbors");
    return;
  case MbKind::InterPast:
    if (frame_type == FrameType::I || refs.past == nullptr)
      throw FormatError("corrupt stream: inter macroblock without past reference");
    if (!motion_vector_valid(*refs.past, mb_x, mb_y, mb.mv))
      throw FormatError("corrupt stream: motion vector points outside reference");
    return;
  case MbKind::InterFuture:
    if (frame_type != FrameType::B || refs.future == nullptr)
      throw FormatError("corrupt stream: future reference unavailable");
    if (!motion_vector_valid(*refs.future, mb_x, mb_y, mb.mv))
      throw FormatError("corrupt stream: motion vector points outside reference");
    return;
  }
}

MbSamples predict(const MacroblockSyntax& mb, int mb_x, int mb_y, const BytePlane& unfiltered,
                  const References& refs) {
  switch (mb.kind) {
  case MbKind::Intra:
    return intra_prediction(unfiltered, mb_x, mb_y, mb.intra_mode);
  case MbKind::InterPast:
    return inter_prediction(*refs.past, mb_x, mb_y, mb.mv);
  case MbKind::InterFuture:
    return inter_prediction(*refs.future, mb_x, mb_y, mb.mv);
  }
  return {};
}

void reconstruct_macroblock(const MacroblockSyntax& mb, int mb_x, int mb_y, int qp,
                            const References& refs, BytePlane& unfiltered, BlockInfoGrid& grid) {
  const MbSamples pred = predict(mb, mb_x, mb_y, unfiltered, refs);
  for (int b = 0; b < 16; ++b) {
    const int bx = (b % 4) * 4;
    const int by = (b / 4) * 4;
    const auto& levels = mb.levels[b];
    const bool coded = std::ranges::any_of(levels, [](int v) { return v != 0; });
    Block4x4 residual{};
    if (coded)
      residual = inverse_transform_4x4(dequantize(levels, qp));
    for (int y = 0; y < 4; ++y)
      for (int x = 0; x < 4; ++x) {
        const double v = pred[(by + y) * kMacroblockSize + bx + x] + residual[y * 4 + x];
        unfiltered(mb_x + bx + x, mb_y + by + y) =
            static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }

    BlockCodingInfo& info = grid.at((mb_x + bx) / 4, (mb_y + by) / 4);
    info.intra = mb.kind == MbKind::Intra;
    info.coded = coded;
    info.qp = qp;
    info.mv = info.intra ? MotionVector{} : mb.mv;
    info.ref = mb.kind == MbKind::InterPast     ? refs.past_index
               : mb.kind == MbKind::InterFuture ? refs.future_index
                                                : -1;
  }
}

FrameType macroblock_type(MbKind kind, FrameType frame_type) {
  if (kind == MbKind::Intra)
    return FrameType::I;
  return frame_type == FrameType::B ? FrameType::B : FrameType::P;
}

} // namespace prnu::codec::detail
