#pragma once

// Macroblock syntax and reconstruction shared by the encoder and decoder.
// Both sides go through reconstruct_macroblock() and deblock_filter(), which
// is what keeps their reference buffers in lockstep.

#include <array>
#include <cstdint>

#include "prnu/codec/bitio.hpp"
#include "prnu/codec/deblock.hpp"
#include "prnu/codec/prediction.hpp"
#include "prnu/codec/transform.hpp"
#include "prnu/codec/types.hpp"

namespace prnu::codec::detail {

enum class MbKind : std::uint8_t { Intra = 0, InterPast = 1, InterFuture = 2 };

struct MacroblockSyntax {
  MbKind kind = MbKind::Intra;
  IntraMode intra_mode = IntraMode::DC;
  MotionVector mv;
  std::array<Levels4x4, 16> levels{}; // 4x4 blocks in raster order
};

struct FrameHeader {
  FrameType type = FrameType::I;
  int display_index = 0;
  int qp = 26;
};

struct References {
  const BytePlane* past = nullptr; // filtered
  const BytePlane* future = nullptr;
  int past_index = -1;
  int future_index = -1;
};

void write_frame_header(BitWriter& out, const FrameHeader& h);
FrameHeader read_frame_header(BitReader& in);

// Returns the number of bits spent on residual levels.
std::int64_t write_macroblock(BitWriter& out, FrameType frame_type, const MacroblockSyntax& mb);
MacroblockSyntax read_macroblock(BitReader& in, FrameType frame_type);

// Checks a parsed macroblock against what the decoder can honor.
void validate_macroblock(const MacroblockSyntax& mb, FrameType frame_type, int mb_x, int mb_y,
                         const References& refs);

MbSamples predict(const MacroblockSyntax& mb, int mb_x, int mb_y, const BytePlane& unfiltered,
                  const References& refs);

// Writes prediction + dequantized residual into `unfiltered` and records the
// coding state of the 16 transform blocks in `grid`.
void reconstruct_macroblock(const MacroblockSyntax& mb, int mb_x, int mb_y, int qp,
                            const References& refs, BytePlane& unfiltered, BlockInfoGrid& grid);

FrameType macroblock_type(MbKind kind, FrameType frame_type);

} // namespace prnu::codec::detail
