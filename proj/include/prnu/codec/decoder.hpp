#pragma once

#include <vector>

#include "prnu/codec/bitstream.hpp"
#include "prnu/codec/types.hpp"
#include "prnu/plane.hpp"

namespace prnu::codec {

// Filtered: the standard output, loop filter applied.
// Intervention: prediction still reads the filtered reference buffers, but the
// returned frames are the unfiltered reconstructions.
enum class DecodeMode { Filtered, Intervention };

struct DecodeOutput {
  DecodeMode mode = DecodeMode::Filtered;
  std::vector<BytePlane> frames;       // display order
  std::vector<int> display_indices;    // display index of each returned frame
  std::vector<FrameType> frame_types;  // parallel to frames
  std::vector<int> frame_qp;           // parallel to frames
  std::vector<MacroblockMeta> meta;    // every macroblock of every returned frame
};

struct DecodeOptions {
  // Skip whole GOPs before this one; closed GOPs make the rest decodable.
  int first_gop = 0;
};

DecodeOutput decode(const Bitstream& stream, DecodeMode mode, const DecodeOptions& options = {});

// Only I frames, reconstructed without touching inter payloads.
DecodeOutput decode_i_frames_only(const Bitstream& stream, DecodeMode mode);

} // namespace prnu::codec
