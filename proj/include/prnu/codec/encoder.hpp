#pragma once

#include <cstdint>
#include <vector>

#include "prnu/codec/bitstream.hpp"
#include "prnu/codec/types.hpp"
#include "prnu/frame_io.hpp"

namespace prnu::codec {

struct EncodeResult {
  Bitstream stream;
  std::vector<MacroblockMeta> meta; // display order, raster within frame

  // Encoder-internal reconstructions in display order: the deblocked frames
  // that feed inter prediction, and the pre-filter frames.
  std::vector<BytePlane> reconstruction;
  std::vector<BytePlane> unfiltered;

  std::vector<FrameType> frame_types; // display order
  std::vector<int> frame_qp;          // display order
  std::vector<std::int64_t> frame_bits; // coded bits (header + macroblocks)
  std::int64_t coefficient_bits = 0;    // residual level syntax only
};

EncodeResult encode(const io::RawVideo& video, const EncoderConfig& config);

} // namespace prnu::codec
