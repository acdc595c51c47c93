#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "prnu/codec/types.hpp"

namespace prnu::codec {

// Stream-level parameters carried by the "PRVC" container header.
struct StreamHeader {
  int width = 0;
  int height = 0;
  std::uint32_t fps_num = 25;
  std::uint32_t fps_den = 1;
  std::string gop_pattern = "IBP";
  int frame_count = 0;
  bool deblock_enabled = true;

  friend bool operator==(const StreamHeader&, const StreamHeader&) = default;
};

// Header plus per-frame payloads in decode order. Byte layout is documented
// in docs/bitstream.md.
struct Bitstream {
  StreamHeader header;
  std::vector<std::vector<std::uint8_t>> payloads;

  std::vector<std::uint8_t> serialize() const;
  static Bitstream parse(const std::vector<std::uint8_t>& bytes);

  void write(const std::filesystem::path& path) const;
  static Bitstream read(const std::filesystem::path& path);

  friend bool operator==(const Bitstream&, const Bitstream&) = default;
};

inline constexpr std::uint8_t kBitstreamVersion = 1;

// One entry per frame in decode order.
struct CodingStep {
  int display_index = 0;
  FrameType type = FrameType::I;
  int gop = 0;
  int past_ref = -1;   // display index of the previous anchor in the GOP
  int future_ref = -1; // next anchor in the GOP (B frames only)
};

FrameType frame_type_at(const std::string& gop_pattern, int display_index);

// Closed GOPs: references never cross a GOP boundary. Anchors (I/P) are coded
// in display order; each B frame follows the anchor after it.
std::vector<CodingStep> coding_plan(const std::string& gop_pattern, int frame_count);

} // namespace prnu::codec
