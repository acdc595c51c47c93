#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>

namespace prnu::codec {

inline constexpr int kMacroblockSize = 16;
inline constexpr int kTransformSize = 4;
inline constexpr int kMinQp = 1;
inline constexpr int kMaxQp = 51;

enum class FrameType : std::uint8_t { I = 0, P = 1, B = 2 };

char to_char(FrameType t);
FrameType frame_type_from_char(char c);

// Per-macroblock decode record. Emitted by the encoder and, identically, by the
// decoder in both output modes.
struct MacroblockMeta {
  int frame_index = 0; // display order
  int x = 0;
  int y = 0;
  int width = kMacroblockSize;
  int height = kMacroblockSize;
  FrameType mb_type = FrameType::I;
  int qp = 0;
  std::int64_t bits = 0;
  // Sum of squared prediction residual before quantization.
  double residual_energy = 0.0;

  friend bool operator==(const MacroblockMeta&, const MacroblockMeta&) = default;
};

struct ConstantQp {
  int qp = 26;
};

struct TargetBitrate {
  double bits_per_second = 0.0;
};

using RateMode = std::variant<ConstantQp, TargetBitrate>;

struct EncoderConfig {
  std::string gop_pattern = "IBP";
  RateMode rate_mode = ConstantQp{26};
  // Starting qp in target-bitrate mode; ignored for constant qp.
  int initial_qp = 26;
  int search_range = 8;
  bool deblock_enabled = true;

  // Throws ConfigError when an invariant is violated.
  void validate() const;
};

} // namespace prnu::codec
