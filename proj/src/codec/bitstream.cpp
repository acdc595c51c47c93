#include "prnu/codec/bitstream.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <iterator>

#include "prnu/error.hpp"

namespace prnu::codec {
namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i)
    out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class ByteCursor {
public:
  explicit ByteCursor(const std::vector<std::uint8_t>& b) : bytes_(b) {}
  std::uint8_t u8() {
    need(1);
    return bytes_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::vector<std::uint8_t> take(std::size_t n) {
    need(n);
    std::vector<std::uint8_t> out(bytes_.begin() + static_cast<std::ptrdiff_t>(pos_),
                                  bytes_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return out;
  }
  bool done() const { return pos_ == bytes_.size(); }

private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n)
      throw FormatError("bitstream container truncated");
  }
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

} // namespace

char to_char(FrameType t) {
  switch (t) {
  case FrameType::I:
    return 'I';
  case FrameType::P:
    return 'P';
  case FrameType::B:
    return 'B';
  }
  return '?';
}

FrameType frame_type_from_char(char c) {
  switch (c) {
  case 'I':
    return FrameType::I;
  case 'P':
    return FrameType::P;
  case 'B':
    return FrameType::B;
  default:
    throw ConfigError(std::string("invalid frame type '") + c + "'");
  }
}

void EncoderConfig::validate() const {
  if (gop_pattern.empty() || gop_pattern.front() != 'I')
    throw ConfigError("GOP pattern must start with I");
  for (char c : gop_pattern)
    frame_type_from_char(c);
  if (search_range < 0)
    throw ConfigError("search range must be non-negative");
  if (const auto* cq = std::get_if<ConstantQp>(&rate_mode)) {
    if (cq->qp < kMinQp || cq->qp > kMaxQp)
      throw ConfigError("qp must lie in [1, 51]");
  } else {
    const auto& tb = std::get<TargetBitrate>(rate_mode);
    if (!(tb.bits_per_second > 0.0))
      throw ConfigError("target bitrate must be positive");
    if (initial_qp < kMinQp || initial_qp > kMaxQp)
      throw ConfigError("initial qp must lie in [1, 51]");
  }
}

std::vector<std::uint8_t> Bitstream::serialize() const {
  std::vector<std::uint8_t> out = {'P', 'R', 'V', 'C', kBitstreamVersion};
  put_u32(out, static_cast<std::uint32_t>(header.width));
  put_u32(out, static_cast<std::uint32_t>(header.height));
  put_u32(out, header.fps_num);
  put_u32(out, header.fps_den);
  put_u32(out, static_cast<std::uint32_t>(header.gop_pattern.size()));
  out.insert(out.end(), header.gop_pattern.begin(), header.gop_pattern.end());
  put_u32(out, static_cast<std::uint32_t>(header.frame_count));
  out.push_back(header.deblock_enabled ? 1 : 0);
  for (const auto& p : payloads) {
    put_u32(out, static_cast<std::uint32_t>(p.size()));
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

Bitstream Bitstream::parse(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "PRVC", 4) != 0)
    throw FormatError("bad bitstream magic (expected PRVC)");
  ByteCursor in(bytes);
  in.take(4);
  if (in.u8() != kBitstreamVersion)
    throw FormatError("unsupported bitstream version");
  Bitstream bs;
  auto& h = bs.header;
  h.width = static_cast<int>(in.u32());
  h.height = static_cast<int>(in.u32());
  h.fps_num = in.u32();
  h.fps_den = in.u32();
  const std::uint32_t gop_len = in.u32();
  if (gop_len == 0 || gop_len > 4096)
    throw FormatError("invalid GOP pattern length");
  const auto gop = in.take(gop_len);
  h.gop_pattern.assign(gop.begin(), gop.end());
  h.frame_count = static_cast<int>(in.u32());
  const std::uint8_t flags = in.u8();
  if (flags > 1)
    throw FormatError("unknown stream flags");
  h.deblock_enabled = flags & 1;

  if (h.width < 16 || h.height < 16 || h.width % 16 || h.height % 16 || h.width > 1 << 14 ||
      h.height > 1 << 14)
    throw FormatError("invalid stream dimensions");
  if (h.fps_num == 0 || h.fps_den == 0)
    throw FormatError("invalid frame rate");
  if (h.frame_count < 1 || h.frame_count > 1 << 24)
    throw FormatError("invalid frame count");
  EncoderConfig probe;
  probe.gop_pattern = h.gop_pattern;
  try {
    probe.validate();
  } catch (const ConfigError& e) {
    throw FormatError(std::string("invalid GOP pattern in stream: ") + e.what());
  }

  bs.payloads.reserve(h.frame_count);
  for (int i = 0; i < h.frame_count; ++i) {
    const std::uint32_t len = in.u32();
    bs.payloads.push_back(in.take(len));
  }
  if (!in.done())
    throw FormatError("trailing bytes after last frame payload");
  return bs;
}

void Bitstream::write(const std::filesystem::path& path) const {
  const auto bytes = serialize();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out)
    throw IoError("write failed for " + path.string());
}

Bitstream Bitstream::read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in),
                                  std::istreambuf_iterator<char>()};
  return parse(bytes);
}

FrameType frame_type_at(const std::string& gop_pattern, int display_index) {
  return frame_type_from_char(gop_pattern[static_cast<std::size_t>(display_index) % gop_pattern.size()]);
}

std::vector<CodingStep> coding_plan(const std::string& gop_pattern, int frame_count) {
  const int len = static_cast<int>(gop_pattern.size());
  std::vector<CodingStep> plan;
  plan.reserve(frame_count);
  for (int start = 0, gop = 0; start < frame_count; start += len, ++gop) {
    const int end = std::min(start + len, frame_count);
    int last_anchor = -1;
    std::vector<int> pending_b;
    auto flush = [&](int future) {
      for (int b : pending_b)
        plan.push_back({b, FrameType::B, gop, last_anchor, future});
      pending_b.clear();
    };
    for (int d = start; d < end; ++d) {
      const FrameType t = frame_type_at(gop_pattern, d);
      if (t == FrameType::B) {
        pending_b.push_back(d);
        continue;
      }
      plan.push_back({d, t, gop, t == FrameType::P ? last_anchor : -1, -1});
      flush(d);
      last_anchor = d;
    }
    flush(-1);
  }
  return plan;
}

} // namespace prnu::codec
