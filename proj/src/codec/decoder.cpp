#include "prnu/codec/decoder.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <string>

#include "macroblock.hpp"
#include "prnu/codec/deblock.hpp"
#include "prnu/error.hpp"

namespace prnu::codec {
namespace {

struct DecodedFrame {
  BytePlane unfiltered;
  BytePlane filtered;
  int qp = 0;
  std::vector<MacroblockMeta> meta;
};

DecodedFrame decode_frame(const StreamHeader& header, const std::vector<std::uint8_t>& payload,
                          const CodingStep& step, const detail::References& refs) {
  BitReader in(payload);
  const auto fh = detail::read_frame_header(in);
  if (fh.type != step.type || fh.display_index != step.display_index)
    throw FormatError("corrupt stream: frame " + std::to_string(step.display_index) +
                      " header disagrees with GOP structure");

  DecodedFrame out;
  out.qp = fh.qp;
  out.unfiltered = BytePlane(header.width, header.height);
  BlockInfoGrid grid(header.width, header.height);

  for (int mb_y = 0; mb_y < header.height; mb_y += kMacroblockSize) {
    for (int mb_x = 0; mb_x < header.width; mb_x += kMacroblockSize) {
      const std::int64_t start = in.position();
      const auto mb = detail::read_macroblock(in, fh.type);
      detail::validate_macroblock(mb, fh.type, mb_x, mb_y, refs);
      detail::reconstruct_macroblock(mb, mb_x, mb_y, fh.qp, refs, out.unfiltered, grid);

      MacroblockMeta m;
      m.frame_index = step.display_index;
      m.x = mb_x;
      m.y = mb_y;
      m.mb_type = detail::macroblock_type(mb.kind, fh.type);
      m.qp = fh.qp;
      m.bits = in.position() - start;
      out.meta.push_back(m);
    }
  }
  in.align();
  for (auto& m : out.meta)
    m.residual_energy = static_cast<double>(in.get_ue());
  in.align();
  if (in.remaining() != 0)
    throw FormatError("corrupt stream: trailing data in frame payload");

  out.filtered = header.deblock_enabled ? deblock_filter(out.unfiltered, grid) : out.unfiltered;
  return out;
}

void check_payload_count(const Bitstream& stream) {
  if (static_cast<int>(stream.payloads.size()) != stream.header.frame_count)
    throw FormatError("truncated stream: " + std::to_string(stream.payloads.size()) + " of " +
                      std::to_string(stream.header.frame_count) + " frame payloads present");
}

DecodeOutput assemble(std::map<int, std::pair<FrameType, DecodedFrame>>& decoded,
                      DecodeMode mode) {
  DecodeOutput out;
  out.mode = mode;
  for (auto& [display, entry] : decoded) {
    auto& [type, frame] = entry;
    out.display_indices.push_back(display);
    out.frame_types.push_back(type);
    out.frame_qp.push_back(frame.qp);
    out.frames.push_back(mode == DecodeMode::Filtered ? std::move(frame.filtered)
                                                      : std::move(frame.unfiltered));
    out.meta.insert(out.meta.end(), frame.meta.begin(), frame.meta.end());
  }
  return out;
}

} // namespace

DecodeOutput decode(const Bitstream& stream, DecodeMode mode, const DecodeOptions& options) {
  check_payload_count(stream);
  const auto& header = stream.header;
  const auto plan = coding_plan(header.gop_pattern, header.frame_count);
  const int gops = plan.empty() ? 0 : plan.back().gop + 1;
  if (options.first_gop < 0 || (options.first_gop > 0 && options.first_gop >= gops))
    throw ConfigError("first GOP " + std::to_string(options.first_gop) + " outside stream of " +
                      std::to_string(gops) + " GOPs");

  std::map<int, std::pair<FrameType, DecodedFrame>> decoded;
  std::map<int, const BytePlane*> anchors;
  int current_gop = -1;

  for (std::size_t i = 0; i < plan.size(); ++i) {
    const CodingStep& step = plan[i];
    if (step.gop < options.first_gop)
      continue;
    if (step.gop != current_gop) {
      anchors.clear();
      current_gop = step.gop;
    }
    detail::References refs;
    if (step.past_ref >= 0) {
      refs.past = anchors.at(step.past_ref);
      refs.past_index = step.past_ref;
    }
    if (step.future_ref >= 0) {
      refs.future = anchors.at(step.future_ref);
      refs.future_index = step.future_ref;
    }
    auto frame = decode_frame(header, stream.payloads[i], step, refs);
    auto [it, inserted] =
        decoded.emplace(step.display_index, std::make_pair(step.type, std::move(frame)));
    if (step.type != FrameType::B)
      anchors[step.display_index] = &it->second.second.filtered;
  }
  return assemble(decoded, mode);
}

DecodeOutput decode_i_frames_only(const Bitstream& stream, DecodeMode mode) {
  check_payload_count(stream);
  const auto& header = stream.header;
  const auto plan = coding_plan(header.gop_pattern, header.frame_count);

  std::map<int, std::pair<FrameType, DecodedFrame>> decoded;
  for (std::size_t i = 0; i < plan.size(); ++i) {
    if (plan[i].type != FrameType::I)
      continue;
    auto frame = decode_frame(header, stream.payloads[i], plan[i], {});
    decoded.emplace(plan[i].display_index, std::make_pair(FrameType::I, std::move(frame)));
  }
  return assemble(decoded, mode);
}

} // namespace prnu::codec
