#pragma once

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "prnu/codec/types.hpp"
#include "prnu/pattern.hpp"
#include "prnu/plane.hpp"

namespace prnu::io {

// 8-bit luma video. Width and height are positive multiples of 16.
struct RawVideo {
  int width = 0;
  int height = 0;
  std::uint32_t fps_num = 25;
  std::uint32_t fps_den = 1;
  std::vector<BytePlane> frames;

  double frame_rate() const { return static_cast<double>(fps_num) / fps_den; }

  // Throws DimensionError / FormatError on invariant violations.
  void validate() const;

  friend bool operator==(const RawVideo&, const RawVideo&) = default;
};

// "PRVW" container: magic, u32 width, height, fps_num, fps_den, frame_count
// (little-endian), then frame_count planar 8-bit frames.
inline constexpr std::size_t kRawVideoHeaderSize = 4 + 5 * 4;

RawVideo read_raw_video(const std::filesystem::path& path);
void write_raw_video(const RawVideo& video, const std::filesystem::path& path);

// "PRNK" pattern file: magic, u32 width, u32 height, f32 samples row-major.
PrnuPattern read_pattern(const std::filesystem::path& path);
void write_pattern(const PrnuPattern& pattern, const std::filesystem::path& path);

// f32 serialization, so round-tripped patterns carry float precision.
PrnuPattern to_float_precision(const PrnuPattern& pattern);

struct FingerprintRecord {
  std::string camera_id;
  PrnuPattern pattern;
  std::string source_descriptor;
  std::string method;   // estimation method tag
  int frame_count = 0;  // frames contributing to the estimate
};

// Directory of <camera_id>.prnk + <camera_id>.json pairs. Writes are
// serialized; duplicate ids are rejected at the filesystem level as well.
class FingerprintStore {
public:
  explicit FingerprintStore(std::filesystem::path root);

  const std::filesystem::path& root() const noexcept { return root_; }

  void store(const FingerprintRecord& record) const;
  FingerprintRecord load(const std::string& camera_id) const;
  bool contains(const std::string& camera_id) const;
  std::vector<std::string> camera_ids() const;

private:
  std::filesystem::path pattern_path(const std::string& id) const;
  std::filesystem::path info_path(const std::string& id) const;

  std::filesystem::path root_;
};

// CSV with header "frame,x,y,w,h,type,qp,bits".
void export_mb_metadata(std::span<const codec::MacroblockMeta> meta,
                        const std::filesystem::path& path);
std::string format_mb_metadata(std::span<const codec::MacroblockMeta> meta);

} // namespace prnu::io
