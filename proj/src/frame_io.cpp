#include "prnu/frame_io.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <memory>
#include <sstream>

#include <json.hpp>

namespace prnu::io {
namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i)
    out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t pos) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i)
    v |= static_cast<std::uint32_t>(in[pos + i]) << (8 * i);
  return v;
}

std::vector<std::uint8_t> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out)
    throw IoError("write failed for " + path.string());
}

bool has_magic(std::span<const std::uint8_t> bytes, const char* magic) {
  return bytes.size() >= 4 && std::memcmp(bytes.data(), magic, 4) == 0;
}

std::vector<std::uint8_t> encode_pattern(const PrnuPattern& pattern) {
  std::vector<std::uint8_t> out;
  out.reserve(12 + pattern.values().size() * 4);
  out.insert(out.end(), {'P', 'R', 'N', 'K'});
  put_u32(out, static_cast<std::uint32_t>(pattern.width()));
  put_u32(out, static_cast<std::uint32_t>(pattern.height()));
  for (double v : pattern.values().samples())
    put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  return out;
}

PrnuPattern decode_pattern(std::span<const std::uint8_t> bytes, const std::string& name) {
  if (!has_magic(bytes, "PRNK"))
    throw FormatError(name + ": bad magic (expected PRNK)");
  if (bytes.size() < 12)
    throw FormatError(name + ": truncated header");
  const auto w = get_u32(bytes, 4);
  const auto h = get_u32(bytes, 8);
  if (w == 0 || h == 0 || w > 1u << 15 || h > 1u << 15)
    throw FormatError(name + ": invalid pattern dimensions");
  const std::size_t n = static_cast<std::size_t>(w) * h;
  if (bytes.size() != 12 + 4 * n)
    throw FormatError(name + ": payload size does not match dimensions");
  RealPlane values(static_cast<int>(w), static_cast<int>(h));
  auto samples = values.samples();
  for (std::size_t i = 0; i < n; ++i)
    samples[i] = std::bit_cast<float>(get_u32(bytes, 12 + 4 * i));
  return PrnuPattern(std::move(values));
}

bool valid_camera_id(const std::string& id) {
  if (id.empty() || id.size() > 128 || id.front() == '.')
    return false;
  return std::ranges::all_of(id, [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c == '-' || c == '_' || c == '.';
  });
}

std::mutex& store_write_mutex() {
  static std::mutex m;
  return m;
}

} // namespace

void RawVideo::validate() const {
  if (width < 16 || height < 16 || width % 16 != 0 || height % 16 != 0)
    throw DimensionError("video dimensions must be positive multiples of 16, got " +
                         std::to_string(width) + "x" + std::to_string(height));
  if (frames.empty())
    throw FormatError("video has no frames");
  if (fps_num == 0 || fps_den == 0)
    throw FormatError("frame rate must be positive");
  for (const auto& f : frames)
    if (f.width() != width || f.height() != height)
      throw DimensionError("frame dimensions differ from video dimensions");
}

RawVideo read_raw_video(const std::filesystem::path& path) {
  const auto bytes = slurp(path);
  const std::string name = path.string();
  if (!has_magic(bytes, "PRVW"))
    throw FormatError(name + ": bad magic (expected PRVW)");
  if (bytes.size() < kRawVideoHeaderSize)
    throw FormatError(name + ": truncated header");

  RawVideo v;
  v.width = static_cast<int>(get_u32(bytes, 4));
  v.height = static_cast<int>(get_u32(bytes, 8));
  v.fps_num = get_u32(bytes, 12);
  v.fps_den = get_u32(bytes, 16);
  const auto count = get_u32(bytes, 20);
  if (v.width <= 0 || v.height <= 0 || v.width % 16 != 0 || v.height % 16 != 0)
    throw DimensionError(name + ": dimensions must be multiples of 16");
  const std::size_t frame_bytes = static_cast<std::size_t>(v.width) * v.height;
  const std::size_t payload = bytes.size() - kRawVideoHeaderSize;
  if (payload < frame_bytes * count)
    throw FormatError(name + ": truncated payload (" + std::to_string(payload / frame_bytes) +
                      " of " + std::to_string(count) + " frames)");
  if (payload != frame_bytes * count)
    throw FormatError(name + ": trailing bytes after last frame");

  v.frames.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto* begin = bytes.data() + kRawVideoHeaderSize + i * frame_bytes;
    v.frames.emplace_back(v.width, v.height, std::vector<std::uint8_t>(begin, begin + frame_bytes));
  }
  v.validate();
  return v;
}

void write_raw_video(const RawVideo& video, const std::filesystem::path& path) {
  video.validate();
  std::vector<std::uint8_t> out;
  out.reserve(kRawVideoHeaderSize + video.frames.size() * video.frames.front().size());
  out.insert(out.end(), {'P', 'R', 'V', 'W'});
  put_u32(out, static_cast<std::uint32_t>(video.width));
  put_u32(out, static_cast<std::uint32_t>(video.height));
  put_u32(out, video.fps_num);
  put_u32(out, video.fps_den);
  put_u32(out, static_cast<std::uint32_t>(video.frames.size()));
  for (const auto& f : video.frames)
    out.insert(out.end(), f.samples().begin(), f.samples().end());
  spit(path, out);
}

PrnuPattern read_pattern(const std::filesystem::path& path) {
  return decode_pattern(slurp(path), path.string());
}

void write_pattern(const PrnuPattern& pattern, const std::filesystem::path& path) {
  spit(path, encode_pattern(pattern));
}

PrnuPattern to_float_precision(const PrnuPattern& pattern) {
  RealPlane v = pattern.values();
  for (double& s : v.samples())
    s = static_cast<float>(s);
  return PrnuPattern(std::move(v));
}

FingerprintStore::FingerprintStore(std::filesystem::path root) : root_(std::move(root)) {
  std::error_code ec;
  std::filesystem::create_directories(root_, ec);
  if (ec || !std::filesystem::is_directory(root_))
    throw IoError("cannot create fingerprint store at " + root_.string());
}

std::filesystem::path FingerprintStore::pattern_path(const std::string& id) const {
  return root_ / (id + ".prnk");
}

std::filesystem::path FingerprintStore::info_path(const std::string& id) const {
  return root_ / (id + ".json");
}

void FingerprintStore::store(const FingerprintRecord& record) const {
  if (!valid_camera_id(record.camera_id))
    throw ConfigError("invalid camera id '" + record.camera_id + "'");
  if (record.pattern.width() <= 0 || record.pattern.height() <= 0)
    throw DimensionError("fingerprint pattern has no samples");

  std::lock_guard lock(store_write_mutex());
  // The info file is the existence marker; "x" makes creation exclusive.
  std::unique_ptr<std::FILE, int (*)(std::FILE*)> info(
      std::fopen(info_path(record.camera_id).c_str(), "wx"), &std::fclose);
  if (!info) {
    if (std::filesystem::exists(info_path(record.camera_id)))
      throw DuplicateError("camera id '" + record.camera_id + "' already in store");
    throw IoError("cannot write to store " + root_.string());
  }

  write_pattern(record.pattern, pattern_path(record.camera_id));

  nlohmann::json j = {
      {"camera_id", record.camera_id},
      {"width", record.pattern.width()},
      {"height", record.pattern.height()},
      {"source", record.source_descriptor},
      {"method", record.method},
      {"frame_count", record.frame_count},
  };
  const std::string text = j.dump(2) + "\n";
  if (std::fwrite(text.data(), 1, text.size(), info.get()) != text.size())
    throw IoError("cannot write fingerprint info for " + record.camera_id);
}

bool FingerprintStore::contains(const std::string& camera_id) const {
  return valid_camera_id(camera_id) && std::filesystem::exists(info_path(camera_id));
}

FingerprintRecord FingerprintStore::load(const std::string& camera_id) const {
  if (!contains(camera_id))
    throw NotFoundError("camera id '" + camera_id + "' not in store");
  std::ifstream in(info_path(camera_id));
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("corrupt fingerprint info for " + camera_id + ": " + e.what());
  }
  FingerprintRecord r;
  r.camera_id = j.at("camera_id").get<std::string>();
  r.source_descriptor = j.value("source", "");
  r.method = j.value("method", "");
  r.frame_count = j.value("frame_count", 0);
  r.pattern = read_pattern(pattern_path(camera_id));
  if (r.pattern.width() != j.at("width").get<int>() ||
      r.pattern.height() != j.at("height").get<int>())
    throw FormatError("fingerprint " + camera_id + ": recorded dimensions disagree with pattern");
  return r;
}

std::vector<std::string> FingerprintStore::camera_ids() const {
  std::vector<std::string> ids;
  for (const auto& entry : std::filesystem::directory_iterator(root_))
    if (entry.path().extension() == ".json")
      ids.push_back(entry.path().stem().string());
  std::ranges::sort(ids);
  return ids;
}

std::string format_mb_metadata(std::span<const codec::MacroblockMeta> meta) {
  std::ostringstream os;
  os << "frame,x,y,w,h,type,qp,bits\n";
  for (const auto& m : meta)
    os << m.frame_index << ',' << m.x << ',' << m.y << ',' << m.width << ',' << m.height << ','
       << codec::to_char(m.mb_type) << ',' << m.qp << ',' << m.bits << '\n';
  return os.str();
}

void export_mb_metadata(std::span<const codec::MacroblockMeta> meta,
                        const std::filesystem::path& path) {
  const std::string text = format_mb_metadata(meta);
  spit(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

} // namespace prnu::io
