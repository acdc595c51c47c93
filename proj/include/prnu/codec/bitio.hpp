#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace prnu::codec {

// MSB-first bit packer with exponential-Golomb helpers.
class BitWriter {
public:
  void put_bit(bool bit);
  void put_bits(std::uint64_t value, int count);
  void put_ue(std::uint64_t value);
  void put_se(std::int64_t value);
  void align();

  std::int64_t bit_count() const noexcept { return bits_; }
  const std::vector<std::uint8_t>& bytes() const noexcept { return bytes_; }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

private:
  std::vector<std::uint8_t> bytes_;
  std::int64_t bits_ = 0;
};

// Throws FormatError on reads past the end or malformed codes.
class BitReader {
public:
  explicit BitReader(std::span<const std::uint8_t> data) : data_(data) {}

  bool get_bit();
  std::uint64_t get_bits(int count);
  std::uint64_t get_ue();
  std::int64_t get_se();
  void align();

  std::int64_t position() const noexcept { return pos_; }
  std::int64_t remaining() const noexcept {
    return static_cast<std::int64_t>(data_.size()) * 8 - pos_;
  }

private:
  std::span<const std::uint8_t> data_;
  std::int64_t pos_ = 0;
};

} // namespace prnu::codec
