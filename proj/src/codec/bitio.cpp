#include "prnu/codec/bitio.hpp"

#include <bit>

#include "prnu/error.hpp"

namespace prnu::codec {

void BitWriter::put_bit(bool bit) {
  if (bits_ % 8 == 0)
    bytes_.push_back(0);
  if (bit)
    bytes_.back() |= static_cast<std::uint8_t>(0x80u >> (bits_ % 8));
  ++bits_;
}

void BitWriter::put_bits(std::uint64_t value, int count) {
  for (int i = count - 1; i >= 0; --i)
    put_bit(((value >> i) & 1u) != 0);
}

void BitWriter::put_ue(std::uint64_t value) {
  const std::uint64_t v = value + 1;
  const int len = std::bit_width(v);
  put_bits(0, len - 1);
  put_bits(v, len);
}

void BitWriter::put_se(std::int64_t value) {
  put_ue(value > 0 ? static_cast<std::uint64_t>(2 * value - 1)
                   : static_cast<std::uint64_t>(-2 * value));
}

void BitWriter::align() {
  while (bits_ % 8 != 0)
    put_bit(false);
}

bool BitReader::get_bit() {
  if (pos_ >= static_cast<std::int64_t>(data_.size()) * 8)
    throw FormatError("bitstream truncated");
  const bool bit = (data_[pos_ / 8] >> (7 - pos_ % 8)) & 1u;
  ++pos_;
  return bit;
}

std::uint64_t BitReader::get_bits(int count) {
  std::uint64_t v = 0;
  for (int i = 0; i < count; ++i)
    v = (v << 1) | (get_bit() ? 1u : 0u);
  return v;
}

std::uint64_t BitReader::get_ue() {
  int zeros = 0;
  while (!get_bit()) {
    if (++zeros > 40)
      throw FormatError("malformed exp-Golomb code");
  }
  const std::uint64_t rest = get_bits(zeros);
  return ((std::uint64_t{1} << zeros) | rest) - 1;
}

std::int64_t BitReader::get_se() {
  const std::uint64_t k = get_ue();
  return (k & 1u) ? static_cast<std::int64_t>((k + 1) / 2) : -static_cast<std::int64_t>(k / 2);
}

void BitReader::align() {
  while (pos_ % 8 != 0)
    get_bit();
}

} // namespace prnu::codec
