#include "bitio.hpp"

#include <algorithm>

#include "imgdna/image_codec.hpp"

namespace imgdna::detail {

void BitWriter::put(std::uint32_t value, int count) {
  for (int i = count - 1; i >= 0; --i) {
    if (bits_ % 8 == 0) bytes_.push_back(0);
    if ((value >> i) & 1u) bytes_.back() |= static_cast<std::uint8_t>(0x80u >> (bits_ % 8));
    ++bits_;
  }
}

std::vector<std::uint8_t> BitWriter::finish() {
  while (bits_ % 8 != 0) put(1, 1);
  bits_ = 0;
  return std::move(bytes_);
}

BitReader::BitReader(std::span<const std::uint8_t> bytes, std::uint64_t start, std::uint64_t limit)
    : bytes_(bytes), pos_(start), limit_(std::min<std::uint64_t>(limit, bytes.size() * 8ull)) {}

std::optional<int> BitReader::bit() {
  if (pos_ >= limit_) return std::nullopt;
  const int b = (bytes_[pos_ / 8] >> (7 - pos_ % 8)) & 1;
  ++pos_;
  return b;
}

std::optional<std::uint32_t> BitReader::get(int count) {
  std::uint32_t v = 0;
  for (int i = 0; i < count; ++i) {
    auto b = bit();
    if (!b) return std::nullopt;
    v = (v << 1) | static_cast<std::uint32_t>(*b);
  }
  return v;
}

void put_u8(std::vector<std::uint8_t>& out, std::uint8_t v) { out.push_back(v); }
void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  for (int i = 0; i < 2; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::span<const std::uint8_t> ByteCursor::take(std::size_t n) {
  if (n > bytes_.size() - pos_) throw DecodeError("truncated record", pos_);
  auto s = bytes_.subspan(pos_, n);
  pos_ += n;
  return s;
}

std::uint8_t ByteCursor::u8() { return take(1)[0]; }
std::uint16_t ByteCursor::u16() {
  auto s = take(2);
  return static_cast<std::uint16_t>(s[0] | (s[1] << 8));
}
std::uint32_t ByteCursor::u32() {
  auto s = take(4);
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | s[i];
  return v;
}
std::uint64_t ByteCursor::u64() {
  auto s = take(8);
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | s[i];
  return v;
}

}  // namespace imgdna::detail
