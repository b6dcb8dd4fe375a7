#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace imgdna::detail {

// MSB-first bit writer; the final byte is padded with 1 bits like JPEG.
class BitWriter {
 public:
  void put(std::uint32_t value, int count);
  std::uint64_t position() const noexcept { return bits_; }
  /// Pads and returns the bytes; the writer is left empty.
  std::vector<std::uint8_t> finish();
  /// Byte index that the next bit will land in.
  std::size_t current_byte() const noexcept { return static_cast<std::size_t>(bits_ / 8); }

 private:
  std::vector<std::uint8_t> bytes_;
  std::uint64_t bits_ = 0;
};

// MSB-first reader bounded to [start, limit) bits of a byte span.
class BitReader {
 public:
  BitReader(std::span<const std::uint8_t> bytes, std::uint64_t start, std::uint64_t limit);

  std::optional<std::uint32_t> get(int count);
  std::optional<int> bit();
  std::uint64_t position() const noexcept { return pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::uint64_t pos_;
  std::uint64_t limit_;
};

// Little-endian helpers for the binary sidecars.
void put_u8(std::vector<std::uint8_t>& out, std::uint8_t v);
void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v);
void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v);
void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v);

class ByteCursor {
 public:
  explicit ByteCursor(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}
  std::uint8_t u8();
  std::uint16_t u16();
  std::uint32_t u32();
  std::uint64_t u64();
  std::span<const std::uint8_t> take(std::size_t n);
  bool done() const noexcept { return pos_ == bytes_.size(); }
  std::size_t position() const noexcept { return pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace imgdna::detail
