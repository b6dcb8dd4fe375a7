#pragma once

// JPEG-style grayscale transform coder with separated DC and AC streams.
//
// The coder follows the baseline JPEG luminance path (8x8 DCT, quality-scaled
// quantization, DPCM for DC, zigzag + run-length for AC, Huffman coding) but
// writes DC and AC symbols into two independent byte streams so they can be
// stored apart. No JFIF container is produced; everything a decoder needs
// besides the two streams lives in ImageMetadata.

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace imgdna {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input the caller should have rejected (bad dimensions, quality, config).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed stream. `offset` is in the unit named by the thrower
/// (bytes for coefficient streams, trits for ternary streams).
class DecodeError : public Error {
 public:
  DecodeError(const std::string& what, std::uint64_t offset)
      : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> samples;  // row-major luminance

  Image() = default;
  Image(int w, int h, std::uint8_t fill = 0);

  std::uint8_t at(int x, int y) const { return samples[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t& at(int x, int y) { return samples[static_cast<std::size_t>(y) * width + x]; }

  bool valid() const noexcept;
  bool operator==(const Image&) const = default;
};

constexpr int kBlockSide = 8;
constexpr int kBlockSize = 64;

/// Quantized coefficients of one 8x8 block in natural (row-major) order.
using Block = std::array<std::int32_t, kBlockSize>;

/// JPEG-style canonical Huffman table: code counts per length 1..16 and the
/// symbols in code order.
struct HuffmanTable {
  std::array<std::uint8_t, 16> counts{};
  std::vector<std::uint8_t> symbols;

  bool operator==(const HuffmanTable&) const = default;
};

enum class StreamLayout : std::uint8_t {
  Separated = 0,    // DC symbols in dc_bytes, AC symbols in ac_bytes
  Interleaved = 1,  // per block DC then AC, all in dc_bytes (plain JPEG order)
};

/// Where a block segment starts in each stream. The tolerant decoder restarts
/// symbol parsing at these positions; the DC predictor is not reset.
struct SegmentSync {
  std::uint64_t dc_bit = 0;
  std::uint64_t ac_bit = 0;

  bool operator==(const SegmentSync&) const = default;
};

struct ImageMetadata {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  int quality = 75;
  std::array<std::uint16_t, kBlockSize> quant{};  // natural order, entries >= 1
  HuffmanTable dc_table;
  HuffmanTable ac_table;
  std::uint32_t block_count = 0;
  StreamLayout layout = StreamLayout::Separated;
  std::uint32_t segment_blocks = 0;  // 0: the whole image is one segment
  std::vector<SegmentSync> segments;
  std::uint64_t dc_bits = 0;  // meaningful bits before byte padding
  std::uint64_t ac_bits = 0;

  std::uint32_t blocks_x() const noexcept { return (width + 7) / 8; }
  std::uint32_t blocks_y() const noexcept { return (height + 7) / 8; }

  bool operator==(const ImageMetadata&) const = default;
};

struct CoefficientStreams {
  std::vector<std::uint8_t> dc_bytes;
  std::vector<std::uint8_t> ac_bytes;
  ImageMetadata metadata;
};

struct TransformResult {
  std::vector<Block> blocks;  // raster order over the padded image
  ImageMetadata metadata;     // dimensions and quantization only
};

struct EntropyOptions {
  StreamLayout layout = StreamLayout::Separated;
  std::uint32_t segment_blocks = 0;
};

// --- transform primitives ---------------------------------------------------

/// Orthonormal 8x8 type-II DCT of a level-shifted block (natural order).
std::array<double, kBlockSize> forward_dct(const std::array<double, kBlockSize>& block);
std::array<double, kBlockSize> inverse_dct(const std::array<double, kBlockSize>& coeffs);

/// Zigzag position -> natural index.
const std::array<std::uint8_t, kBlockSize>& zigzag_to_natural();
/// Zigzag position of the coefficient at (row, col).
int zigzag_index(int row, int col);

/// Standard luminance table scaled with the libjpeg quality formula.
std::array<std::uint16_t, kBlockSize> quality_table(int quality);

/// Integer division rounding half away from zero.
std::int32_t quantize(double coefficient, std::uint16_t step);

// --- codec --------------------------------------------------------------------

TransformResult forward_transform(const Image& image, int quality);

/// Dequantize, inverse DCT, crop to the metadata dimensions, clamp to [0,255].
Image reconstruct(std::span<const Block> blocks, const ImageMetadata& metadata);

/// Entropy-code the blocks. When `dc_byte_mask` is non-null it receives, for
/// every byte of dc_bytes, whether any DC symbol bit landed in it (useful for
/// the interleaved layout where both kinds share one stream).
CoefficientStreams encode_streams(std::span<const Block> blocks, ImageMetadata metadata,
                                  const EntropyOptions& options = {},
                                  std::vector<bool>* dc_byte_mask = nullptr);

/// Inverse of encode_streams. With `tolerate_errors`, an undecodable symbol
/// zeroes the AC and holds the DC for the rest of its segment; without it,
/// the first malformed symbol throws DecodeError with a byte offset.
std::vector<Block> decode_coefficients(const CoefficientStreams& streams, bool tolerate_errors);

Image decode_streams(const CoefficientStreams& streams, bool tolerate_errors);

/// Build a length-limited (16 bit) canonical table from symbol frequencies.
/// The all-ones code of every length is kept unused.
HuffmanTable build_huffman_table(std::span<const std::uint64_t, 256> frequencies);

// --- external formats ---------------------------------------------------------

/// Binary PGM (P5, maxval 255).
Image read_pgm(const std::string& path);
Image parse_pgm(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> format_pgm(const Image& image);
void write_pgm(const std::string& path, const Image& image);

/// Self-describing tagged binary sidecar for ImageMetadata.
std::vector<std::uint8_t> serialize_metadata(const ImageMetadata& metadata);
ImageMetadata parse_metadata(std::span<const std::uint8_t> bytes);

}  // namespace imgdna
