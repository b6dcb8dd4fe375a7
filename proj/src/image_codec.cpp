#include "imgdna/image_codec.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

#include "bitio.hpp"

namespace imgdna {

namespace {

using detail::BitReader;
using detail::BitWriter;

constexpr std::array<std::uint16_t, kBlockSize> kLuminanceTable = {
    16, 11, 10, 16, 24,  40,  51,  61,   //
    12, 12, 14, 19, 26,  58,  60,  55,   //
    14, 13, 16, 24, 40,  57,  69,  56,   //
    14, 17, 22, 29, 51,  87,  80,  62,   //
    18, 22, 37, 56, 68,  109, 103, 77,   //
    24, 35, 55, 64, 81,  104, 113, 92,   //
    49, 64, 78, 87, 103, 121, 120, 101,  //
    72, 92, 95, 98, 112, 100, 103, 99};

constexpr std::array<std::uint8_t, kBlockSize> kZigzag = {
    0,  1,  8,  16, 9,  2,  3,  10, 17, 24, 32, 25, 18, 11, 4,  5,   //
    12, 19, 26, 33, 40, 48, 41, 34, 27, 20, 13, 6,  7,  14, 21, 28,  //
    35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30, 37, 44, 51,  //
    58, 59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63};

constexpr int kMaxDcCategory = 11;
constexpr int kMaxAcCategory = 10;
constexpr std::uint8_t kEob = 0x00;
constexpr std::uint8_t kZrl = 0xF0;

// basis[u][x] = c(u) cos((2x+1) u pi / 16)
const std::array<std::array<double, 8>, 8>& dct_basis() {
  static const auto table = [] {
    std::array<std::array<double, 8>, 8> t{};
    for (int u = 0; u < 8; ++u) {
      const double c = u == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
      for (int x = 0; x < 8; ++x) t[u][x] = c * std::cos((2 * x + 1) * u * std::numbers::pi / 16.0);
    }
    return t;
  }();
  return table;
}

int category(std::int32_t v) {
  std::uint32_t a = static_cast<std::uint32_t>(v < 0 ? -v : v);
  int s = 0;
  while (a) {
    ++s;
    a >>= 1;
  }
  return s;
}

std::uint32_t magnitude_bits(std::int32_t v, int size) {
  return static_cast<std::uint32_t>(v >= 0 ? v : v + (1 << size) - 1) & ((1u << size) - 1);
}

std::int32_t extend(std::uint32_t bits, int size) {
  if (size == 0) return 0;
  const auto v = static_cast<std::int32_t>(bits);
  return v < (1 << (size - 1)) ? v - (1 << size) + 1 : v;
}

struct Code {
  std::uint16_t bits = 0;
  std::uint8_t length = 0;
};

std::array<Code, 256> code_map(const HuffmanTable& table) {
  std::array<Code, 256> map{};
  std::uint32_t code = 0;
  std::size_t k = 0;
  for (int len = 1; len <= 16; ++len) {
    for (int i = 0; i < table.counts[len - 1]; ++i, ++k) {
      map[table.symbols[k]] = {static_cast<std::uint16_t>(code), static_cast<std::uint8_t>(len)};
      ++code;
    }
    code <<= 1;
  }
  return map;
}

// Canonical decoder (JPEG F.2.2.3 style).
class HuffmanDecoder {
 public:
  explicit HuffmanDecoder(const HuffmanTable& table) : symbols_(table.symbols) {
    std::int32_t code = 0;
    std::int32_t k = 0;
    for (int len = 1; len <= 16; ++len) {
      const int n = table.counts[len - 1];
      valptr_[len] = k;
      mincode_[len] = code;
      code += n;
      k += n;
      maxcode_[len] = n ? code - 1 : -1;
      code <<= 1;
    }
  }

  std::optional<std::uint8_t> decode(BitReader& reader) const {
    std::int32_t code = 0;
    for (int len = 1; len <= 16; ++len) {
      auto b = reader.bit();
      if (!b) return std::nullopt;
      code = (code << 1) | *b;
      if (maxcode_[len] >= 0 && code <= maxcode_[len] && code >= mincode_[len]) {
        const auto idx = static_cast<std::size_t>(valptr_[len] + code - mincode_[len]);
        if (idx >= symbols_.size()) return std::nullopt;
        return symbols_[idx];
      }
    }
    return std::nullopt;
  }

 private:
  std::vector<std::uint8_t> symbols_;
  std::array<std::int32_t, 17> mincode_{};
  std::array<std::int32_t, 17> maxcode_{};
  std::array<std::int32_t, 17> valptr_{};
};

struct Symbol {
  std::uint8_t value;
  std::uint8_t extra_size;
  std::uint32_t extra_bits;
};

struct BlockSymbols {
  Symbol dc;
  std::vector<Symbol> ac;
};

BlockSymbols block_symbols(const Block& block, std::int32_t predictor) {
  BlockSymbols out;
  const std::int32_t diff = block[0] - predictor;
  const int s = category(diff);
  out.dc = {static_cast<std::uint8_t>(s), static_cast<std::uint8_t>(s), magnitude_bits(diff, s)};
  int run = 0;
  for (int k = 1; k < kBlockSize; ++k) {
    const std::int32_t v = block[kZigzag[k]];
    if (v == 0) {
      ++run;
      continue;
    }
    while (run > 15) {
      out.ac.push_back({kZrl, 0, 0});
      run -= 16;
    }
    const int size = category(v);
    out.ac.push_back({static_cast<std::uint8_t>((run << 4) | size), static_cast<std::uint8_t>(size),
                      magnitude_bits(v, size)});
    run = 0;
  }
  if (run > 0) out.ac.push_back({kEob, 0, 0});
  return out;
}

std::int32_t dc_limit(const ImageMetadata& m) { return 1024 / m.quant[0] + 1; }
std::int32_t ac_limit(const ImageMetadata& m, int natural) { return 2048 / m.quant[natural] + 1; }

enum class Outcome { Ok, Bad };

Outcome read_dc(BitReader& r, const HuffmanDecoder& dec, const ImageMetadata& m, std::int32_t& predictor,
                Block& block) {
  auto sym = dec.decode(r);
  if (!sym || *sym > kMaxDcCategory) return Outcome::Bad;
  auto bits = r.get(*sym);
  if (!bits) return Outcome::Bad;
  const std::int32_t value = predictor + extend(*bits, *sym);
  if (std::abs(value) > dc_limit(m)) return Outcome::Bad;
  predictor = value;
  block[0] = value;
  return Outcome::Ok;
}

Outcome read_ac(BitReader& r, const HuffmanDecoder& dec, const ImageMetadata& m, Block& block) {
  int k = 1;
  while (k < kBlockSize) {
    auto sym = dec.decode(r);
    if (!sym) return Outcome::Bad;
    const int run = *sym >> 4;
    const int size = *sym & 0x0F;
    if (size == 0) {
      if (*sym == kEob) return Outcome::Ok;
      if (*sym != kZrl) return Outcome::Bad;
      k += 16;
      if (k >= kBlockSize) return Outcome::Bad;
      continue;
    }
    if (size > kMaxAcCategory) return Outcome::Bad;
    k += run;
    if (k >= kBlockSize) return Outcome::Bad;
    auto bits = r.get(size);
    if (!bits) return Outcome::Bad;
    const std::int32_t v = extend(*bits, size);
    const int natural = kZigzag[k];
    if (std::abs(v) > ac_limit(m, natural)) return Outcome::Bad;
    block[natural] = v;
    ++k;
  }
  return Outcome::Ok;
}

void clear_ac(Block& block) { std::fill(block.begin() + 1, block.end(), 0); }

}  // namespace

Image::Image(int w, int h, std::uint8_t fill)
    : width(w), height(h), samples(static_cast<std::size_t>(w > 0 ? w : 0) * (h > 0 ? h : 0), fill) {}

bool Image::valid() const noexcept {
  return width > 0 && height > 0 && samples.size() == static_cast<std::size_t>(width) * height;
}

std::array<double, kBlockSize> forward_dct(const std::array<double, kBlockSize>& block) {
  const auto& b = dct_basis();
  std::array<double, kBlockSize> tmp{};
  std::array<double, kBlockSize> out{};
  for (int y = 0; y < 8; ++y)
    for (int u = 0; u < 8; ++u) {
      double s = 0;
      for (int x = 0; x < 8; ++x) s += b[u][x] * block[y * 8 + x];
      tmp[y * 8 + u] = s;
    }
  for (int u = 0; u < 8; ++u)
    for (int v = 0; v < 8; ++v) {
      double s = 0;
      for (int y = 0; y < 8; ++y) s += b[v][y] * tmp[y * 8 + u];
      out[v * 8 + u] = s;
    }
  return out;
}

std::array<double, kBlockSize> inverse_dct(const std::array<double, kBlockSize>& coeffs) {
  const auto& b = dct_basis();
  std::array<double, kBlockSize> tmp{};
  std::array<double, kBlockSize> out{};
  for (int v = 0; v < 8; ++v)
    for (int x = 0; x < 8; ++x) {
      double s = 0;
      for (int u = 0; u < 8; ++u) s += b[u][x] * coeffs[v * 8 + u];
      tmp[v * 8 + x] = s;
    }
  for (int x = 0; x < 8; ++x)
    for (int y = 0; y < 8; ++y) {
      double s = 0;
      for (int v = 0; v < 8; ++v) s += b[v][y] * tmp[v * 8 + x];
      out[y * 8 + x] = s;
    }
  return out;
}

const std::array<std::uint8_t, kBlockSize>& zigzag_to_natural() { return kZigzag; }

int zigzag_index(int row, int col) {
  const auto natural = static_cast<std::uint8_t>(row * 8 + col);
  return static_cast<int>(std::find(kZigzag.begin(), kZigzag.end(), natural) - kZigzag.begin());
}

std::array<std::uint16_t, kBlockSize> quality_table(int quality) {
  if (quality < 1 || quality > 100) throw ConfigError("quality must be in 1..100, got " + std::to_string(quality));
  const int scale = quality < 50 ? 5000 / quality : 200 - 2 * quality;
  std::array<std::uint16_t, kBlockSize> t{};
  for (int i = 0; i < kBlockSize; ++i) {
    const int q = (kLuminanceTable[i] * scale + 50) / 100;
    t[i] = static_cast<std::uint16_t>(std::clamp(q, 1, 255));
  }
  return t;
}

std::int32_t quantize(double coefficient, std::uint16_t step) {
  const double q = coefficient / step;
  return static_cast<std::int32_t>(q >= 0 ? std::floor(q + 0.5) : -std::floor(-q + 0.5));
}

TransformResult forward_transform(const Image& image, int quality) {
  if (!image.valid()) throw ConfigError("image must have positive dimensions and matching sample count");
  TransformResult out;
  auto& m = out.metadata;
  m.width = static_cast<std::uint32_t>(image.width);
  m.height = static_cast<std::uint32_t>(image.height);
  m.quality = quality;
  m.quant = quality_table(quality);
  const auto bx = m.blocks_x();
  const auto by = m.blocks_y();
  m.block_count = bx * by;
  out.blocks.reserve(m.block_count);
  for (std::uint32_t r = 0; r < by; ++r) {
    for (std::uint32_t c = 0; c < bx; ++c) {
      std::array<double, kBlockSize> px{};
      for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) {
          const int sx = std::min<int>(static_cast<int>(c * 8) + x, image.width - 1);
          const int sy = std::min<int>(static_cast<int>(r * 8) + y, image.height - 1);
          px[y * 8 + x] = static_cast<double>(image.at(sx, sy)) - 128.0;
        }
      const auto coeffs = forward_dct(px);
      Block b{};
      for (int i = 0; i < kBlockSize; ++i) b[i] = quantize(coeffs[i], m.quant[i]);
      out.blocks.push_back(b);
    }
  }
  return out;
}

Image reconstruct(std::span<const Block> blocks, const ImageMetadata& m) {
  Image img(static_cast<int>(m.width), static_cast<int>(m.height));
  const auto bx = m.blocks_x();
  for (std::size_t i = 0; i < blocks.size() && i < m.block_count; ++i) {
    std::array<double, kBlockSize> coeffs{};
    for (int k = 0; k < kBlockSize; ++k) coeffs[k] = static_cast<double>(blocks[i][k]) * m.quant[k];
    const auto px = inverse_dct(coeffs);
    const int ox = static_cast<int>(i % bx) * 8;
    const int oy = static_cast<int>(i / bx) * 8;
    for (int y = 0; y < 8; ++y)
      for (int x = 0; x < 8; ++x) {
        const int X = ox + x;
        const int Y = oy + y;
        if (X >= img.width || Y >= img.height) continue;
        const double v = std::round(px[y * 8 + x] + 128.0);
        img.at(X, Y) = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
      }
  }
  return img;
}

HuffmanTable build_huffman_table(std::span<const std::uint64_t, 256> frequencies) {
  // JPEG Annex K.2 with one reserved symbol (index 256) so no code is all ones.
  std::array<std::uint64_t, 257> freq{};
  std::copy(frequencies.begin(), frequencies.end(), freq.begin());
  freq[256] = 1;
  std::array<int, 257> codesize{};
  std::array<int, 257> others;
  others.fill(-1);

  for (;;) {
    int v1 = -1;
    int v2 = -1;
    for (int i = 0; i <= 256; ++i)
      if (freq[i] && (v1 < 0 || freq[i] <= freq[v1])) v1 = i;
    for (int i = 0; i <= 256; ++i)
      if (freq[i] && i != v1 && (v2 < 0 || freq[i] <= freq[v2])) v2 = i;
    if (v2 < 0) break;
    freq[v1] += freq[v2];
    freq[v2] = 0;
    ++codesize[v1];
    while (others[v1] >= 0) {
      v1 = others[v1];
      ++codesize[v1];
    }
    others[v1] = v2;
    ++codesize[v2];
    while (others[v2] >= 0) {
      v2 = others[v2];
      ++codesize[v2];
    }
  }

  std::array<int, 33> bits{};
  for (int i = 0; i <= 256; ++i)
    if (codesize[i]) ++bits[std::min(codesize[i], 32)];

  for (int i = 32; i > 16; --i) {
    while (bits[i] > 0) {
      int j = i - 2;
      while (bits[j] == 0) --j;
      bits[i] -= 2;
      bits[i - 1] += 1;
      bits[j + 1] += 2;
      bits[j] -= 1;
    }
  }
  int longest = 16;
  while (longest > 0 && bits[longest] == 0) --longest;
  if (longest > 0) --bits[longest];  // drop the reserved code

  HuffmanTable table;
  for (int i = 1; i <= 16; ++i) table.counts[i - 1] = static_cast<std::uint8_t>(bits[i]);
  for (int len = 1; len <= 32; ++len)
    for (int s = 0; s < 256; ++s)
      if (codesize[s] == len) table.symbols.push_back(static_cast<std::uint8_t>(s));
  // Length limiting may reshuffle sizes; symbols stay sorted by original size,
  // which is the order the counts are assigned in.
  return table;
}

CoefficientStreams encode_streams(std::span<const Block> blocks, ImageMetadata metadata,
                                  const EntropyOptions& options, std::vector<bool>* dc_byte_mask) {
  metadata.layout = options.layout;
  metadata.segment_blocks = options.segment_blocks;
  metadata.block_count = static_cast<std::uint32_t>(blocks.size());

  std::vector<BlockSymbols> symbols;
  symbols.reserve(blocks.size());
  std::array<std::uint64_t, 256> dc_freq{};
  std::array<std::uint64_t, 256> ac_freq{};
  std::int32_t predictor = 0;
  for (const auto& b : blocks) {
    symbols.push_back(block_symbols(b, predictor));
    predictor = b[0];
    ++dc_freq[symbols.back().dc.value];
    for (const auto& s : symbols.back().ac) ++ac_freq[s.value];
  }
  metadata.dc_table = build_huffman_table(dc_freq);
  metadata.ac_table = build_huffman_table(ac_freq);
  const auto dc_codes = code_map(metadata.dc_table);
  const auto ac_codes = code_map(metadata.ac_table);

  BitWriter dc;
  BitWriter ac;
  BitWriter& ac_target = options.layout == StreamLayout::Interleaved ? dc : ac;
  if (dc_byte_mask) dc_byte_mask->clear();
  auto mark_dc = [&](std::uint64_t from, std::uint64_t to) {
    if (!dc_byte_mask || to == from) return;
    const auto last = static_cast<std::size_t>((to - 1) / 8);
    if (dc_byte_mask->size() <= last) dc_byte_mask->resize(last + 1, false);
    for (auto i = static_cast<std::size_t>(from / 8); i <= last; ++i) (*dc_byte_mask)[i] = true;
  };

  metadata.segments.clear();
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const bool boundary = i == 0 || (options.segment_blocks > 0 && i % options.segment_blocks == 0);
    if (boundary) metadata.segments.push_back({dc.position(), ac_target.position()});
    const auto& bs = symbols[i];
    const auto start = dc.position();
    const auto& c = dc_codes[bs.dc.value];
    dc.put(c.bits, c.length);
    dc.put(bs.dc.extra_bits, bs.dc.extra_size);
    mark_dc(start, dc.position());
    for (const auto& s : bs.ac) {
      const auto& a = ac_codes[s.value];
      ac_target.put(a.bits, a.length);
      ac_target.put(s.extra_bits, s.extra_size);
    }
  }
  if (blocks.empty()) metadata.segments.push_back({});

  metadata.dc_bits = dc.position();
  metadata.ac_bits = options.layout == StreamLayout::Interleaved ? 0 : ac.position();
  CoefficientStreams out;
  out.dc_bytes = dc.finish();
  if (options.layout == StreamLayout::Separated) out.ac_bytes = ac.finish();
  if (dc_byte_mask) dc_byte_mask->resize(out.dc_bytes.size(), false);
  out.metadata = std::move(metadata);
  return out;
}

std::vector<Block> decode_coefficients(const CoefficientStreams& streams, bool tolerate_errors) {
  const auto& m = streams.metadata;
  const HuffmanDecoder dc_dec(m.dc_table);
  const HuffmanDecoder ac_dec(m.ac_table);
  const bool interleaved = m.layout == StreamLayout::Interleaved;
  std::vector<Block> blocks(m.block_count, Block{});

  if (!tolerate_errors) {
    BitReader dr(streams.dc_bytes, 0, m.dc_bits);
    BitReader ar(streams.ac_bytes, 0, m.ac_bits);
    BitReader& acr = interleaved ? dr : ar;
    std::int32_t predictor = 0;
    for (auto& b : blocks) {
      if (read_dc(dr, dc_dec, m, predictor, b) != Outcome::Ok)
        throw DecodeError("malformed DC symbol", dr.position() / 8);
      if (read_ac(acr, ac_dec, m, b) != Outcome::Ok)
        throw DecodeError(interleaved ? "malformed AC symbol in dc stream" : "malformed AC symbol",
                          acr.position() / 8);
    }
    return blocks;
  }

  const std::size_t nseg = m.segments.size();
  const std::uint32_t per = m.segment_blocks == 0 ? m.block_count : m.segment_blocks;
  // The DC predictor runs across segment boundaries: a wrong DC difference
  // keeps shifting every later block, as in plain DPCM.
  std::int32_t predictor = 0;
  for (std::size_t s = 0; s < nseg; ++s) {
    const std::size_t first = s * per;
    const std::size_t last = std::min<std::size_t>(first + per, blocks.size());
    const auto& seg = m.segments[s];
    const std::uint64_t dc_end = s + 1 < nseg ? m.segments[s + 1].dc_bit : m.dc_bits;
    const std::uint64_t ac_end = s + 1 < nseg ? m.segments[s + 1].ac_bit : m.ac_bits;
    BitReader dr(streams.dc_bytes, seg.dc_bit, dc_end);
    BitReader ar(streams.ac_bytes, seg.ac_bit, ac_end);
    bool dc_ok = true;
    bool ac_ok = true;
    for (std::size_t i = first; i < last; ++i) {
      auto& b = blocks[i];
      if (dc_ok && read_dc(dr, dc_dec, m, predictor, b) != Outcome::Ok) dc_ok = false;
      if (!dc_ok) b[0] = predictor;
      if (interleaved) {
        ac_ok = dc_ok;
        if (ac_ok && read_ac(dr, ac_dec, m, b) != Outcome::Ok) dc_ok = ac_ok = false;
      } else if (ac_ok && read_ac(ar, ac_dec, m, b) != Outcome::Ok) {
        ac_ok = false;
      }
      if (!ac_ok) clear_ac(b);
    }
  }
  return blocks;
}

Image decode_streams(const CoefficientStreams& streams, bool tolerate_errors) {
  const auto blocks = decode_coefficients(streams, tolerate_errors);
  return reconstruct(blocks, streams.metadata);
}

}  // namespace imgdna
