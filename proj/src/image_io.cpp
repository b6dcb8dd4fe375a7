#include <algorithm>
#include <cctype>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "bitio.hpp"
#include "imgdna/image_codec.hpp"

namespace imgdna {

namespace {

using detail::ByteCursor;

std::vector<std::uint8_t> slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

// Reads one whitespace-delimited header token, skipping '#' comments.
std::string header_token(std::span<const std::uint8_t> b, std::size_t& pos) {
  for (;;) {
    while (pos < b.size() && std::isspace(b[pos])) ++pos;
    if (pos < b.size() && b[pos] == '#') {
      while (pos < b.size() && b[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  std::string tok;
  while (pos < b.size() && !std::isspace(b[pos]) && b[pos] != '#') tok.push_back(static_cast<char>(b[pos++]));
  return tok;
}

int header_int(std::span<const std::uint8_t> b, std::size_t& pos) {
  const auto tok = header_token(b, pos);
  if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos)
    throw DecodeError("bad PGM header field '" + tok + "'", pos);
  return std::stoi(tok);
}

constexpr char kMetaMagic[4] = {'I', 'D', 'N', 'M'};
constexpr std::uint16_t kMetaVersion = 1;

void put_tag(std::vector<std::uint8_t>& out, const char (&tag)[5], const std::vector<std::uint8_t>& body) {
  out.insert(out.end(), tag, tag + 4);
  detail::put_u32(out, static_cast<std::uint32_t>(body.size()));
  out.insert(out.end(), body.begin(), body.end());
}

std::vector<std::uint8_t> table_body(const HuffmanTable& t) {
  std::vector<std::uint8_t> b(t.counts.begin(), t.counts.end());
  b.insert(b.end(), t.symbols.begin(), t.symbols.end());
  return b;
}

HuffmanTable parse_table(std::span<const std::uint8_t> body) {
  if (body.size() < 16) throw DecodeError("short huffman table", 0);
  HuffmanTable t;
  std::size_t n = 0;
  for (int i = 0; i < 16; ++i) {
    t.counts[i] = body[i];
    n += body[i];
  }
  if (body.size() != 16 + n) throw DecodeError("huffman table size mismatch", 16);
  t.symbols.assign(body.begin() + 16, body.end());
  return t;
}

void put_varint(std::vector<std::uint8_t>& out, std::uint64_t v) {
  while (v >= 0x80) {
    out.push_back(static_cast<std::uint8_t>(v | 0x80));
    v >>= 7;
  }
  out.push_back(static_cast<std::uint8_t>(v));
}

std::uint64_t get_varint(ByteCursor& cur) {
  std::uint64_t v = 0;
  for (int shift = 0; shift < 64; shift += 7) {
    const auto byte = cur.u8();
    v |= static_cast<std::uint64_t>(byte & 0x7F) << shift;
    if (!(byte & 0x80)) return v;
  }
  throw DecodeError("varint too long", cur.position());
}

}  // namespace

Image parse_pgm(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 0;
  if (header_token(bytes, pos) != "P5") throw DecodeError("not a binary PGM (P5)", 0);
  const int w = header_int(bytes, pos);
  const int h = header_int(bytes, pos);
  const int maxval = header_int(bytes, pos);
  if (maxval != 255) throw DecodeError("only maxval 255 is supported", pos);
  if (w <= 0 || h <= 0) throw DecodeError("PGM dimensions must be positive", pos);
  ++pos;  // single whitespace after maxval
  const std::size_t n = static_cast<std::size_t>(w) * h;
  if (bytes.size() < pos + n) throw DecodeError("PGM raster truncated", bytes.size());
  Image img(w, h);
  std::memcpy(img.samples.data(), bytes.data() + pos, n);
  return img;
}

Image read_pgm(const std::string& path) {
  const auto bytes = slurp(path);
  return parse_pgm(bytes);
}

std::vector<std::uint8_t> format_pgm(const Image& image) {
  const std::string header = "P5\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), image.samples.begin(), image.samples.end());
  return out;
}

void write_pgm(const std::string& path, const Image& image) { spit(path, format_pgm(image)); }

// Layout: magic "IDNM", u16 version, then records of (4-byte tag, u32 length,
// body). Unknown tags are skipped so newer writers stay readable.
std::vector<std::uint8_t> serialize_metadata(const ImageMetadata& m) {
  std::vector<std::uint8_t> out(kMetaMagic, kMetaMagic + 4);
  detail::put_u16(out, kMetaVersion);

  std::vector<std::uint8_t> b;
  detail::put_u32(b, m.width);
  detail::put_u32(b, m.height);
  detail::put_u32(b, m.block_count);
  put_tag(out, "DIMS", b);

  b.clear();
  detail::put_u8(b, static_cast<std::uint8_t>(m.quality));
  for (auto q : m.quant) detail::put_u16(b, q);
  put_tag(out, "QUAN", b);

  put_tag(out, "HDC ", table_body(m.dc_table));
  put_tag(out, "HAC ", table_body(m.ac_table));

  b.clear();
  detail::put_u8(b, static_cast<std::uint8_t>(m.layout));
  detail::put_u64(b, m.dc_bits);
  detail::put_u64(b, m.ac_bits);
  put_tag(out, "STRM", b);

  // Segment starts are increasing, so they are stored as varint deltas.
  b.clear();
  detail::put_u32(b, m.segment_blocks);
  detail::put_u32(b, static_cast<std::uint32_t>(m.segments.size()));
  SegmentSync prev;
  for (const auto& s : m.segments) {
    if (s.dc_bit < prev.dc_bit || s.ac_bit < prev.ac_bit) throw ConfigError("segment offsets must not decrease");
    put_varint(b, s.dc_bit - prev.dc_bit);
    put_varint(b, s.ac_bit - prev.ac_bit);
    prev = s;
  }
  put_tag(out, "SEGS", b);
  return out;
}

ImageMetadata parse_metadata(std::span<const std::uint8_t> bytes) {
  ByteCursor cur(bytes);
  const auto magic = cur.take(4);
  if (!std::equal(magic.begin(), magic.end(), kMetaMagic)) throw DecodeError("bad metadata magic", 0);
  if (const auto v = cur.u16(); v != kMetaVersion) throw DecodeError("unsupported metadata version", 4);

  ImageMetadata m;
  while (!cur.done()) {
    const auto tag_bytes = cur.take(4);
    const std::string tag(tag_bytes.begin(), tag_bytes.end());
    const auto len = cur.u32();
    ByteCursor body(cur.take(len));
    if (tag == "DIMS") {
      m.width = body.u32();
      m.height = body.u32();
      m.block_count = body.u32();
    } else if (tag == "QUAN") {
      m.quality = body.u8();
      for (auto& q : m.quant) {
        q = body.u16();
        if (q == 0) throw DecodeError("zero quantization step", cur.position());
      }
    } else if (tag == "HDC " || tag == "HAC ") {
      auto t = parse_table(body.take(len));
      (tag == "HDC " ? m.dc_table : m.ac_table) = std::move(t);
    } else if (tag == "STRM") {
      m.layout = static_cast<StreamLayout>(body.u8());
      m.dc_bits = body.u64();
      m.ac_bits = body.u64();
    } else if (tag == "SEGS") {
      m.segment_blocks = body.u32();
      const auto n = body.u32();
      if (n > len) throw DecodeError("segment count exceeds record size", cur.position());
      m.segments.resize(n);
      SegmentSync prev;
      for (auto& s : m.segments) {
        s.dc_bit = prev.dc_bit + get_varint(body);
        s.ac_bit = prev.ac_bit + get_varint(body);
        prev = s;
      }
    }
  }
  return m;
}

}  // namespace imgdna
