#include <algorithm>

#include "bitio.hpp"
#include "imgdna/strand_layer.hpp"

namespace imgdna {

namespace {

using detail::ByteCursor;

constexpr char kMapMagic[4] = {'I', 'D', 'N', 'P'};
constexpr std::uint16_t kMapVersion = 1;

void put_string(std::vector<std::uint8_t>& out, std::string_view s) {
  detail::put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.insert(out.end(), s.begin(), s.end());
}

std::string get_string(ByteCursor& cur) {
  const auto n = cur.u32();
  const auto b = cur.take(n);
  return {b.begin(), b.end()};
}

void put_extent(std::vector<std::uint8_t>& out, const StreamExtent& e) {
  detail::put_u64(out, e.trit_count);
  detail::put_u64(out, e.byte_count);
  detail::put_u32(out, e.partition_length);
  detail::put_u32(out, e.partitions_per_strand);
  detail::put_u32(out, e.strand_count);
  detail::put_u32(out, static_cast<std::uint32_t>(e.sync.size()));
  for (const auto& s : e.sync) {
    detail::put_u64(out, s.trit_offset);
    detail::put_u64(out, s.byte_offset);
  }
}

StreamExtent get_extent(ByteCursor& cur) {
  StreamExtent e;
  e.trit_count = cur.u64();
  e.byte_count = cur.u64();
  e.partition_length = cur.u32();
  e.partitions_per_strand = cur.u32();
  e.strand_count = cur.u32();
  e.sync.resize(cur.u32());
  for (auto& s : e.sync) {
    s.trit_offset = cur.u64();
    s.byte_offset = cur.u64();
  }
  return e;
}

}  // namespace

std::string format_fasta(const std::vector<Strand>& strands) {
  std::string out;
  for (const auto& s : strands) {
    out += '>';
    out += s.id;
    out += '\n';
    out += s.sequence;
    out += '\n';
  }
  return out;
}

std::vector<Strand> parse_fasta(std::string_view text) {
  std::vector<Strand> out;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = nl + 1;
    ++line_no;
    if (line.empty()) continue;
    if (line.front() == '>') {
      out.push_back({std::string(line.substr(1)), {}});
    } else {
      if (out.empty()) throw DecodeError("sequence before first FASTA header", line_no);
      if (!is_nucleotide_sequence(line)) throw DecodeError("non-ACGT character in FASTA record", line_no);
      out.back().sequence.append(line);
    }
  }
  return out;
}

std::vector<std::uint8_t> serialize_mapping(const MappingTable& m) {
  std::vector<std::uint8_t> out(kMapMagic, kMapMagic + 4);
  detail::put_u16(out, kMapVersion);
  put_string(out, m.image_id);
  put_string(out, m.primers.forward);
  put_string(out, m.primers.reverse);
  detail::put_u32(out, m.strand_length);
  detail::put_u32(out, m.index_width);
  detail::put_u32(out, m.barrier_window);
  put_extent(out, m.dc);
  put_extent(out, m.ac);
  return out;
}

MappingTable parse_mapping(std::span<const std::uint8_t> bytes) {
  ByteCursor cur(bytes);
  const auto magic = cur.take(4);
  if (!std::equal(magic.begin(), magic.end(), kMapMagic)) throw DecodeError("bad mapping-table magic", 0);
  if (cur.u16() != kMapVersion) throw DecodeError("unsupported mapping-table version", 4);
  MappingTable m;
  m.image_id = get_string(cur);
  m.primers.forward = get_string(cur);
  m.primers.reverse = get_string(cur);
  m.strand_length = cur.u32();
  m.index_width = cur.u32();
  m.barrier_window = cur.u32();
  m.dc = get_extent(cur);
  m.ac = get_extent(cur);
  if (!cur.done()) throw DecodeError("trailing bytes in mapping table", cur.position());
  return m;
}

}  // namespace imgdna
