#include <doctest.h>

#include <algorithm>
#include <random>

#include "imgdna/strand_layer.hpp"

using namespace imgdna;

namespace {

std::vector<std::uint8_t> random_bytes(std::mt19937& rng, std::size_t n) {
  std::vector<std::uint8_t> b(n);
  for (auto& v : b) v = static_cast<std::uint8_t>(rng());
  return b;
}

struct Built {
  std::vector<std::uint8_t> dc, ac;
  Pool pool;
};

Built build(std::mt19937& rng, std::size_t dc_bytes, std::size_t ac_bytes, std::uint32_t pl_dc = 20,
            std::uint32_t pl_ac = 50) {
  Built b;
  b.dc = random_bytes(rng, dc_bytes);
  b.ac = random_bytes(rng, ac_bytes);
  const auto primers = generate_primers(99);
  GeometryRequest req;
  req.dc_trits = bytes_to_trits(b.dc).size();
  req.ac_trits = bytes_to_trits(b.ac).size();
  req.dc_partition_length = pl_dc;
  req.ac_partition_length = pl_ac;
  const auto g = plan_geometry(req);
  const auto dc = encode_stream(b.dc, g.dc_partition_length, g.dc_partitions_per_strand, 12);
  const auto ac = encode_stream(b.ac, g.ac_partition_length, g.ac_partitions_per_strand, 12);
  b.pool = assemble(dc, ac, primers, {250, 12, "img"});
  return b;
}

std::pair<std::vector<std::uint8_t>, std::vector<std::uint8_t>> decode(const Pool& pool) {
  const auto d = disassemble(pool);
  return {decode_stream(d.dc, pool.mapping.dc, pool.mapping.barrier_window).bytes,
          decode_stream(d.ac, pool.mapping.ac, pool.mapping.barrier_window).bytes};
}

}  // namespace

TEST_CASE("primer constraints") {
  CHECK(primer_valid("ACGTACGTACGTACGTACGT"));
  CHECK_FALSE(primer_valid("ACGTACGTACGTACGTACG"
                           "TACGTACGT"));             // too long
  CHECK_FALSE(primer_valid("ACGTACGTAAAACGTACGTA"));  // run of four
  CHECK_FALSE(primer_valid("ATATATATATATATATATAT"));  // GC 0
  CHECK_FALSE(primer_valid("GCGCGCGCGCGCGCGCGCGC"));  // GC 1
  CHECK_FALSE(primer_valid("ACGTACGTACGTACGTACGN"));

  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto p = generate_primers(seed, 18 + seed % 8);
    CHECK(primer_valid(p.forward));
    CHECK(primer_valid(p.reverse));
    CHECK(p.forward != p.reverse);
    CHECK(max_homopolymer(p.forward) == 1);
  }
  CHECK(generate_primers(5) == generate_primers(5));
  CHECK_THROWS_AS(generate_primers(1, 17), ConfigError);
}

TEST_CASE("constraint report") {
  auto r = validate_constraints("AAAA");
  CHECK(r.max_homopolymer == 4);
  CHECK_FALSE(r.homopolymer_ok);
  r = validate_constraints("GGCC");
  CHECK(r.gc_fraction == 1.0);
  CHECK_FALSE(r.gc_ok);
  std::string acgt;
  for (int i = 0; i < 50; ++i) acgt += "ACGT";
  r = validate_constraints(acgt);
  CHECK(r.passes());
  CHECK(r.gc_fraction == 0.5);
  CHECK(r.length == 200);
  std::string long_seq;
  for (int i = 0; i < 250; ++i) long_seq += "ACGT";
  CHECK_FALSE(validate_constraints(long_seq).length_ok);
}

TEST_CASE("index width and partition packing") {
  CHECK(index_width_for(1) == 1);
  CHECK(index_width_for(2) == 2);
  CHECK(index_width_for(4) == 2);
  CHECK(index_width_for(5) == 3);
  CHECK(index_width_for(13) == 3);
  CHECK(index_width_for(14) == 4);
  for (std::uint64_t n = 1; n < 3000; n += 7) {
    const auto w = index_width_for(n);
    std::uint64_t space = 1;
    for (std::uint32_t i = 0; i < w; ++i) space *= 3;
    CHECK(space >= 2 * n);
    CHECK(space < 6 * n);
  }

  CHECK(partitions_per_strand(200, 50) == 3);
  CHECK(partitions_per_strand(206, 50) == 4);
  CHECK(partitions_per_strand(205, 50) == 3);
  CHECK(partitions_per_strand(40, 50) == 0);
}

TEST_CASE("geometry strand counts") {
  std::mt19937 rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    GeometryRequest req;
    req.dc_trits = rng() % 20000;
    req.ac_trits = rng() % 200000;
    req.dc_partition_length = 10 + rng() % 100;
    req.ac_partition_length = 10 + rng() % 150;
    const auto g = plan_geometry(req);
    CHECK(g.payload_capacity == 250 - 40 - g.index_width);
    CHECK(index_width_for(std::max(g.dc_strands, g.ac_strands)) <= g.index_width);
    auto ceil_div = [](std::uint64_t a, std::uint64_t b) { return (a + b - 1) / b; };
    const auto dc_parts = ceil_div(req.dc_trits, req.dc_partition_length);
    CHECK(g.dc_strands == ceil_div(dc_parts, g.dc_partitions_per_strand));
    CHECK(g.ac_strands == ceil_div(ceil_div(req.ac_trits, req.ac_partition_length), g.ac_partitions_per_strand));
    const auto used = g.dc_partitions_per_strand * (req.dc_partition_length + 2) - 2;
    CHECK(used <= g.payload_capacity);
    CHECK(used + req.dc_partition_length + 2 > g.payload_capacity);
  }

  GeometryRequest flat;
  flat.dc_trits = 1000;
  flat.ac_trits = 10000;
  flat.dc_partition_length = flat.ac_partition_length = 0;
  const auto g = plan_geometry(flat);
  CHECK(g.dc_partitions_per_strand == 1);
  CHECK(g.dc_partition_length == g.payload_capacity);
  CHECK(g.dc_strands == (1000 + g.payload_capacity - 1) / g.payload_capacity);
  CHECK(g.ac_strands == (10000 + g.payload_capacity - 1) / g.payload_capacity);

  GeometryRequest too_big;
  too_big.ac_partition_length = 300;
  CHECK_THROWS_AS(plan_geometry(too_big), ConfigError);
  GeometryRequest too_short;
  too_short.strand_length = 40;
  CHECK_THROWS_AS(plan_geometry(too_short), ConfigError);
}

TEST_CASE("internal index round trip") {
  MappingTable m;
  m.primers = generate_primers(3);
  m.dc.strand_count = 17;
  m.ac.strand_count = 250;
  m.index_width = index_width_for(250);
  for (auto type : {StreamType::DC, StreamType::AC})
    for (std::uint32_t off = 0; off < (type == StreamType::DC ? 17u : 250u); ++off) {
      const auto field = encode_index({type, off}, m);
      CHECK(field.size() == m.index_width);
      CHECK(field.front() != m.primers.forward.back());
      const auto back = decode_index(field, m);
      REQUIRE(back);
      CHECK(*back == InternalIndex{type, off});
    }
  // DC offset 17 is out of range even though the field is well formed.
  CHECK_FALSE(decode_index(encode_index({StreamType::DC, 17}, m), m));
  CHECK_FALSE(decode_index(std::string(m.index_width, 'A'), m));
  CHECK_FALSE(decode_index("AC", m));
}

TEST_CASE("pool assembly and reassembly") {
  std::mt19937 rng(2);
  auto b = build(rng, 900, 6000);
  const auto& m = b.pool.mapping;
  CHECK(b.pool.strands.size() == m.dc.strand_count + m.ac.strand_count);
  for (std::size_t i = 0; i < b.pool.strands.size(); ++i) {
    const auto& s = b.pool.strands[i].sequence;
    CHECK(s.size() <= 250);
    CHECK(s.substr(0, 20) == m.primers.forward);
    CHECK(s.substr(s.size() - 20) == m.primers.reverse);
    CHECK(max_homopolymer(s) <= 3);
    if (i + 1 < m.dc.strand_count || (i >= m.dc.strand_count && i + 1 < b.pool.strands.size()))
      CHECK(s.size() == 40 + m.index_width + (i < m.dc.strand_count ? m.dc.partitions_per_strand * 22 - 2
                                                                    : m.ac.partitions_per_strand * 52 - 2));
  }
  CHECK(b.pool.strands.front().id == "img:DC:00000");

  auto [dc, ac] = decode(b.pool);
  CHECK(dc == b.dc);
  CHECK(ac == b.ac);

  std::shuffle(b.pool.strands.begin(), b.pool.strands.end(), rng);
  std::tie(dc, ac) = decode(b.pool);
  CHECK(dc == b.dc);
  CHECK(ac == b.ac);
}

TEST_CASE("empty AC stream") {
  std::mt19937 rng(3);
  auto b = build(rng, 300, 0);
  CHECK(b.pool.mapping.ac.strand_count == 0);
  auto [dc, ac] = decode(b.pool);
  CHECK(dc == b.dc);
  CHECK(ac.empty());
}

TEST_CASE("missing strands and bad indexes") {
  std::mt19937 rng(4);
  auto b = build(rng, 400, 5000);
  const auto dc_count = b.pool.mapping.dc.strand_count;
  const auto total = b.pool.strands.size();
  REQUIRE(total > dc_count + 3);

  auto gap = b.pool;
  gap.strands.erase(gap.strands.begin() + dc_count + 1);
  const auto d = disassemble(gap);
  CHECK(d.ac.gap_count() == 1);
  CHECK_FALSE(d.ac.payloads[1].has_value());
  const auto ac = decode_stream(d.ac, gap.mapping.ac, 12);
  CHECK(ac.bytes.size() == b.ac.size());
  const auto per = gap.mapping.ac.partitions_per_strand;
  for (std::size_t p = 0; p < ac.damaged.size(); ++p) CHECK(ac.damaged[p] == (p / per == 1));
  // Every byte whose codeword ends inside strand 0 survives.
  const auto kept = static_cast<long>(gap.mapping.ac.sync[1].byte_offset) - 1;
  CHECK(std::equal(b.ac.begin(), b.ac.begin() + kept, ac.bytes.begin()));

  auto bad = b.pool;
  const auto w = bad.mapping.index_width;
  bad.strands[2].sequence.replace(20, w, std::string(w, bad.mapping.primers.forward.back()));
  bad.strands[5].sequence = "ACGT";
  const auto q = disassemble(bad);
  CHECK(q.quarantined == std::vector<std::size_t>{2, 5});
}

TEST_CASE("duplicate copies are resolved by vote") {
  std::mt19937 rng(5);
  auto b = build(rng, 200, 2000);
  Pool pool = b.pool;
  const auto copy = pool.strands;
  pool.strands.insert(pool.strands.end(), copy.begin(), copy.end());
  pool.strands.insert(pool.strands.end(), copy.begin(), copy.end());
  // Corrupt one copy of strand 0 in a single payload position, and another copy
  // of strand 0 in a different position: no two agree, position-wise vote wins.
  const std::size_t at = 20 + pool.mapping.index_width + 3;
  auto flip = [](char c) { return c == 'C' ? 'G' : 'C'; };
  pool.strands[0].sequence[at] = flip(pool.strands[0].sequence[at]);
  pool.strands[copy.size()].sequence[at + 5] = flip(pool.strands[copy.size()].sequence[at + 5]);
  auto d = disassemble(pool);
  REQUIRE(d.dc.payloads[0]);
  CHECK(*d.dc.payloads[0] == copy[0].sequence.substr(20 + pool.mapping.index_width,
                                                      copy[0].sequence.size() - 40 - pool.mapping.index_width));
  auto [dc, ac] = decode(pool);
  CHECK(dc == b.dc);
  CHECK(ac == b.ac);
}

TEST_CASE("FASTA and mapping sidecar") {
  std::mt19937 rng(6);
  auto b = build(rng, 300, 3000);
  const auto text = format_fasta(b.pool.strands);
  CHECK(text.rfind(">img:DC:00000\n", 0) == 0);
  CHECK(parse_fasta(text) == b.pool.strands);
  CHECK(parse_fasta(">a\nAC\nGT\n\n>b\nTT\n") == std::vector<Strand>{{"a", "ACGT"}, {"b", "TT"}});

  try {
    (void)parse_fasta(">a\nACGT\nACXT\n");
    FAIL("expected DecodeError");
  } catch (const DecodeError& e) {
    CHECK(e.offset() == 3);
  }
  CHECK_THROWS_AS(parse_fasta("ACGT\n"), DecodeError);

  const auto bytes = serialize_mapping(b.pool.mapping);
  CHECK(parse_mapping(bytes) == b.pool.mapping);
  auto bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_AS(parse_mapping(bad), DecodeError);
  auto extra = bytes;
  extra.push_back(0);
  CHECK_THROWS_AS(parse_mapping(extra), DecodeError);
  auto cut = bytes;
  cut.resize(cut.size() - 1);
  CHECK_THROWS_AS(parse_mapping(cut), DecodeError);
}
