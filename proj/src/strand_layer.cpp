#include "imgdna/strand_layer.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <random>

namespace imgdna {

namespace {

constexpr char kBases[4] = {'A', 'C', 'G', 'T'};

bool repeats_with_seed(char seed, std::string_view field) {
  char prev = seed;
  for (char c : field) {
    if (c == prev) return true;
    prev = c;
  }
  return false;
}

Nucleotide as_nucleotide(char c) {
  switch (c) {
    case 'C': return Nucleotide::C;
    case 'G': return Nucleotide::G;
    case 'T': return Nucleotide::T;
    default: return Nucleotide::A;
  }
}

char last_or_a(std::string_view s) { return s.empty() ? 'A' : s.back(); }

// Splits a barriered sequence into per-strand payloads of whole partitions.
std::vector<std::string_view> chunk(const BarrieredSequence& seq, std::uint32_t per_strand) {
  std::vector<std::string_view> out;
  const std::string_view all = seq.sequence;
  std::size_t pos = 0;
  for (std::size_t p = 0; p < seq.partition_count; p += per_strand) {
    const std::size_t n = std::min<std::size_t>(per_strand, seq.partition_count - p);
    std::size_t trits = 0;
    for (std::size_t q = p; q < p + n; ++q)
      trits += std::min<std::size_t>(seq.partition_length, seq.trit_count - q * seq.partition_length);
    const std::size_t len = trits + (n - 1) * kBarrier.size();
    out.push_back(all.substr(pos, len));
    pos += len + kBarrier.size();  // skip the barrier that the strand boundary replaces
  }
  return out;
}

}  // namespace

const char* to_string(StreamType type) noexcept { return type == StreamType::DC ? "DC" : "AC"; }

double gc_fraction(std::string_view seq) noexcept {
  if (seq.empty()) return 0.0;
  const auto gc = std::count_if(seq.begin(), seq.end(), [](char c) { return c == 'G' || c == 'C'; });
  return static_cast<double>(gc) / static_cast<double>(seq.size());
}

bool primer_valid(std::string_view primer) noexcept {
  if (primer.size() < 18 || primer.size() > 25 || !is_nucleotide_sequence(primer)) return false;
  const double gc = gc_fraction(primer);
  return max_homopolymer(primer) < 4 && gc >= 0.4 && gc <= 0.6;
}

PrimerPair generate_primers(std::uint64_t seed, std::size_t length) {
  if (length < 18 || length > 25) throw ConfigError("primer length must be in [18,25]");
  std::mt19937_64 rng(seed);
  auto one = [&] {
    for (;;) {
      NucleotideSequence p;
      char prev = 0;
      for (std::size_t i = 0; i < length; ++i) {
        char c;
        do c = kBases[rng() % 4];
        while (c == prev);
        p.push_back(c);
        prev = c;
      }
      if (primer_valid(p)) return p;
    }
  };
  PrimerPair pair{one(), one()};
  while (pair.reverse == pair.forward) pair.reverse = one();
  return pair;
}

std::uint64_t StreamExtent::strand_trits(std::uint32_t s) const noexcept {
  const std::uint64_t per = static_cast<std::uint64_t>(partitions_per_strand) * partition_length;
  const std::uint64_t start = s * per;
  if (start >= trit_count) return 0;
  return std::min(per, trit_count - start);
}

std::uint32_t MappingTable::index_radix() const noexcept {
  return std::max<std::uint32_t>({dc.strand_count, ac.strand_count, 1u});
}

std::uint32_t index_width_for(std::uint64_t max_strands) noexcept {
  const std::uint64_t need = 2 * std::max<std::uint64_t>(max_strands, 1);
  std::uint32_t w = 1;
  std::uint64_t space = 3;
  while (space < need) {
    space *= 3;
    ++w;
  }
  return w;
}

std::uint32_t partitions_per_strand(std::uint64_t capacity, std::uint64_t partition_length) noexcept {
  if (partition_length == 0) return 0;
  return static_cast<std::uint32_t>((capacity + kBarrier.size()) / (partition_length + kBarrier.size()));
}

StrandGeometry plan_geometry(const GeometryRequest& req) {
  const std::uint64_t overhead = std::uint64_t{req.forward_primer_length} + req.reverse_primer_length;
  StrandGeometry g;
  std::uint32_t width = 1;
  for (int guard = 0; guard < 64; ++guard) {
    if (req.strand_length <= overhead + width) throw ConfigError("strand too short for primers and index");
    g.index_width = width;
    g.payload_capacity = static_cast<std::uint32_t>(req.strand_length - overhead - width);
    g.dc_partition_length = req.dc_partition_length ? req.dc_partition_length : g.payload_capacity;
    g.ac_partition_length = req.ac_partition_length ? req.ac_partition_length : g.payload_capacity;
    g.dc_partitions_per_strand = partitions_per_strand(g.payload_capacity, g.dc_partition_length);
    g.ac_partitions_per_strand = partitions_per_strand(g.payload_capacity, g.ac_partition_length);
    if (g.dc_partitions_per_strand == 0 || g.ac_partitions_per_strand == 0)
      throw ConfigError("payload capacity " + std::to_string(g.payload_capacity) +
                        " nt is too small for one partition");
    auto strands = [](std::uint64_t trits, std::uint32_t pl, std::uint32_t per) {
      const auto parts = partitions_for(trits, pl);
      return static_cast<std::uint32_t>((parts + per - 1) / per);
    };
    g.dc_strands = strands(req.dc_trits, g.dc_partition_length, g.dc_partitions_per_strand);
    g.ac_strands = strands(req.ac_trits, g.ac_partition_length, g.ac_partitions_per_strand);
    const auto needed = index_width_for(std::max(g.dc_strands, g.ac_strands));
    if (needed <= width) return g;
    width = needed;
  }
  throw ConfigError("strand geometry did not converge");
}

StreamPayload encode_stream(std::span<const std::uint8_t> bytes, std::uint32_t partition_length,
                            std::uint32_t partitions_per_strand, std::uint32_t barrier_window) {
  StreamPayload out;
  const auto trits = bytes_to_trits(bytes);
  BarrierConfig cfg{partition_length, std::min<std::size_t>(barrier_window, 2 * std::size_t{partition_length} - 2)};
  out.sequence = insert_barriers(trits, cfg);
  out.byte_count = bytes.size();
  out.sync = sync_points(bytes, std::size_t{partition_length} * partitions_per_strand);
  return out;
}

NucleotideSequence encode_index(const InternalIndex& index, const MappingTable& mapping) {
  const std::uint64_t radix = mapping.index_radix();
  std::uint64_t value = static_cast<std::uint64_t>(index.type) * radix + index.offset;
  TritStream trits(mapping.index_width, 0);
  for (std::size_t i = trits.size(); i-- > 0;) {
    trits[i] = static_cast<std::uint8_t>(value % 3);
    value /= 3;
  }
  return rotate_encode(trits, as_nucleotide(last_or_a(mapping.primers.forward)));
}

std::optional<InternalIndex> decode_index(std::string_view field, const MappingTable& mapping) {
  const char seed = last_or_a(mapping.primers.forward);
  if (field.size() != mapping.index_width || repeats_with_seed(seed, field)) return std::nullopt;
  std::uint64_t value = 0;
  for (auto t : rotate_decode(field, as_nucleotide(seed))) value = value * 3 + t;
  const std::uint64_t radix = mapping.index_radix();
  const auto type = value / radix;
  const auto offset = static_cast<std::uint32_t>(value % radix);
  if (type > 1) return std::nullopt;
  const auto st = static_cast<StreamType>(type);
  const auto& extent = st == StreamType::DC ? mapping.dc : mapping.ac;
  if (offset >= extent.strand_count) return std::nullopt;
  return InternalIndex{st, offset};
}

Pool assemble(const StreamPayload& dc, const StreamPayload& ac, const PrimerPair& primers,
              const AssemblyOptions& options) {
  if (!primer_valid(primers.forward) || !primer_valid(primers.reverse)) throw ConfigError("invalid primer pair");
  GeometryRequest req;
  req.strand_length = options.strand_length;
  req.forward_primer_length = static_cast<std::uint32_t>(primers.forward.size());
  req.reverse_primer_length = static_cast<std::uint32_t>(primers.reverse.size());
  req.dc_trits = dc.sequence.trit_count;
  req.ac_trits = ac.sequence.trit_count;
  req.dc_partition_length = static_cast<std::uint32_t>(dc.sequence.partition_length);
  req.ac_partition_length = static_cast<std::uint32_t>(ac.sequence.partition_length);
  const auto g = plan_geometry(req);

  Pool pool;
  auto& m = pool.mapping;
  m.image_id = options.image_id;
  m.primers = primers;
  m.strand_length = options.strand_length;
  m.index_width = g.index_width;
  m.barrier_window = options.barrier_window;
  auto fill_extent = [](StreamExtent& e, const StreamPayload& p, std::uint32_t pl, std::uint32_t per,
                        std::uint32_t count) {
    e.trit_count = p.sequence.trit_count;
    e.byte_count = p.byte_count;
    e.partition_length = pl;
    e.partitions_per_strand = per;
    e.strand_count = count;
    e.sync = p.sync;
  };
  fill_extent(m.dc, dc, g.dc_partition_length, g.dc_partitions_per_strand, g.dc_strands);
  fill_extent(m.ac, ac, g.ac_partition_length, g.ac_partitions_per_strand, g.ac_strands);

  auto emit = [&](const StreamPayload& p, StreamType type, std::uint32_t per) {
    const auto pieces = chunk(p.sequence, per);
    for (std::uint32_t s = 0; s < pieces.size(); ++s) {
      char id[64];
      std::snprintf(id, sizeof id, "%s:%s:%05u", m.image_id.c_str(), to_string(type), s);
      Strand strand{id, primers.forward};
      strand.sequence += encode_index({type, s}, m);
      strand.sequence += pieces[s];
      strand.sequence += primers.reverse;
      pool.strands.push_back(std::move(strand));
    }
  };
  emit(dc, StreamType::DC, g.dc_partitions_per_strand);
  emit(ac, StreamType::AC, g.ac_partitions_per_strand);
  return pool;
}

std::size_t StreamReads::gap_count() const noexcept {
  return static_cast<std::size_t>(std::count(payloads.begin(), payloads.end(), std::nullopt));
}

DisassembledPool disassemble(const Pool& pool) {
  const auto& m = pool.mapping;
  const std::size_t fwd = m.primers.forward.size();
  const std::size_t rev = m.primers.reverse.size();

  DisassembledPool out;
  // candidates[type][offset] -> payloads in pool order
  std::vector<std::vector<NucleotideSequence>> cand[2];
  cand[0].resize(m.dc.strand_count);
  cand[1].resize(m.ac.strand_count);

  for (std::size_t i = 0; i < pool.strands.size(); ++i) {
    const std::string_view read = pool.strands[i].sequence;
    if (read.size() < fwd + m.index_width + rev) {
      out.quarantined.push_back(i);
      continue;
    }
    const auto index = decode_index(read.substr(fwd, m.index_width), m);
    if (!index) {
      out.quarantined.push_back(i);
      continue;
    }
    const auto payload = read.substr(fwd + m.index_width, read.size() - fwd - m.index_width - rev);
    cand[static_cast<int>(index->type)][index->offset].emplace_back(payload);
  }

  auto resolve = [](std::vector<NucleotideSequence>& copies) -> std::optional<NucleotideSequence> {
    if (copies.empty()) return std::nullopt;
    if (copies.size() == 1) return std::move(copies.front());
    // Majority over identical copies; ties go to the first seen.
    std::size_t best = 0;
    std::size_t best_votes = 0;
    for (std::size_t a = 0; a < copies.size(); ++a) {
      const auto votes = static_cast<std::size_t>(std::count(copies.begin(), copies.end(), copies[a]));
      if (votes > best_votes) {
        best = a;
        best_votes = votes;
      }
    }
    if (best_votes > 1) return std::move(copies[best]);
    // No two copies agree: position-wise vote among copies of the modal length.
    std::map<std::size_t, std::size_t> lengths;
    for (const auto& c : copies) ++lengths[c.size()];
    std::size_t modal = copies.front().size();
    std::size_t modal_votes = 0;
    for (const auto& c : copies)
      if (lengths[c.size()] > modal_votes) {
        modal = c.size();
        modal_votes = lengths[c.size()];
      }
    if (modal_votes < 2) return std::move(copies.front());
    NucleotideSequence consensus(modal, 'A');
    for (std::size_t p = 0; p < modal; ++p) {
      int counts[4] = {};
      for (const auto& c : copies)
        if (c.size() == modal) ++counts[std::find(kBases, kBases + 4, c[p]) - kBases];
      consensus[p] = kBases[std::max_element(counts, counts + 4) - counts];
    }
    return consensus;
  };

  for (auto& c : cand[0]) out.dc.payloads.push_back(resolve(c));
  for (auto& c : cand[1]) out.ac.payloads.push_back(resolve(c));
  return out;
}

NucleotideSequence join_payloads(const StreamReads& reads) {
  NucleotideSequence out;
  for (std::size_t i = 0; i < reads.payloads.size(); ++i) {
    if (i > 0) out.append(kBarrier);
    if (reads.payloads[i]) out += *reads.payloads[i];
  }
  return out;
}

StreamDecode decode_stream(const StreamReads& reads, const StreamExtent& extent, std::uint32_t barrier_window) {
  StreamDecode out;
  out.trits.reserve(extent.trit_count);
  const std::size_t pl = extent.partition_length;
  BarrierConfig cfg{pl, std::min<std::size_t>(barrier_window, pl >= 2 ? 2 * pl - 2 : 2)};
  for (std::uint32_t s = 0; s < extent.strand_count; ++s) {
    const auto n = extent.strand_trits(s);
    const bool present = s < reads.payloads.size() && reads.payloads[s].has_value();
    if (present) {
      auto r = resync_decode(*reads.payloads[s], cfg, n);
      out.trits.insert(out.trits.end(), r.trits.begin(), r.trits.end());
      out.damaged.insert(out.damaged.end(), r.damaged.begin(), r.damaged.end());
    } else {
      out.trits.insert(out.trits.end(), n, 0);
      out.damaged.insert(out.damaged.end(), partitions_for(n, pl), true);
    }
  }
  out.bytes = anchored_decode(out.trits, out.damaged, pl, extent.sync, extent.byte_count);
  return out;
}

ConstraintReport validate_constraints(std::string_view seq) {
  ConstraintReport r;
  r.max_homopolymer = max_homopolymer(seq);
  r.gc_fraction = gc_fraction(seq);
  r.length = seq.size();
  r.homopolymer_ok = r.max_homopolymer < 4;
  r.gc_ok = r.gc_fraction >= 0.4 && r.gc_fraction <= 0.6;
  r.length_ok = r.length < 1000;
  return r;
}

}  // namespace imgdna
