#pragma once

// Packs barriered DC/AC sequences into fixed-length strands:
//
//   forward primer | internal index | payload (whole partitions) | reverse primer
//
// The internal index carries the stream type and the strand's ordinal within
// that stream. Everything the decoder needs besides the strands themselves
// (primers, geometry, byte extents, sync points) is kept in the MappingTable,
// which is stored error-free alongside the image metadata.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "imgdna/dna_codec.hpp"

namespace imgdna {

enum class StreamType : std::uint8_t { DC = 0, AC = 1 };

const char* to_string(StreamType type) noexcept;

struct InternalIndex {
  StreamType type = StreamType::DC;
  std::uint32_t offset = 0;

  bool operator==(const InternalIndex&) const = default;
};

struct PrimerPair {
  NucleotideSequence forward;
  NucleotideSequence reverse;

  bool operator==(const PrimerPair&) const = default;
};

/// Length in [18,25], no homopolymer of 4 or more, GC fraction in [0.4,0.6].
bool primer_valid(std::string_view primer) noexcept;

/// Pseudorandom primer pair satisfying primer_valid. The primers have no
/// repeated neighbours at all, so joining them to payload never creates a run
/// longer than two.
PrimerPair generate_primers(std::uint64_t seed, std::size_t length = 20);

struct StreamExtent {
  std::uint64_t trit_count = 0;
  std::uint64_t byte_count = 0;
  std::uint32_t partition_length = 0;
  std::uint32_t partitions_per_strand = 0;
  std::uint32_t strand_count = 0;
  std::vector<SyncPoint> sync;

  /// Trits carried by strand `s` (the last one may be short).
  std::uint64_t strand_trits(std::uint32_t s) const noexcept;

  bool operator==(const StreamExtent&) const = default;
};

struct MappingTable {
  std::string image_id;
  PrimerPair primers;
  std::uint32_t strand_length = 250;
  std::uint32_t index_width = 0;
  std::uint32_t barrier_window = 12;
  StreamExtent dc;
  StreamExtent ac;

  /// Offsets per stream type in the index code space.
  std::uint32_t index_radix() const noexcept;

  bool operator==(const MappingTable&) const = default;
};

struct Strand {
  std::string id;
  NucleotideSequence sequence;

  bool operator==(const Strand&) const = default;
};

struct Pool {
  std::vector<Strand> strands;
  MappingTable mapping;
};

// --- geometry -------------------------------------------------------------------

/// Smallest W with 3^W >= 2 * max_strands.
std::uint32_t index_width_for(std::uint64_t max_strands) noexcept;

/// Whole partitions (with separating barriers) that fit in `capacity` nt.
std::uint32_t partitions_per_strand(std::uint64_t capacity, std::uint64_t partition_length) noexcept;

struct GeometryRequest {
  std::uint32_t strand_length = 250;
  std::uint32_t forward_primer_length = 20;
  std::uint32_t reverse_primer_length = 20;
  std::uint64_t dc_trits = 0;
  std::uint64_t ac_trits = 0;
  std::uint32_t dc_partition_length = 20;  // 0: no barriers, one partition per strand
  std::uint32_t ac_partition_length = 50;
};

struct StrandGeometry {
  std::uint32_t index_width = 0;
  std::uint32_t payload_capacity = 0;
  std::uint32_t dc_partition_length = 0;
  std::uint32_t ac_partition_length = 0;
  std::uint32_t dc_partitions_per_strand = 0;
  std::uint32_t ac_partitions_per_strand = 0;
  std::uint32_t dc_strands = 0;
  std::uint32_t ac_strands = 0;
};

/// Throws ConfigError when a partition (plus index) cannot fit in a strand.
StrandGeometry plan_geometry(const GeometryRequest& request);

// --- assembly -------------------------------------------------------------------

/// A stream ready for packing: its barriered sequence plus the byte-level
/// bookkeeping that goes into the mapping table.
struct StreamPayload {
  BarrieredSequence sequence;
  std::uint64_t byte_count = 0;
  std::vector<SyncPoint> sync;
};

/// Encode bytes into a StreamPayload with sync points at strand boundaries.
StreamPayload encode_stream(std::span<const std::uint8_t> bytes, std::uint32_t partition_length,
                            std::uint32_t partitions_per_strand, std::uint32_t barrier_window);

struct AssemblyOptions {
  std::uint32_t strand_length = 250;
  std::uint32_t barrier_window = 12;
  std::string image_id = "image";
};

Pool assemble(const StreamPayload& dc, const StreamPayload& ac, const PrimerPair& primers,
              const AssemblyOptions& options);

NucleotideSequence encode_index(const InternalIndex& index, const MappingTable& mapping);
/// nullopt when the index field repeats a nucleotide or decodes out of range.
std::optional<InternalIndex> decode_index(std::string_view field, const MappingTable& mapping);

struct StreamReads {
  std::vector<std::optional<NucleotideSequence>> payloads;  // by offset; nullopt = gap

  std::size_t gap_count() const noexcept;
};

struct DisassembledPool {
  StreamReads dc;
  StreamReads ac;
  std::vector<std::size_t> quarantined;  // pool positions with unusable index
};

DisassembledPool disassemble(const Pool& pool);

/// Payloads re-joined with barriers; equals the assembled sequence when no
/// strand is missing.
NucleotideSequence join_payloads(const StreamReads& reads);

struct StreamDecode {
  TritStream trits;
  std::vector<bool> damaged;          // per partition
  std::vector<std::uint8_t> bytes;    // exactly extent.byte_count
};

StreamDecode decode_stream(const StreamReads& reads, const StreamExtent& extent, std::uint32_t barrier_window);

// --- feasibility -------------------------------------------------------------------

struct ConstraintReport {
  std::size_t max_homopolymer = 0;
  double gc_fraction = 0.0;
  std::size_t length = 0;
  bool homopolymer_ok = false;  // run < 4
  bool gc_ok = false;           // 0.4 <= GC <= 0.6
  bool length_ok = false;       // < 1000

  bool passes() const noexcept { return homopolymer_ok && gc_ok && length_ok; }
};

ConstraintReport validate_constraints(std::string_view seq);

double gc_fraction(std::string_view seq) noexcept;

// --- external formats --------------------------------------------------------------

/// FASTA-like text: ">id" line followed by the sequence on one line.
std::string format_fasta(const std::vector<Strand>& strands);
std::vector<Strand> parse_fasta(std::string_view text);

/// Binary mapping-table sidecar (tagged records, little-endian).
std::vector<std::uint8_t> serialize_mapping(const MappingTable& mapping);
MappingTable parse_mapping(std::span<const std::uint8_t> bytes);

}  // namespace imgdna
