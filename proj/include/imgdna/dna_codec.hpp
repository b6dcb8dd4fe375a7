#pragma once

// Bytes <-> nucleotides: a static ternary Huffman code (5 or 6 trits per
// byte), a rotating trit->nucleotide code that never repeats a nucleotide, and
// "AA" barriers every partition_length nucleotides so a synchronization error
// stays inside its partition.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "imgdna/image_codec.hpp"

namespace imgdna {

enum class Nucleotide : char { A = 'A', C = 'C', G = 'G', T = 'T' };

/// ASCII over {A,C,G,T}, one char per nucleotide.
using NucleotideSequence = std::string;
/// Digits in {0,1,2}.
using TritStream = std::vector<std::uint8_t>;

bool is_nucleotide_sequence(std::string_view seq) noexcept;

// --- ternary Huffman ----------------------------------------------------------

struct TernaryCodeword {
  std::uint32_t value = 0;  // base-3 digits, most significant first
  std::uint8_t length = 0;
};

/// Dummy leaf that completes the ternary tree; never emitted.
constexpr int kTernaryDummySymbol = 256;

/// Codewords for the 256 bytes plus the dummy, canonical order.
const std::vector<TernaryCodeword>& ternary_code();

TritStream bytes_to_trits(std::span<const std::uint8_t> bytes);

/// Trit length of each byte's codeword, in order.
std::vector<std::uint8_t> codeword_lengths(std::span<const std::uint8_t> bytes);

/// Strict mode throws DecodeError with the trit offset of the bad codeword.
/// Tolerant mode skips one trit at a time past invalid paths and drops a
/// trailing partial codeword.
std::vector<std::uint8_t> trits_to_bytes(std::span<const std::uint8_t> trits, bool tolerant);

// --- rotating code ----------------------------------------------------------

Nucleotide rotate_step(Nucleotide previous, std::uint8_t trit);
NucleotideSequence rotate_encode(std::span<const std::uint8_t> trits, Nucleotide seed = Nucleotide::A);
/// Total. A nucleotide equal to its predecessor decodes as trit 0.
TritStream rotate_decode(std::string_view seq, Nucleotide seed = Nucleotide::A);

// --- barriers -----------------------------------------------------------------

constexpr std::string_view kBarrier = "AA";

struct BarrierConfig {
  std::size_t partition_length = 50;  // PL, payload nucleotides per partition
  std::size_t barrier_window = 12;    // BW, total window width around a barrier

  /// Throws ConfigError unless PL >= 2, BW even, 2 <= BW < 2*PL.
  void validate() const;
  /// Nucleotides searched on each side of an expected barrier.
  std::size_t half_window() const noexcept { return (barrier_window - kBarrier.size()) / 2; }
};

struct BarrieredSequence {
  NucleotideSequence sequence;
  std::size_t partition_count = 0;
  std::size_t partition_length = 0;
  std::size_t trit_count = 0;

  std::size_t barrier_count() const noexcept { return partition_count ? partition_count - 1 : 0; }
};

/// Closed-form partition count for a trit stream of length n.
std::size_t partitions_for(std::size_t trit_count, std::size_t partition_length) noexcept;

BarrieredSequence insert_barriers(std::span<const std::uint8_t> trits, const BarrierConfig& cfg);

struct ResyncResult {
  TritStream trits;            // exactly expected_trits long
  std::vector<bool> damaged;   // one flag per partition
};

/// Barrier-window resynchronizing decode of a possibly corrupted sequence that
/// originally carried `expected_trits` trits.
ResyncResult resync_decode(std::string_view seq, const BarrierConfig& cfg, std::size_t expected_trits);

// --- anchored byte recovery ----------------------------------------------------

/// A codeword boundary: the codeword of byte `byte_offset` starts at trit
/// `trit_offset`.
struct SyncPoint {
  std::uint64_t trit_offset = 0;
  std::uint64_t byte_offset = 0;

  bool operator==(const SyncPoint&) const = default;
};

/// One sync point at the first codeword starting at or after each multiple of
/// `interval_trits` (including 0 for non-empty input).
std::vector<SyncPoint> sync_points(std::span<const std::uint8_t> bytes, std::size_t interval_trits);

/// Recover exactly `byte_count` bytes from a trit stream whose partitions may
/// be damaged. Bytes between sync points are parsed independently; when the
/// parsed count disagrees with the expected count, bytes before the first
/// damaged partition are anchored to the interval start and bytes after the
/// last damaged partition to the interval end.
std::vector<std::uint8_t> anchored_decode(std::span<const std::uint8_t> trits, const std::vector<bool>& damaged,
                                          std::size_t partition_length, std::span<const SyncPoint> sync,
                                          std::size_t byte_count);

// --- whole-stream helpers ----------------------------------------------------------

/// Longest run of identical consecutive nucleotides.
std::size_t max_homopolymer(std::string_view seq) noexcept;

}  // namespace imgdna
