#pragma once

// Seeded substitution / insertion / deletion channel over strand pools.
//
// Randomness is counter-based: each decision is a hash of (seed, strand
// position, copy, nucleotide position), so results do not depend on execution
// order, and at a fixed seed the errors drawn at a lower rate are a subset of
// those drawn at a higher one.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "imgdna/strand_layer.hpp"

namespace imgdna {

struct ErrorSplit {
  double substitution = 1.0 / 3.0;
  double insertion = 1.0 / 3.0;
  double deletion = 1.0 / 3.0;

  /// Scaled to sum to one. Throws ConfigError on negative or all-zero weights.
  ErrorSplit normalized() const;
  bool is_uniform() const noexcept;
};

struct ChannelConfig {
  double total_rate = 0.0;  // per-nucleotide error probability
  ErrorSplit split;
  std::uint64_t seed = 1;
  std::uint32_t copies = 1;        // reads emitted per strand
  bool corrupt_primers = false;    // primers are exempt unless set

  void validate() const;
};

struct ChannelStats {
  std::uint64_t exposed = 0;  // nucleotides that could have been hit
  std::uint64_t substitutions = 0;
  std::uint64_t insertions = 0;
  std::uint64_t deletions = 0;

  std::uint64_t errors() const noexcept { return substitutions + insertions + deletions; }
  ChannelStats& operator+=(const ChannelStats& o) noexcept;
};

/// Per strand, per nucleotide: may this position be hit. Positions past the
/// end of a strand's mask are never hit; an empty mask exempts the strand.
using ExposureMask = std::vector<std::vector<bool>>;

/// Perturb positions [begin, end) of `seq` (restricted to `mask` when given)
/// with randomness keyed by (cfg.seed, key).
NucleotideSequence perturb_sequence(std::string_view seq, std::size_t begin, std::size_t end,
                                    const ChannelConfig& cfg, std::uint64_t key, ChannelStats* stats = nullptr,
                                    const std::vector<bool>* mask = nullptr);

/// Emit cfg.copies noisy reads of every strand, in pool order.
Pool perturb(const Pool& pool, const ChannelConfig& cfg, ChannelStats* stats = nullptr,
             const ExposureMask* exposure = nullptr);

/// e.g. "rate 0.1%, split uniform, seed 7, copies 1, primers exempt".
std::string describe(const ChannelConfig& cfg);

/// Formats a probability as a percentage: 0.001 -> "0.1%".
std::string format_rate(double rate);

/// `key = value` lines; '#' starts a comment. Keys: rate, substitution,
/// insertion, deletion, seed, copies, corrupt_primers. Unspecified keys keep
/// the values in `base`.
ChannelConfig parse_channel_config(std::string_view text, ChannelConfig base = {});

}  // namespace imgdna
