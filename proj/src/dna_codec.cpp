#include "imgdna/dna_codec.hpp"

#include <algorithm>
#include <optional>

namespace imgdna {

namespace {

constexpr int kAlphabet = 257;  // 256 bytes + dummy

int index_of(Nucleotide n) {
  switch (n) {
    case Nucleotide::A: return 0;
    case Nucleotide::C: return 1;
    case Nucleotide::G: return 2;
    case Nucleotide::T: return 3;
  }
  return 0;
}

int index_of(char c) {
  switch (c) {
    case 'C': return 1;
    case 'G': return 2;
    case 'T': return 3;
    default: return 0;
  }
}

constexpr Nucleotide kOrder[4] = {Nucleotide::A, Nucleotide::C, Nucleotide::G, Nucleotide::T};

struct CodeShape {
  int long_length;    // depth of the deepest leaves
  int short_count;    // leaves one level up
};

// A full ternary tree with leaves on two adjacent levels: short_count leaves at
// depth d-1 and the rest at depth d, where 3*short + long = 3^d.
CodeShape code_shape() {
  int depth = 0;
  long capacity = 1;
  while (capacity < kAlphabet) {
    capacity *= 3;
    ++depth;
  }
  return {depth, static_cast<int>((capacity - kAlphabet) / 2)};
}

enum class Parse { Ok, Invalid, Incomplete };

// Decodes one codeword at `pos`. On Ok, `symbol` and `end` are set.
Parse parse_codeword(std::span<const std::uint8_t> trits, std::size_t pos, int& symbol, std::size_t& end) {
  static const CodeShape shape = code_shape();
  const std::size_t short_len = static_cast<std::size_t>(shape.long_length - 1);
  if (pos + short_len > trits.size()) return Parse::Incomplete;
  std::uint32_t v = 0;
  for (std::size_t i = 0; i < short_len; ++i) {
    if (trits[pos + i] > 2) return Parse::Invalid;
    v = v * 3 + trits[pos + i];
  }
  if (v < static_cast<std::uint32_t>(shape.short_count)) {
    symbol = static_cast<int>(v);
    end = pos + short_len;
    return Parse::Ok;
  }
  if (pos + short_len >= trits.size()) return Parse::Incomplete;
  const auto t = trits[pos + short_len];
  if (t > 2) return Parse::Invalid;
  const std::uint32_t first_long = static_cast<std::uint32_t>(shape.short_count) * 3;
  symbol = shape.short_count + static_cast<int>(v * 3 + t - first_long);
  if (symbol >= kTernaryDummySymbol) return Parse::Invalid;
  end = pos + short_len + 1;
  return Parse::Ok;
}

struct Parsed {
  std::uint8_t byte;
  std::size_t start;
  std::size_t end;
};

// Tolerant parse of codewords starting in [from, until).
std::vector<Parsed> parse_range(std::span<const std::uint8_t> trits, std::size_t from, std::size_t until,
                                bool& clean) {
  std::vector<Parsed> out;
  clean = true;
  std::size_t pos = from;
  while (pos < until) {
    int sym = 0;
    std::size_t end = 0;
    const auto r = parse_codeword(trits, pos, sym, end);
    if (r == Parse::Ok) {
      out.push_back({static_cast<std::uint8_t>(sym), pos, end});
      pos = end;
    } else if (r == Parse::Invalid) {
      clean = false;
      ++pos;
    } else {
      clean = false;
      break;
    }
  }
  return out;
}

// Strict parse that must consume exactly [from, until).
std::optional<std::vector<std::uint8_t>> parse_exact(std::span<const std::uint8_t> trits, std::size_t from,
                                                     std::size_t until) {
  std::vector<std::uint8_t> out;
  std::size_t pos = from;
  while (pos < until) {
    int sym = 0;
    std::size_t end = 0;
    if (parse_codeword(trits.first(until), pos, sym, end) != Parse::Ok) return std::nullopt;
    out.push_back(static_cast<std::uint8_t>(sym));
    pos = end;
  }
  return out;
}

bool has_repeat(std::string_view seq) {
  for (std::size_t i = 1; i < seq.size(); ++i)
    if (seq[i] == seq[i - 1]) return true;
  return false;
}

std::optional<std::size_t> find_barrier(std::string_view seq, std::size_t expected, std::size_t half,
                                        std::size_t partition_start) {
  auto is_barrier = [&](std::size_t j) {
    return j > partition_start && j + 1 < seq.size() && seq[j] == 'A' && seq[j + 1] == 'A';
  };
  // Payload never holds "AA" and never starts with A, so in a run of As the
  // barrier is the last two.
  auto run_end = [&](std::size_t j) {
    while (j + 2 < seq.size() && seq[j + 2] == 'A') ++j;
    return j;
  };
  for (std::size_t d = 0; d <= half; ++d) {
    if (d <= expected && is_barrier(expected - d)) return run_end(expected - d);
    if (d > 0 && is_barrier(expected + d)) return run_end(expected + d);
  }
  return std::nullopt;
}

std::string_view slice(std::string_view s, std::size_t pos, std::size_t len = std::string_view::npos) {
  if (pos >= s.size()) return {};
  return s.substr(pos, len);
}

}  // namespace

bool is_nucleotide_sequence(std::string_view seq) noexcept {
  return std::all_of(seq.begin(), seq.end(), [](char c) { return c == 'A' || c == 'C' || c == 'G' || c == 'T'; });
}

const std::vector<TernaryCodeword>& ternary_code() {
  static const auto code = [] {
    const auto shape = code_shape();
    std::vector<TernaryCodeword> c(kAlphabet);
    std::uint32_t value = 0;
    for (int s = 0; s < kAlphabet; ++s) {
      if (s == shape.short_count) value *= 3;  // move one level deeper
      c[s] = {value, static_cast<std::uint8_t>(s < shape.short_count ? shape.long_length - 1 : shape.long_length)};
      ++value;
    }
    return c;
  }();
  return code;
}

TritStream bytes_to_trits(std::span<const std::uint8_t> bytes) {
  const auto& code = ternary_code();
  TritStream out;
  out.reserve(bytes.size() * 6);
  for (auto b : bytes) {
    const auto& cw = code[b];
    std::uint32_t div = 1;
    for (int i = 1; i < cw.length; ++i) div *= 3;
    for (int i = 0; i < cw.length; ++i) {
      out.push_back(static_cast<std::uint8_t>((cw.value / div) % 3));
      div /= 3;
    }
  }
  return out;
}

std::vector<std::uint8_t> codeword_lengths(std::span<const std::uint8_t> bytes) {
  const auto& code = ternary_code();
  std::vector<std::uint8_t> out;
  out.reserve(bytes.size());
  for (auto b : bytes) out.push_back(code[b].length);
  return out;
}

std::vector<std::uint8_t> trits_to_bytes(std::span<const std::uint8_t> trits, bool tolerant) {
  if (tolerant) {
    bool clean = true;
    const auto parsed = parse_range(trits, 0, trits.size(), clean);
    std::vector<std::uint8_t> out;
    out.reserve(parsed.size());
    for (const auto& p : parsed) out.push_back(p.byte);
    return out;
  }
  std::vector<std::uint8_t> out;
  std::size_t pos = 0;
  while (pos < trits.size()) {
    int sym = 0;
    std::size_t end = 0;
    switch (parse_codeword(trits, pos, sym, end)) {
      case Parse::Ok:
        out.push_back(static_cast<std::uint8_t>(sym));
        pos = end;
        break;
      case Parse::Invalid: throw DecodeError("invalid ternary codeword", pos);
      case Parse::Incomplete: throw DecodeError("truncated ternary codeword", pos);
    }
  }
  return out;
}

Nucleotide rotate_step(Nucleotide previous, std::uint8_t trit) {
  return kOrder[(index_of(previous) + 1 + trit % 3) % 4];
}

NucleotideSequence rotate_encode(std::span<const std::uint8_t> trits, Nucleotide seed) {
  NucleotideSequence out;
  out.reserve(trits.size());
  Nucleotide prev = seed;
  for (auto t : trits) {
    prev = rotate_step(prev, t);
    out.push_back(static_cast<char>(prev));
  }
  return out;
}

TritStream rotate_decode(std::string_view seq, Nucleotide seed) {
  TritStream out;
  out.reserve(seq.size());
  int prev = index_of(seed);
  for (char c : seq) {
    const int cur = index_of(c);
    const int delta = (cur - prev + 4) % 4;
    out.push_back(static_cast<std::uint8_t>(delta == 0 ? 0 : delta - 1));
    prev = cur;
  }
  return out;
}

void BarrierConfig::validate() const {
  if (partition_length < 2) throw ConfigError("partition length must be at least 2");
  if (barrier_window % 2 != 0) throw ConfigError("barrier window must be even");
  if (barrier_window < kBarrier.size()) throw ConfigError("barrier window must cover the barrier");
  if (barrier_window >= 2 * partition_length) throw ConfigError("barrier window must be smaller than 2*PL");
}

std::size_t partitions_for(std::size_t trit_count, std::size_t partition_length) noexcept {
  if (trit_count == 0 || partition_length == 0) return 0;
  return (trit_count + partition_length - 1) / partition_length;
}

BarrieredSequence insert_barriers(std::span<const std::uint8_t> trits, const BarrierConfig& cfg) {
  cfg.validate();
  BarrieredSequence out;
  out.partition_length = cfg.partition_length;
  out.trit_count = trits.size();
  out.partition_count = partitions_for(trits.size(), cfg.partition_length);
  out.sequence.reserve(trits.size() + 2 * out.partition_count);
  for (std::size_t p = 0; p < out.partition_count; ++p) {
    if (p > 0) out.sequence.append(kBarrier);
    const auto begin = p * cfg.partition_length;
    const auto len = std::min(cfg.partition_length, trits.size() - begin);
    out.sequence += rotate_encode(trits.subspan(begin, len));
  }
  return out;
}

ResyncResult resync_decode(std::string_view seq, const BarrierConfig& cfg, std::size_t expected_trits) {
  cfg.validate();
  const std::size_t pl = cfg.partition_length;
  const std::size_t half = cfg.half_window();
  const std::size_t k = partitions_for(expected_trits, pl);
  const std::size_t last_len = k ? expected_trits - (k - 1) * pl : 0;
  auto len_of = [&](std::size_t p) { return p + 1 == k ? last_len : pl; };

  ResyncResult r;
  r.trits.reserve(expected_trits);
  r.damaged.assign(k, false);

  auto emit_front = [&](std::string_view content, std::size_t p, bool damaged) {
    auto t = rotate_decode(content);
    const auto len = len_of(p);
    const bool seed_repeat = !content.empty() && content.front() == static_cast<char>(Nucleotide::A);
    r.damaged[p] = damaged || content.size() != len || seed_repeat || has_repeat(content);
    t.resize(len, 0);
    r.trits.insert(r.trits.end(), t.begin(), t.end());
  };
  auto emit_back = [&](std::string_view content, std::size_t p) {
    const auto len = len_of(p);
    if (content.size() > len) content = content.substr(content.size() - len);
    auto t = rotate_decode(content);
    t.insert(t.begin(), len - t.size(), 0);
    r.damaged[p] = true;
    r.trits.insert(r.trits.end(), t.begin(), t.end());
  };
  // Partitions [first, first+m) whose separating barriers were lost.
  auto emit_merged = [&](std::string_view content, std::size_t first, std::size_t m) {
    std::size_t expected = 0;
    for (std::size_t t = 0; t < m; ++t) expected += len_of(first + t) + (t ? kBarrier.size() : 0);
    if (content.size() == expected) {
      for (std::size_t t = 0; t < m; ++t) emit_front(slice(content, t * (pl + 2), len_of(first + t)), first + t, true);
      return;
    }
    for (std::size_t t = 0; t + 1 < m; ++t) emit_front(slice(content, t * (pl + 2), pl), first + t, true);
    emit_back(content, first + m - 1);
  };

  std::size_t pos = 0;
  std::size_t i = 0;
  while (i < k) {
    if (i + 1 == k) {
      emit_front(slice(seq, pos), i, false);
      break;
    }
    std::optional<std::size_t> j;
    std::size_t m = 1;
    for (; i + m < k; ++m) {
      const std::size_t expected = pos + m * pl + (m - 1) * kBarrier.size();
      j = find_barrier(seq, expected, half, pos);
      if (j) break;
    }
    if (!j) {
      emit_merged(slice(seq, pos), i, k - i);
      break;
    }
    const auto content = seq.substr(pos, *j - pos);
    if (m == 1)
      emit_front(content, i, false);
    else
      emit_merged(content, i, m);
    pos = *j + kBarrier.size();
    i += m;
  }
  return r;
}

std::vector<SyncPoint> sync_points(std::span<const std::uint8_t> bytes, std::size_t interval_trits) {
  std::vector<SyncPoint> out;
  const auto& code = ternary_code();
  std::uint64_t trit = 0;
  std::uint64_t next_boundary = 0;
  for (std::size_t b = 0; b < bytes.size(); ++b) {
    if (trit >= next_boundary) {
      out.push_back({trit, b});
      if (interval_trits == 0) {
        next_boundary = UINT64_MAX;
      } else {
        while (next_boundary <= trit) next_boundary += interval_trits;
      }
    }
    trit += code[bytes[b]].length;
  }
  return out;
}

std::vector<std::uint8_t> anchored_decode(std::span<const std::uint8_t> trits, const std::vector<bool>& damaged,
                                          std::size_t partition_length, std::span<const SyncPoint> sync,
                                          std::size_t byte_count) {
  std::vector<std::uint8_t> out(byte_count, 0);
  for (std::size_t s = 0; s < sync.size(); ++s) {
    const std::size_t t0 = std::min<std::size_t>(sync[s].trit_offset, trits.size());
    const std::size_t t1 = s + 1 < sync.size() ? std::min<std::size_t>(sync[s + 1].trit_offset, trits.size())
                                               : trits.size();
    const std::size_t b0 = std::min<std::size_t>(sync[s].byte_offset, byte_count);
    const std::size_t b1 = s + 1 < sync.size() ? std::min<std::size_t>(sync[s + 1].byte_offset, byte_count)
                                               : byte_count;
    const std::size_t expected = b1 > b0 ? b1 - b0 : 0;

    bool clean = true;
    const auto parsed = parse_range(trits.first(t1), t0, t1, clean);
    if (clean && parsed.size() == expected && (parsed.empty() || parsed.back().end == t1)) {
      for (std::size_t i = 0; i < expected; ++i) out[b0 + i] = parsed[i].byte;
      continue;
    }

    // Damaged trit span inside this interval.
    std::optional<std::size_t> dmin;
    std::size_t dmax = t0;
    if (partition_length > 0) {
      for (std::size_t p = t0 / partition_length; p < damaged.size() && p * partition_length < t1; ++p) {
        if (!damaged[p]) continue;
        const auto lo = std::max(t0, p * partition_length);
        const auto hi = std::min(t1, (p + 1) * partition_length);
        if (!dmin) dmin = lo;
        dmax = hi;
      }
    }

    std::size_t front = 0;
    if (dmin) {
      while (front < parsed.size() && front < expected && parsed[front].end <= *dmin) ++front;
    }
    std::vector<std::uint8_t> back;
    if (dmin && dmax < t1) {
      for (std::size_t start = dmax; start < std::min(t1, dmax + 6); ++start) {
        if (auto tail = parse_exact(trits, start, t1)) {
          back = std::move(*tail);
          break;
        }
      }
    }
    if (back.size() > expected - front) back.erase(back.begin(), back.end() - static_cast<long>(expected - front));

    for (std::size_t i = 0; i < front; ++i) out[b0 + i] = parsed[i].byte;
    const std::size_t middle_end = expected - back.size();
    for (std::size_t i = front, q = front; i < middle_end && q < parsed.size(); ++i, ++q) out[b0 + i] = parsed[q].byte;
    for (std::size_t i = 0; i < back.size(); ++i) out[b0 + middle_end + i] = back[i];
  }
  return out;
}

std::size_t max_homopolymer(std::string_view seq) noexcept {
  std::size_t best = 0;
  std::size_t run = 0;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    run = (i > 0 && seq[i] == seq[i - 1]) ? run + 1 : 1;
    best = std::max(best, run);
  }
  return best;
}

}  // namespace imgdna
