#include "imgdna/channel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace imgdna {

namespace {

constexpr char kBases[4] = {'A', 'C', 'G', 'T'};

std::uint64_t splitmix(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

double unit(std::uint64_t h) { return static_cast<double>(h >> 11) * 0x1.0p-53; }

int base_index(char c) {
  switch (c) {
    case 'C': return 1;
    case 'G': return 2;
    case 'T': return 3;
    default: return 0;
  }
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    double d = std::stod(v, &used);
    if (used == v.size()) return d;
    if (used + 1 == v.size() && v.back() == '%') return d / 100.0;
  } catch (const std::exception&) {
  }
  throw ConfigError("bad number for '" + key + "': " + v);
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const auto n = std::stoull(v, &used, 0);
    if (used == v.size() && v.front() != '-') return n;
  } catch (const std::exception&) {
  }
  throw ConfigError("bad integer for '" + key + "': " + v);
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError("bad boolean for '" + key + "': " + v);
}

}  // namespace

ErrorSplit ErrorSplit::normalized() const {
  if (!(substitution >= 0 && insertion >= 0 && deletion >= 0)) throw ConfigError("error split weights must be >= 0");
  const double sum = substitution + insertion + deletion;
  if (!(sum > 0) || !std::isfinite(sum)) throw ConfigError("error split weights must not all be zero");
  return {substitution / sum, insertion / sum, deletion / sum};
}

bool ErrorSplit::is_uniform() const noexcept {
  const double sum = substitution + insertion + deletion;
  if (!(sum > 0)) return false;
  const double third = sum / 3.0;
  auto near = [&](double v) { return std::fabs(v - third) <= 1e-9 * sum; };
  return near(substitution) && near(insertion) && near(deletion);
}

void ChannelConfig::validate() const {
  if (!(total_rate >= 0.0 && total_rate <= 1.0)) throw ConfigError("total_rate must be in [0,1]");
  if (copies < 1) throw ConfigError("copies must be >= 1");
  (void)split.normalized();
}

ChannelStats& ChannelStats::operator+=(const ChannelStats& o) noexcept {
  exposed += o.exposed;
  substitutions += o.substitutions;
  insertions += o.insertions;
  deletions += o.deletions;
  return *this;
}

NucleotideSequence perturb_sequence(std::string_view seq, std::size_t begin, std::size_t end,
                                    const ChannelConfig& cfg, std::uint64_t key, ChannelStats* stats,
                                    const std::vector<bool>* mask) {
  end = std::min(end, seq.size());
  begin = std::min(begin, end);
  const auto split = cfg.split.normalized();
  const std::uint64_t stream = splitmix(cfg.seed ^ splitmix(key));
  ChannelStats local;
  NucleotideSequence out;
  out.reserve(seq.size() + 8);
  out.append(seq.substr(0, begin));
  for (std::size_t i = begin; i < end; ++i) {
    if (mask && !(i < mask->size() && (*mask)[i])) {
      out.push_back(seq[i]);
      continue;
    }
    ++local.exposed;
    const std::uint64_t h = splitmix(stream + 0xD1B54A32D192ED03ull * (i + 1));
    if (!(unit(h) < cfg.total_rate)) {
      out.push_back(seq[i]);
      continue;
    }
    const std::uint64_t h2 = splitmix(h);
    const double kind = unit(h2);
    const std::uint64_t pick = splitmix(h2) >> 32;
    if (kind < split.substitution) {
      out.push_back(kBases[(base_index(seq[i]) + 1 + pick % 3) % 4]);
      ++local.substitutions;
    } else if (kind < split.substitution + split.insertion) {
      out.push_back(seq[i]);
      out.push_back(kBases[pick % 4]);
      ++local.insertions;
    } else {
      ++local.deletions;
    }
  }
  out.append(seq.substr(end));
  if (stats) *stats += local;
  return out;
}

Pool perturb(const Pool& pool, const ChannelConfig& cfg, ChannelStats* stats, const ExposureMask* exposure) {
  cfg.validate();
  Pool out;
  out.mapping = pool.mapping;
  out.strands.reserve(pool.strands.size() * cfg.copies);
  const std::size_t fwd = cfg.corrupt_primers ? 0 : pool.mapping.primers.forward.size();
  const std::size_t rev = cfg.corrupt_primers ? 0 : pool.mapping.primers.reverse.size();
  for (std::size_t i = 0; i < pool.strands.size(); ++i) {
    const auto& s = pool.strands[i];
    const std::vector<bool>* mask = nullptr;
    if (exposure) {
      if (i >= exposure->size() || (*exposure)[i].empty()) {
        out.strands.insert(out.strands.end(), cfg.copies, s);
        continue;
      }
      mask = &(*exposure)[i];
    }
    const std::size_t end = s.sequence.size() > rev ? s.sequence.size() - rev : 0;
    for (std::uint32_t c = 0; c < cfg.copies; ++c) {
      const std::uint64_t key = (static_cast<std::uint64_t>(i) << 20) ^ c;
      out.strands.push_back({s.id, perturb_sequence(s.sequence, fwd, end, cfg, key, stats, mask)});
    }
  }
  return out;
}

std::string format_rate(double rate) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g%%", rate * 100.0);
  return buf;
}

std::string describe(const ChannelConfig& cfg) {
  std::ostringstream os;
  os << "rate " << format_rate(cfg.total_rate) << ", split ";
  if (cfg.split.is_uniform()) {
    os << "uniform";
  } else {
    const auto s = cfg.split.normalized();
    char buf[96];
    std::snprintf(buf, sizeof buf, "sub %.4g / ins %.4g / del %.4g", s.substitution, s.insertion, s.deletion);
    os << buf;
  }
  os << ", seed " << cfg.seed << ", copies " << cfg.copies << ", primers "
     << (cfg.corrupt_primers ? "corrupted" : "exempt");
  return os.str();
}

ChannelConfig parse_channel_config(std::string_view text, ChannelConfig cfg) {
  std::size_t pos = 0;
  int line_no = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    const auto key = trim(std::string_view(body).substr(0, eq));
    const auto value = trim(std::string_view(body).substr(eq + 1));
    if (value.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty value for '" + key + "'");
    if (key == "rate" || key == "total_rate") cfg.total_rate = parse_double(key, value);
    else if (key == "substitution") cfg.split.substitution = parse_double(key, value);
    else if (key == "insertion") cfg.split.insertion = parse_double(key, value);
    else if (key == "deletion") cfg.split.deletion = parse_double(key, value);
    else if (key == "seed") cfg.seed = parse_u64(key, value);
    else if (key == "copies") cfg.copies = static_cast<std::uint32_t>(parse_u64(key, value));
    else if (key == "corrupt_primers") cfg.corrupt_primers = parse_bool(key, value);
    else throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
  }
  cfg.validate();
  return cfg;
}

}  // namespace imgdna
