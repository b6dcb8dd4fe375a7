#include "imgdna/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <mutex>
#include <thread>

namespace imgdna {

namespace {

std::uint64_t splitmix(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::uint64_t barrier_nucleotides(const StreamExtent& e) {
  if (e.strand_count == 0 || e.partition_length == 0) return 0;
  const auto parts = partitions_for(e.trit_count, e.partition_length);
  return (parts - e.strand_count) * kBarrier.size();
}

// Payload nucleotide of trit `t` inside its strand, counted from the start of
// the strand.
std::pair<std::size_t, std::size_t> trit_position(std::uint64_t t, const StreamExtent& e, std::size_t head) {
  const std::uint64_t p = t / e.partition_length;
  const std::size_t strand = static_cast<std::size_t>(p / e.partitions_per_strand);
  const std::uint64_t q = p % e.partitions_per_strand;
  const std::size_t pos = head + static_cast<std::size_t>(q * (e.partition_length + kBarrier.size()) +
                                                          t % e.partition_length);
  return {strand, pos};
}

void build_exposure(EncodedImage& enc, const std::vector<bool>& dc_byte_mask) {
  const auto& pool = enc.pool;
  const auto& m = pool.mapping;
  const std::size_t n = pool.strands.size();
  enc.dc_exposure.assign(n, {});
  enc.ac_exposure.assign(n, {});
  if (enc.streams.metadata.layout == StreamLayout::Separated) {
    for (std::size_t i = 0; i < n; ++i) {
      auto& mask = i < m.dc.strand_count ? enc.dc_exposure[i] : enc.ac_exposure[i];
      mask.assign(pool.strands[i].sequence.size(), true);
    }
    return;
  }
  // Interleaved: expose the nucleotides that carry DC (or AC) bits.
  for (std::size_t i = 0; i < n; ++i) {
    enc.dc_exposure[i].assign(pool.strands[i].sequence.size(), false);
    enc.ac_exposure[i].assign(pool.strands[i].sequence.size(), false);
  }
  const std::size_t head = m.primers.forward.size() + m.index_width;
  const auto lengths = codeword_lengths(enc.streams.dc_bytes);
  std::uint64_t t = 0;
  for (std::size_t k = 0; k < lengths.size(); ++k) {
    auto& target = (k < dc_byte_mask.size() && dc_byte_mask[k]) ? enc.dc_exposure : enc.ac_exposure;
    for (std::uint8_t j = 0; j < lengths[k]; ++j, ++t) {
      const auto [s, pos] = trit_position(t, m.dc, head);
      target[s][pos] = true;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (std::none_of(enc.dc_exposure[i].begin(), enc.dc_exposure[i].end(), [](bool b) { return b; }))
      enc.dc_exposure[i].clear();
    if (std::none_of(enc.ac_exposure[i].begin(), enc.ac_exposure[i].end(), [](bool b) { return b; }))
      enc.ac_exposure[i].clear();
  }
}

}  // namespace

const char* to_string(Scheme s) noexcept {
  switch (s) {
    case Scheme::ImgDna: return "IMG-DNA";
    case Scheme::RawDna: return "Raw-DNA";
    case Scheme::NoBarrierSeparated: return "NoBarrier-Separated";
  }
  return "?";
}

Scheme parse_scheme(std::string_view name) {
  const auto n = lower(name);
  if (n == "img-dna" || n == "imgdna" || n == "img") return Scheme::ImgDna;
  if (n == "raw-dna" || n == "rawdna" || n == "raw") return Scheme::RawDna;
  if (n == "nobarrier-separated" || n == "nobarrier" || n == "no-barrier") return Scheme::NoBarrierSeparated;
  throw ConfigError("unknown scheme '" + std::string(name) + "'");
}

const char* to_string(Target t) noexcept {
  switch (t) {
    case Target::All: return "all";
    case Target::DcOnly: return "dc";
    case Target::AcOnly: return "ac";
  }
  return "?";
}

Target parse_target(std::string_view name) {
  const auto n = lower(name);
  if (n == "all") return Target::All;
  if (n == "dc" || n == "dc-only") return Target::DcOnly;
  if (n == "ac" || n == "ac-only") return Target::AcOnly;
  throw ConfigError("unknown target '" + std::string(name) + "'");
}

ExperimentConfig ExperimentConfig::for_scheme(Scheme scheme) {
  ExperimentConfig c;
  c.scheme = scheme;
  if (scheme != Scheme::ImgDna) c.pl_dc = c.pl_ac = 0;
  if (scheme == Scheme::RawDna) c.segment_blocks = 0;
  return c;
}

std::string ExperimentConfig::label() const {
  if (scheme != Scheme::ImgDna) return to_string(scheme);
  return "DC" + std::to_string(pl_dc) + "-AC" + std::to_string(pl_ac);
}

void ExperimentConfig::validate() const {
  if (quality < 1 || quality > 100) throw ConfigError("quality must be in [1,100]");
  if (primer_length < 18 || primer_length > 25) throw ConfigError("primer length must be in [18,25]");
  if (strand_length >= 1000) throw ConfigError("strand length must be < 1000");
  if (scheme == Scheme::ImgDna) {
    BarrierConfig{pl_dc, barrier_window}.validate();
    BarrierConfig{pl_ac, barrier_window}.validate();
  }
  for (double r : rates)
    if (!(r >= 0.0 && r <= 1.0)) throw ConfigError("error rates must be in [0,1]");
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (copies < 1) throw ConfigError("copies must be >= 1");
  (void)split.normalized();
}

EncodedImage encode_image(const Image& image, const ExperimentConfig& cfg, const std::string& id) {
  cfg.validate();
  if (!image.valid() || image.width == 0 || image.height == 0) throw ConfigError("invalid image " + id);
  const bool raw = cfg.scheme == Scheme::RawDna;
  const bool barriers = cfg.scheme == Scheme::ImgDna;

  auto tr = forward_transform(image, cfg.quality);
  EntropyOptions opts;
  opts.layout = raw ? StreamLayout::Interleaved : StreamLayout::Separated;
  opts.segment_blocks = raw ? 0 : cfg.segment_blocks;
  std::vector<bool> dc_byte_mask;
  EncodedImage enc;
  enc.id = id;
  enc.streams = encode_streams(tr.blocks, tr.metadata, opts, raw ? &dc_byte_mask : nullptr);
  enc.reference = reconstruct(tr.blocks, enc.streams.metadata);

  const auto primers = generate_primers(cfg.primer_seed ^ fnv1a(id), cfg.primer_length);
  auto trit_count = [](const std::vector<std::uint8_t>& bytes) {
    std::uint64_t n = 0;
    for (auto l : codeword_lengths(bytes)) n += l;
    return n;
  };
  GeometryRequest req;
  req.strand_length = cfg.strand_length;
  req.forward_primer_length = static_cast<std::uint32_t>(primers.forward.size());
  req.reverse_primer_length = static_cast<std::uint32_t>(primers.reverse.size());
  req.dc_trits = trit_count(enc.streams.dc_bytes);
  req.ac_trits = trit_count(enc.streams.ac_bytes);
  req.dc_partition_length = barriers ? cfg.pl_dc : 0;
  req.ac_partition_length = barriers ? cfg.pl_ac : 0;
  const auto g = plan_geometry(req);

  const auto dc = encode_stream(enc.streams.dc_bytes, g.dc_partition_length, g.dc_partitions_per_strand,
                                cfg.barrier_window);
  const auto ac = encode_stream(enc.streams.ac_bytes, g.ac_partition_length, g.ac_partitions_per_strand,
                                cfg.barrier_window);
  enc.pool = assemble(dc, ac, primers, {cfg.strand_length, cfg.barrier_window, id});
  enc.barrier_nt_dc = barrier_nucleotides(enc.pool.mapping.dc);
  enc.barrier_nt_ac = barrier_nucleotides(enc.pool.mapping.ac);
  build_exposure(enc, dc_byte_mask);
  return enc;
}

DecodedImage decode_pool(const Pool& pool, const ImageMetadata& metadata) {
  const auto& m = pool.mapping;
  const auto parts = disassemble(pool);
  const auto dc = decode_stream(parts.dc, m.dc, m.barrier_window);
  const auto ac = decode_stream(parts.ac, m.ac, m.barrier_window);
  DecodedImage out;
  out.streams.dc_bytes = dc.bytes;
  out.streams.ac_bytes = ac.bytes;
  out.streams.metadata = metadata;
  out.image = decode_streams(out.streams, true);
  out.quarantined = parts.quarantined.size();
  out.gaps = parts.dc.gap_count() + parts.ac.gap_count();
  out.damaged_partitions = static_cast<std::size_t>(std::count(dc.damaged.begin(), dc.damaged.end(), true) +
                                                    std::count(ac.damaged.begin(), ac.damaged.end(), true));
  return out;
}

QualityReport pool_report(const EncodedImage& enc) {
  const auto& m = enc.pool.mapping;
  const std::size_t head = m.primers.forward.size() + m.index_width;
  const std::size_t tail = m.primers.reverse.size();
  std::uint64_t strand_nt = 0, payload_nt = 0, gc = 0;
  QualityReport r;
  for (const auto& s : enc.pool.strands) {
    strand_nt += s.sequence.size();
    payload_nt += s.sequence.size() - head - tail;
    gc += static_cast<std::uint64_t>(
        std::count_if(s.sequence.begin(), s.sequence.end(), [](char c) { return c == 'G' || c == 'C'; }));
    r.max_homopolymer = std::max(r.max_homopolymer, max_homopolymer(s.sequence));
  }
  const std::uint64_t dc_bytes = enc.streams.dc_bytes.size();
  const std::uint64_t ac_bytes = enc.streams.ac_bytes.size();
  const std::uint64_t bits = 8 * (dc_bytes + ac_bytes);
  r.strands = enc.pool.strands.size();
  if (payload_nt) r.density_payload = encoding_density(bits, payload_nt);
  if (strand_nt) {
    r.density_strand = encoding_density(bits, strand_nt);
    r.gc_fraction = static_cast<double>(gc) / static_cast<double>(strand_nt);
  }
  auto rate = [](std::uint64_t bytes, std::uint64_t trits) {
    return trits ? 8.0 * static_cast<double>(bytes) / static_cast<double>(trits) : 0.0;
  };
  r.barrier_overhead_dc = barrier_overhead(enc.barrier_nt_dc, rate(dc_bytes, m.dc.trit_count), dc_bytes + ac_bytes);
  r.barrier_overhead_ac = barrier_overhead(enc.barrier_nt_ac, rate(ac_bytes, m.ac.trit_count), dc_bytes + ac_bytes);
  return r;
}

ChannelConfig channel_for(const ExperimentConfig& cfg, double rate, std::uint64_t seed) {
  ChannelConfig ch;
  ch.total_rate = rate;
  ch.split = cfg.split;
  ch.seed = seed;
  ch.copies = cfg.copies;
  return ch;
}

QualityReport run_pipeline(const EncodedImage& enc, const ChannelConfig& channel, Target target) {
  const ExposureMask* mask = target == Target::DcOnly   ? &enc.dc_exposure
                             : target == Target::AcOnly ? &enc.ac_exposure
                                                        : nullptr;
  const auto noisy = perturb(enc.pool, channel, nullptr, mask);
  const auto decoded = decode_pool(noisy, enc.streams.metadata);
  auto r = pool_report(enc);
  r.ssim = ssim(enc.reference, decoded.image);
  r.quarantined = decoded.quarantined;
  return r;
}

QualityReport run_pipeline(const Image& image, const ExperimentConfig& cfg, const ChannelConfig& channel,
                           Target target) {
  return run_pipeline(encode_image(image, cfg), channel, target);
}

std::vector<CorpusImage> load_corpus(const std::string& directory) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(directory)) throw ConfigError("corpus directory not found: " + directory);
  std::vector<fs::path> paths;
  for (const auto& entry : fs::directory_iterator(directory))
    if (entry.is_regular_file() && lower(entry.path().extension().string()) == ".pgm") paths.push_back(entry.path());
  std::sort(paths.begin(), paths.end());
  std::vector<CorpusImage> out;
  for (const auto& p : paths) out.push_back({p.filename().string(), read_pgm(p.string())});
  return out;
}

std::uint64_t trial_seed(std::uint64_t base, std::size_t image_index, std::uint32_t trial) noexcept {
  return splitmix(base ^ splitmix((static_cast<std::uint64_t>(image_index) << 32) | trial));
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::vector<SweepRow> run_sweep(const std::vector<CorpusImage>& corpus, const std::vector<ExperimentConfig>& configs,
                                Target target, unsigned threads, std::vector<std::string>* log) {
  if (corpus.empty()) throw ConfigError("corpus is empty");
  for (const auto& c : configs) c.validate();

  struct ItemResult {
    bool failed = false;
    std::string error;
    double density_payload = 0.0;
    double density_strand = 0.0;
    std::vector<std::vector<double>> ssim;  // [rate][trial]
  };
  const std::size_t n_img = corpus.size();
  std::vector<ItemResult> results(configs.size() * n_img);
  parallel_for(results.size(), threads, [&](std::size_t item) {
    const auto& cfg = configs[item / n_img];
    const std::size_t img = item % n_img;
    auto& res = results[item];
    try {
      const auto enc = encode_image(corpus[img].image, cfg, corpus[img].name);
      const auto base = pool_report(enc);
      res.density_payload = base.density_payload;
      res.density_strand = base.density_strand;
      res.ssim.assign(cfg.rates.size(), std::vector<double>(cfg.trials));
      for (std::size_t r = 0; r < cfg.rates.size(); ++r)
        for (std::uint32_t t = 0; t < cfg.trials; ++t)
          res.ssim[r][t] = run_pipeline(enc, channel_for(cfg, cfg.rates[r], trial_seed(cfg.seed, img, t)), target).ssim;
    } catch (const Error& e) {
      res.failed = true;
      res.error = e.what();
    }
  });

  std::vector<SweepRow> rows;
  for (std::size_t c = 0; c < configs.size(); ++c) {
    const auto& cfg = configs[c];
    std::size_t failures = 0;
    double dp = 0.0, ds = 0.0;
    for (std::size_t img = 0; img < n_img; ++img) {
      const auto& res = results[c * n_img + img];
      if (res.failed) {
        ++failures;
        if (log) log->push_back(cfg.label() + " " + corpus[img].name + ": " + res.error);
        continue;
      }
      dp += res.density_payload;
      ds += res.density_strand;
    }
    const std::size_t ok = n_img - failures;
    for (std::size_t r = 0; r < cfg.rates.size(); ++r) {
      std::vector<double> values;
      for (std::size_t img = 0; img < n_img; ++img) {
        const auto& res = results[c * n_img + img];
        if (!res.failed) values.insert(values.end(), res.ssim[r].begin(), res.ssim[r].end());
      }
      SweepRow row;
      row.scheme = to_string(cfg.scheme);
      row.config = cfg.label();
      row.target = to_string(target);
      row.rate = cfg.rates[r];
      row.images = ok;
      row.trials = cfg.trials;
      row.ssim = mean_ci90(values);
      row.density_payload = ok ? dp / static_cast<double>(ok) : 0.0;
      row.density_strand = ok ? ds / static_cast<double>(ok) : 0.0;
      row.failures = failures;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::vector<SweepRow> run_coefficient_isolation(const std::vector<CorpusImage>& corpus,
                                                const std::vector<ExperimentConfig>& configs, unsigned threads,
                                                std::vector<std::string>* log) {
  auto rows = run_sweep(corpus, configs, Target::DcOnly, threads, log);
  auto ac = run_sweep(corpus, configs, Target::AcOnly, threads, nullptr);
  rows.insert(rows.end(), ac.begin(), ac.end());
  return rows;
}

std::string sweep_csv_header() {
  return "scheme,config,target,error_rate,images,trials,mean_ssim,ci90_half_width,"
         "density_payload_bits_per_nt,density_strand_bits_per_nt,failures";
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = sweep_csv_header() + "\n";
  char buf[512];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%s,%s,%.6g,%zu,%zu,%.6f,%.6f,%.6f,%.6f,%zu\n", r.scheme.c_str(),
                  r.config.c_str(), r.target.c_str(), r.rate, r.images, r.trials, r.ssim.mean, r.ssim.half_width,
                  r.density_payload, r.density_strand, r.failures);
    out += buf;
  }
  return out;
}

}  // namespace imgdna
