// imgdna: encode images into simulated DNA strand pools, corrupt them, decode
// them, and run the robustness experiments.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "imgdna/pipeline.hpp"

using json = nlohmann::json;
using namespace imgdna;

namespace {

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::uint8_t> read_bytes(const std::string& path) {
  const auto s = read_text(path);
  return {s.begin(), s.end()};
}

void write_text(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error("write failed: " + path);
}

void write_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  write_text(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

json report_json(const QualityReport& r) {
  return {{"ssim", r.ssim},
          {"density_payload_bits_per_nt", r.density_payload},
          {"density_strand_bits_per_nt", r.density_strand},
          {"gc_fraction", r.gc_fraction},
          {"max_homopolymer", r.max_homopolymer},
          {"barrier_overhead_dc", r.barrier_overhead_dc},
          {"barrier_overhead_ac", r.barrier_overhead_ac},
          {"strands", r.strands},
          {"quarantined", r.quarantined}};
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    if (item.empty()) continue;
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw ConfigError("bad number in list: " + item);
    }
    if (used + 1 == item.size() && item.back() == '%') v /= 100.0;
    else if (used != item.size()) throw ConfigError("bad number in list: " + item);
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("empty list");
  return out;
}

// Flags shared by every verb that builds an ExperimentConfig. Values are
// applied on top of the scheme defaults only when given.
struct ConfigFlags {
  std::string scheme = "IMG-DNA";
  int quality = 0;
  std::uint32_t strand_length = 0, primer_length = 0, pl_dc = 0, pl_ac = 0, bw = 0, segment_blocks = 0;
  std::uint64_t primer_seed = 0;
  CLI::Option* o_quality = nullptr;
  CLI::Option* o_strand = nullptr;
  CLI::Option* o_primer = nullptr;
  CLI::Option* o_pl_dc = nullptr;
  CLI::Option* o_pl_ac = nullptr;
  CLI::Option* o_bw = nullptr;
  CLI::Option* o_seg = nullptr;
  CLI::Option* o_primer_seed = nullptr;

  void add(CLI::App* app, bool with_scheme) {
    if (with_scheme) app->add_option("--scheme", scheme, "IMG-DNA, Raw-DNA or NoBarrier-Separated");
    o_quality = app->add_option("--quality", quality, "JPEG quality factor 1-100 (75)");
    o_strand = app->add_option("--strand-length", strand_length, "strand length in nt (250)");
    o_primer = app->add_option("--primer-length", primer_length, "primer length in nt (20)");
    o_pl_dc = app->add_option("--pl-dc", pl_dc, "DC partition length (20)");
    o_pl_ac = app->add_option("--pl-ac", pl_ac, "AC partition length (50)");
    o_bw = app->add_option("--bw", bw, "barrier window (12)");
    o_seg = app->add_option("--segment-blocks", segment_blocks, "blocks per decoder resync segment");
    o_primer_seed = app->add_option("--primer-seed", primer_seed, "primer generator seed");
  }

  ExperimentConfig build(Scheme s) const {
    auto c = ExperimentConfig::for_scheme(s);
    if (o_quality->count()) c.quality = quality;
    if (o_strand->count()) c.strand_length = strand_length;
    if (o_primer->count()) c.primer_length = primer_length;
    if (o_pl_dc->count()) c.pl_dc = pl_dc;
    if (o_pl_ac->count()) c.pl_ac = pl_ac;
    if (o_bw->count()) c.barrier_window = bw;
    if (o_seg->count()) c.segment_blocks = segment_blocks;
    if (o_primer_seed->count()) c.primer_seed = primer_seed;
    return c;
  }
  ExperimentConfig build() const { return build(parse_scheme(scheme)); }
};

struct ChannelFlags {
  std::string rate;
  double sub = 1.0 / 3, ins = 1.0 / 3, del = 1.0 / 3;
  std::uint64_t seed = 1;
  std::uint32_t copies = 1;
  bool corrupt_primers = false;
  std::string config_file;
  CLI::Option* o_rate = nullptr;
  CLI::Option* o_sub = nullptr;
  CLI::Option* o_ins = nullptr;
  CLI::Option* o_del = nullptr;
  CLI::Option* o_seed = nullptr;
  CLI::Option* o_copies = nullptr;
  CLI::Option* o_corrupt = nullptr;

  void add(CLI::App* app, bool with_rate) {
    if (with_rate) o_rate = app->add_option("--rate", rate, "per-nucleotide error probability (0.001 or 0.1%)");
    o_sub = app->add_option("--sub", sub, "substitution weight");
    o_ins = app->add_option("--ins", ins, "insertion weight");
    o_del = app->add_option("--del", del, "deletion weight");
    o_seed = app->add_option("--seed", seed, "channel seed");
    o_copies = app->add_option("--copies", copies, "reads per strand");
    o_corrupt = app->add_flag("--corrupt-primers", corrupt_primers, "allow errors inside primers");
    app->add_option("--channel-config", config_file, "key = value channel file; flags override it")
        ->check(CLI::ExistingFile);
  }

  ChannelConfig build() const {
    ChannelConfig c;
    if (!config_file.empty()) c = parse_channel_config(read_text(config_file));
    if (o_rate && o_rate->count()) {
      const auto v = parse_list(rate);
      if (v.size() != 1) throw ConfigError("--rate takes a single value");
      c.total_rate = v.front();
    }
    if (o_sub->count()) c.split.substitution = sub;
    if (o_ins->count()) c.split.insertion = ins;
    if (o_del->count()) c.split.deletion = del;
    if (o_seed->count()) c.seed = seed;
    if (o_copies->count()) c.copies = copies;
    if (o_corrupt->count()) c.corrupt_primers = corrupt_primers;
    c.validate();
    return c;
  }
};

Pool load_pool(const std::string& fasta, const std::string& map) {
  Pool p;
  p.strands = parse_fasta(read_text(fasta));
  p.mapping = parse_mapping(read_bytes(map));
  return p;
}

int fail(const std::string& kind, const std::string& message, int code, std::int64_t offset = -1) {
  json e = {{"error", {{"type", kind}, {"message", message}}}};
  if (offset >= 0) e["error"]["offset"] = offset;
  std::cerr << e.dump() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Image-based DNA storage simulator"};
  app.require_subcommand(1);

  // encode
  auto* enc = app.add_subcommand("encode", "encode a PGM image into a strand pool");
  std::string enc_in, enc_prefix, enc_id, enc_csv;
  ConfigFlags enc_cfg;
  enc->add_option("-i,--input", enc_in, "input PGM")->required()->check(CLI::ExistingFile);
  enc->add_option("-o,--output", enc_prefix, "output prefix (.fasta, .map, .meta, .ref.pgm)")->required();
  enc->add_option("--id", enc_id, "image id (defaults to the input file name)");
  enc->add_option("--csv", enc_csv, "append the pool report as a CSV row (header written if new)");
  enc_cfg.add(enc, true);

  // perturb
  auto* per = app.add_subcommand("perturb", "inject substitution/insertion/deletion errors");
  std::string per_pool, per_map, per_out, per_target = "all";
  ChannelFlags per_ch;
  per->add_option("--pool", per_pool, "input FASTA pool")->required()->check(CLI::ExistingFile);
  per->add_option("--map", per_map, "mapping sidecar")->required()->check(CLI::ExistingFile);
  per->add_option("-o,--output", per_out, "output FASTA pool")->required();
  per->add_option("--target", per_target, "all, dc or ac strands");
  per_ch.add(per, true);

  // decode
  auto* dec = app.add_subcommand("decode", "decode a (possibly noisy) pool into a PGM image");
  std::string dec_pool, dec_map, dec_meta, dec_out, dec_ref;
  dec->add_option("--pool", dec_pool, "FASTA pool")->required()->check(CLI::ExistingFile);
  dec->add_option("--map", dec_map, "mapping sidecar")->required()->check(CLI::ExistingFile);
  dec->add_option("--meta", dec_meta, "image metadata sidecar")->required()->check(CLI::ExistingFile);
  dec->add_option("-o,--output", dec_out, "output PGM")->required();
  dec->add_option("--reference", dec_ref, "reference PGM for SSIM")->check(CLI::ExistingFile);

  // sweep / isolate
  struct ExperimentFlags {
    std::string corpus, output, schemes = "IMG-DNA,NoBarrier-Separated,Raw-DNA", pl_sets, rates = "0.001,0.005,0.01,0.02";
    std::uint32_t trials = 5;
    unsigned threads = 0;
    ConfigFlags cfg;
    ChannelFlags ch;
  } sw, iso;
  auto add_experiment = [](CLI::App* a, ExperimentFlags& f) {
    a->add_option("--corpus", f.corpus, "directory of PGM images")->required()->check(CLI::ExistingDirectory);
    a->add_option("-o,--output", f.output, "output CSV")->required();
    a->add_option("--schemes", f.schemes, "comma-separated scheme list");
    a->add_option("--pl-sets", f.pl_sets, "extra IMG-DNA configs as DC:AC pairs, e.g. 50:100,100:150");
    a->add_option("--rates", f.rates, "comma-separated error rates (0.001 or 0.1%)");
    a->add_option("--trials", f.trials, "trials per image and rate");
    a->add_option("--threads", f.threads, "worker threads (0 = all cores)");
    f.cfg.add(a, false);
    f.ch.add(a, false);
  };
  auto* swc = app.add_subcommand("sweep", "SSIM versus error rate over a corpus");
  add_experiment(swc, sw);
  auto* isoc = app.add_subcommand("isolate", "DC-only versus AC-only error injection over a corpus");
  add_experiment(isoc, iso);

  // validate
  auto* val = app.add_subcommand("validate", "check strands against the synthesis constraints");
  std::string val_pool;
  val->add_option("--pool", val_pool, "FASTA pool")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), 64);
  }

  try {
    if (*enc) {
      const auto cfg = enc_cfg.build();
      const auto image = read_pgm(enc_in);
      const std::string id = enc_id.empty() ? std::filesystem::path(enc_in).stem().string() : enc_id;
      const auto e = encode_image(image, cfg, id);
      write_text(enc_prefix + ".fasta", format_fasta(e.pool.strands));
      write_bytes(enc_prefix + ".map", serialize_mapping(e.pool.mapping));
      write_bytes(enc_prefix + ".meta", serialize_metadata(e.streams.metadata));
      write_pgm(enc_prefix + ".ref.pgm", e.reference);
      auto r = pool_report(e);
      r.ssim = 1.0;
      if (!enc_csv.empty()) {
        const bool fresh = !std::filesystem::exists(enc_csv);
        std::ofstream csv(enc_csv, std::ios::app);
        if (!csv) throw Error("cannot open " + enc_csv);
        if (fresh) csv << "image," << quality_csv_header() << "\n";
        csv << id << "," << quality_csv_row(r) << "\n";
      }
      std::cout << json{{"scheme", to_string(cfg.scheme)},
                        {"config", cfg.label()},
                        {"dc_bytes", e.streams.dc_bytes.size()},
                        {"ac_bytes", e.streams.ac_bytes.size()},
                        {"dc_strands", e.pool.mapping.dc.strand_count},
                        {"ac_strands", e.pool.mapping.ac.strand_count},
                        {"index_width", e.pool.mapping.index_width},
                        {"report", report_json(r)}}
                       .dump(2)
                << "\n";
    } else if (*per) {
      const auto pool = load_pool(per_pool, per_map);
      const auto ch = per_ch.build();
      const auto target = parse_target(per_target);
      ExposureMask mask;
      if (target != Target::All) {
        const std::size_t fwd = pool.mapping.primers.forward.size();
        for (const auto& s : pool.strands) {
          const auto idx = s.sequence.size() >= fwd + pool.mapping.index_width
                               ? decode_index(std::string_view(s.sequence).substr(fwd, pool.mapping.index_width),
                                              pool.mapping)
                               : std::nullopt;
          const bool hit = idx && (idx->type == StreamType::DC) == (target == Target::DcOnly);
          mask.push_back(hit ? std::vector<bool>(s.sequence.size(), true) : std::vector<bool>{});
        }
      }
      ChannelStats stats;
      const auto noisy = perturb(pool, ch, &stats, target == Target::All ? nullptr : &mask);
      write_text(per_out, format_fasta(noisy.strands));
      std::cout << json{{"channel", describe(ch)},
                        {"target", to_string(target)},
                        {"strands_in", pool.strands.size()},
                        {"strands_out", noisy.strands.size()},
                        {"exposed", stats.exposed},
                        {"substitutions", stats.substitutions},
                        {"insertions", stats.insertions},
                        {"deletions", stats.deletions}}
                       .dump(2)
                << "\n";
    } else if (*dec) {
      const auto pool = load_pool(dec_pool, dec_map);
      const auto meta = parse_metadata(read_bytes(dec_meta));
      const auto d = decode_pool(pool, meta);
      write_pgm(dec_out, d.image);
      json out = {{"quarantined", d.quarantined}, {"gaps", d.gaps}, {"damaged_partitions", d.damaged_partitions}};
      if (!dec_ref.empty()) out["ssim"] = ssim(read_pgm(dec_ref), d.image);
      std::cout << out.dump(2) << "\n";
    } else if (*swc || *isoc) {
      auto& f = *swc ? sw : iso;
      const auto ch = f.ch.build();
      const auto rates = parse_list(f.rates);
      std::vector<ExperimentConfig> configs;
      std::stringstream ss(f.schemes);
      for (std::string name; std::getline(ss, name, ',');) {
        if (name.empty()) continue;
        auto c = f.cfg.build(parse_scheme(name));
        c.rates = rates;
        c.trials = f.trials;
        c.seed = ch.seed;
        c.split = ch.split;
        c.copies = ch.copies;
        configs.push_back(c);
      }
      if (!f.pl_sets.empty()) {
        std::stringstream ps(f.pl_sets);
        for (std::string pair; std::getline(ps, pair, ',');) {
          const auto colon = pair.find(':');
          if (colon == std::string::npos) throw ConfigError("PL set must be DC:AC, got " + pair);
          auto c = f.cfg.build(Scheme::ImgDna);
          c.pl_dc = static_cast<std::uint32_t>(std::stoul(pair.substr(0, colon)));
          c.pl_ac = static_cast<std::uint32_t>(std::stoul(pair.substr(colon + 1)));
          c.rates = rates;
          c.trials = f.trials;
          c.seed = ch.seed;
          c.split = ch.split;
          c.copies = ch.copies;
          configs.push_back(c);
        }
      }
      if (configs.empty()) throw ConfigError("no schemes selected");
      const auto corpus = load_corpus(f.corpus);
      std::vector<std::string> log;
      const auto rows = *swc ? run_sweep(corpus, configs, Target::All, f.threads, &log)
                             : run_coefficient_isolation(corpus, configs, f.threads, &log);
      write_text(f.output, sweep_csv(rows));
      for (const auto& line : log) std::cerr << line << "\n";
      std::cout << json{{"rows", rows.size()}, {"images", corpus.size()}, {"failures", log.size()},
                        {"channel", describe(ch)}, {"output", f.output}}
                       .dump(2)
                << "\n";
    } else if (*val) {
      const auto strands = parse_fasta(read_text(val_pool));
      std::size_t homopolymer_fail = 0, length_fail = 0, max_run = 0;
      std::uint64_t gc = 0, total = 0;
      for (const auto& s : strands) {
        const auto r = validate_constraints(s.sequence);
        homopolymer_fail += !r.homopolymer_ok;
        length_fail += !r.length_ok;
        max_run = std::max(max_run, r.max_homopolymer);
        gc += static_cast<std::uint64_t>(r.gc_fraction * static_cast<double>(r.length) + 0.5);
        total += r.length;
      }
      const double mean_gc = total ? static_cast<double>(gc) / static_cast<double>(total) : 0.0;
      const bool gc_ok = mean_gc >= 0.4 && mean_gc <= 0.6;
      const bool ok = homopolymer_fail == 0 && length_fail == 0 && gc_ok;
      std::cout << json{{"strands", strands.size()},
                        {"max_homopolymer", max_run},
                        {"homopolymer_failures", homopolymer_fail},
                        {"length_failures", length_fail},
                        {"mean_gc_fraction", mean_gc},
                        {"gc_ok", gc_ok},
                        {"passes", ok}}
                       .dump(2)
                << "\n";
      if (!ok) return fail("constraint", "pool violates synthesis constraints", 3);
    }
  } catch (const ConfigError& e) {
    return fail("config", e.what(), 2);
  } catch (const DecodeError& e) {
    return fail("decode", e.what(), 3, static_cast<std::int64_t>(e.offset()));
  } catch (const Error& e) {
    return fail("io", e.what(), 1);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), 1);
  }
  return 0;
}
