#pragma once

// End-to-end orchestration: image -> coefficient streams -> strand pool ->
// channel -> decode -> metrics, for IMG-DNA and its two baselines.

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "imgdna/channel.hpp"
#include "imgdna/image_codec.hpp"
#include "imgdna/metrics.hpp"
#include "imgdna/strand_layer.hpp"

namespace imgdna {

enum class Scheme : std::uint8_t {
  ImgDna,              // separated DC/AC, asymmetric barriers
  RawDna,              // interleaved single stream, no barriers, no segment resync
  NoBarrierSeparated,  // separated DC/AC, no barriers
};

const char* to_string(Scheme scheme) noexcept;
Scheme parse_scheme(std::string_view name);

/// Which strands (or, for the interleaved layout, which nucleotides) the
/// channel may touch.
enum class Target : std::uint8_t { All, DcOnly, AcOnly };

const char* to_string(Target target) noexcept;
Target parse_target(std::string_view name);

constexpr std::uint32_t kDefaultSegmentBlocks = 4;

struct ExperimentConfig {
  Scheme scheme = Scheme::ImgDna;
  int quality = 75;
  std::uint32_t strand_length = 250;
  std::uint32_t primer_length = 20;
  std::uint32_t pl_dc = 20;
  std::uint32_t pl_ac = 50;
  std::uint32_t barrier_window = 12;
  std::uint32_t segment_blocks = kDefaultSegmentBlocks;
  std::uint64_t primer_seed = 0x1D4A;
  std::vector<double> rates{0.001, 0.005, 0.01, 0.02};
  ErrorSplit split;
  std::uint64_t seed = 1;
  std::uint32_t trials = 5;
  std::uint32_t copies = 1;
  std::string corpus;
  std::string output;
  unsigned threads = 0;  // 0: hardware concurrency

  static ExperimentConfig for_scheme(Scheme scheme);
  /// "DC20-AC50" for IMG-DNA, otherwise the scheme name.
  std::string label() const;
  void validate() const;
};

struct EncodedImage {
  std::string id;
  Image reference;  // decoder output for a clean channel
  CoefficientStreams streams;
  Pool pool;
  ExposureMask dc_exposure;
  ExposureMask ac_exposure;
  std::uint64_t barrier_nt_dc = 0;
  std::uint64_t barrier_nt_ac = 0;
};

EncodedImage encode_image(const Image& image, const ExperimentConfig& cfg, const std::string& id = "image");

struct DecodedImage {
  Image image;
  CoefficientStreams streams;
  std::size_t quarantined = 0;
  std::size_t gaps = 0;
  std::size_t damaged_partitions = 0;
};

/// Tolerant decode of a (possibly noisy) pool.
DecodedImage decode_pool(const Pool& pool, const ImageMetadata& metadata);

/// Static pool properties (density, GC, homopolymers, barrier overhead).
QualityReport pool_report(const EncodedImage& encoded);

ChannelConfig channel_for(const ExperimentConfig& cfg, double rate, std::uint64_t seed);

QualityReport run_pipeline(const Image& image, const ExperimentConfig& cfg, const ChannelConfig& channel,
                           Target target = Target::All);
QualityReport run_pipeline(const EncodedImage& encoded, const ChannelConfig& channel, Target target = Target::All);

// --- experiments ---------------------------------------------------------------------

struct CorpusImage {
  std::string name;
  Image image;
};

/// Every *.pgm in `directory`, sorted by file name.
std::vector<CorpusImage> load_corpus(const std::string& directory);

struct SweepRow {
  std::string scheme;
  std::string config;
  std::string target;
  double rate = 0.0;
  std::size_t images = 0;
  std::size_t trials = 0;
  MeanInterval ssim;
  double density_payload = 0.0;
  double density_strand = 0.0;
  std::size_t failures = 0;
};

/// Seed of trial `trial` on image `image_index`. Independent of scheme and
/// rate, so all points of a sweep share their random draws.
std::uint64_t trial_seed(std::uint64_t base, std::size_t image_index, std::uint32_t trial) noexcept;

/// One row per (config, rate), in argument order. Failures (images that
/// cannot be encoded) are counted and appended to `log`.
std::vector<SweepRow> run_sweep(const std::vector<CorpusImage>& corpus, const std::vector<ExperimentConfig>& configs,
                                Target target = Target::All, unsigned threads = 0,
                                std::vector<std::string>* log = nullptr);

/// DC-only rows followed by AC-only rows.
std::vector<SweepRow> run_coefficient_isolation(const std::vector<CorpusImage>& corpus,
                                                const std::vector<ExperimentConfig>& configs, unsigned threads = 0,
                                                std::vector<std::string>* log = nullptr);

std::string sweep_csv_header();
std::string sweep_csv(const std::vector<SweepRow>& rows);

/// Runs fn(0..n-1) on up to `threads` workers; fn must write only to its own
/// slot of any shared output.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace imgdna
