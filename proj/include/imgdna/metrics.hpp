#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "imgdna/image_codec.hpp"

namespace imgdna {

struct SsimParams {
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 255.0;
  int window = 8;  // square, uniform weights, stride 1
};

/// Mean SSIM over all window positions. Variances are population variances.
/// Images smaller than the window are treated as a single window. Throws
/// ConfigError on a dimension mismatch.
double ssim(const Image& reference, const Image& test, const SsimParams& params = {});

/// Source bits per nucleotide. Throws ConfigError for zero nucleotides.
double encoding_density(std::uint64_t payload_bits, std::uint64_t nucleotides);

/// Barrier nucleotides converted to bits at the stream's own bits-per-nt rate,
/// as a fraction of the image's encoded size.
double barrier_overhead(std::uint64_t barrier_nucleotides, double bits_per_nucleotide, std::uint64_t image_bytes);

struct QualityReport {
  double ssim = 0.0;
  double density_payload = 0.0;  // bits per payload+barrier nt
  double density_strand = 0.0;   // bits per nt including primers and index
  double gc_fraction = 0.0;
  std::size_t max_homopolymer = 0;
  double barrier_overhead_dc = 0.0;
  double barrier_overhead_ac = 0.0;
  std::size_t strands = 0;
  std::size_t quarantined = 0;
};

std::string quality_csv_header();
std::string quality_csv_row(const QualityReport& report);
/// Multi-line summary including the SSIM constants.
std::string summary(const QualityReport& report, const SsimParams& params = {});

struct MeanInterval {
  double mean = 0.0;
  double half_width = 0.0;  // two-sided 90% Student-t interval
  std::size_t n = 0;
};

MeanInterval mean_ci90(std::span<const double> values);

/// Upper 0.95 quantile of Student's t with `df` degrees of freedom.
double t_quantile_95(std::size_t df);

}  // namespace imgdna
