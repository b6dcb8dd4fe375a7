#include "imgdna/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <vector>

namespace imgdna {

double ssim(const Image& a, const Image& b, const SsimParams& p) {
  if (a.width != b.width || a.height != b.height) throw ConfigError("ssim: image dimensions differ");
  if (!a.valid() || !b.valid() || a.width == 0 || a.height == 0) throw ConfigError("ssim: invalid image");
  const int wx = std::min(p.window, a.width);
  const int wy = std::min(p.window, a.height);
  const double n = static_cast<double>(wx) * wy;
  // Constants scaled by n^2 so the whole formula runs on exact integer sums.
  const double c1 = std::pow(p.k1 * p.dynamic_range, 2) * n * n;
  const double c2 = std::pow(p.k2 * p.dynamic_range, 2) * n * n;

  const int w = a.width;
  const int h = a.height;
  // Integral images of x, y, x^2, y^2, xy.
  const std::size_t stride = static_cast<std::size_t>(w) + 1;
  std::vector<std::int64_t> sx(stride * (h + 1)), sy(sx.size()), sxx(sx.size()), syy(sx.size()), sxy(sx.size());
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      const std::int64_t x = a.at(c, r);
      const std::int64_t y = b.at(c, r);
      const std::size_t i = (r + 1) * stride + c + 1;
      const std::size_t up = r * stride + c + 1;
      const std::size_t left = (r + 1) * stride + c;
      const std::size_t diag = r * stride + c;
      sx[i] = x + sx[up] + sx[left] - sx[diag];
      sy[i] = y + sy[up] + sy[left] - sy[diag];
      sxx[i] = x * x + sxx[up] + sxx[left] - sxx[diag];
      syy[i] = y * y + syy[up] + syy[left] - syy[diag];
      sxy[i] = x * y + sxy[up] + sxy[left] - sxy[diag];
    }
  auto box = [&](const std::vector<std::int64_t>& s, int r, int c) {
    return s[(r + wy) * stride + c + wx] - s[r * stride + c + wx] - s[(r + wy) * stride + c] + s[r * stride + c];
  };
  const auto nn = static_cast<std::int64_t>(wx) * wy;
  double total = 0.0;
  std::size_t count = 0;
  for (int r = 0; r + wy <= h; ++r)
    for (int c = 0; c + wx <= w; ++c) {
      const std::int64_t X = box(sx, r, c), Y = box(sy, r, c);
      const std::int64_t vx = nn * box(sxx, r, c) - X * X;
      const std::int64_t vy = nn * box(syy, r, c) - Y * Y;
      const std::int64_t cov = nn * box(sxy, r, c) - X * Y;
      const double num = (2.0 * static_cast<double>(X * Y) + c1) * (2.0 * static_cast<double>(cov) + c2);
      const double den = (static_cast<double>(X * X + Y * Y) + c1) * (static_cast<double>(vx + vy) + c2);
      total += num / den;
      ++count;
    }
  return total / static_cast<double>(count);
}

double encoding_density(std::uint64_t payload_bits, std::uint64_t nucleotides) {
  if (nucleotides == 0) throw ConfigError("encoding density of zero nucleotides");
  return static_cast<double>(payload_bits) / static_cast<double>(nucleotides);
}

double barrier_overhead(std::uint64_t barrier_nucleotides, double bits_per_nucleotide, std::uint64_t image_bytes) {
  if (image_bytes == 0) return 0.0;
  return static_cast<double>(barrier_nucleotides) * bits_per_nucleotide / (8.0 * static_cast<double>(image_bytes));
}

std::string quality_csv_header() {
  return "ssim,density_payload_bits_per_nt,density_strand_bits_per_nt,gc_fraction,max_homopolymer,"
         "barrier_overhead_dc,barrier_overhead_ac,strands,quarantined";
}

std::string quality_csv_row(const QualityReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.6f,%.6f,%zu,%.6f,%.6f,%zu,%zu", r.ssim, r.density_payload,
                r.density_strand, r.gc_fraction, r.max_homopolymer, r.barrier_overhead_dc, r.barrier_overhead_ac,
                r.strands, r.quarantined);
  return buf;
}

std::string summary(const QualityReport& r, const SsimParams& p) {
  char buf[768];
  std::snprintf(buf, sizeof buf,
                "SSIM                 %.4f  (K1=%g K2=%g L=%g, %dx%d uniform window)\n"
                "density (payload)    %.4f bits/nt\n"
                "density (strand)     %.4f bits/nt\n"
                "GC fraction          %.4f\n"
                "max homopolymer      %zu\n"
                "barrier overhead DC  %.4f%%\n"
                "barrier overhead AC  %.4f%%\n"
                "strands              %zu (%zu quarantined)\n",
                r.ssim, p.k1, p.k2, p.dynamic_range, p.window, p.window, r.density_payload, r.density_strand,
                r.gc_fraction, r.max_homopolymer, 100.0 * r.barrier_overhead_dc, 100.0 * r.barrier_overhead_ac,
                r.strands, r.quarantined);
  return buf;
}

double t_quantile_95(std::size_t df) {
  static constexpr double table[] = {0,     6.314, 2.920, 2.353, 2.132, 2.015, 1.943, 1.895, 1.860, 1.833, 1.812,
                                     1.796, 1.782, 1.771, 1.761, 1.753, 1.746, 1.740, 1.734, 1.729, 1.725,
                                     1.721, 1.717, 1.714, 1.711, 1.708, 1.706, 1.703, 1.701, 1.699, 1.697};
  if (df == 0) return 0.0;
  if (df < std::size(table)) return table[df];
  const double z = 1.6448536269514722;
  const double d = static_cast<double>(df);
  return z + (z * z * z + z) / (4.0 * d) + (5 * std::pow(z, 5) + 16 * z * z * z + 3 * z) / (96.0 * d * d);
}

MeanInterval mean_ci90(std::span<const double> v) {
  MeanInterval m;
  m.n = v.size();
  if (v.empty()) return m;
  m.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() < 2) return m;
  double ss = 0.0;
  for (double x : v) ss += (x - m.mean) * (x - m.mean);
  const double sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  m.half_width = t_quantile_95(v.size() - 1) * sd / std::sqrt(static_cast<double>(v.size()));
  return m;
}

}  // namespace imgdna
