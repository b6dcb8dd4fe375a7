#include <doctest.h>

#include <random>

#include "imgdna/dna_codec.hpp"
#include "imgdna/metrics.hpp"

using namespace imgdna;

namespace {

// Per-window SSIM straight from the definition, averaged over every 8x8
// window position.
double ssim_oracle(const Image& a, const Image& b) {
  const double c1 = (0.01 * 255) * (0.01 * 255);
  const double c2 = (0.03 * 255) * (0.03 * 255);
  const int wx = std::min(8, a.width), wy = std::min(8, a.height);
  double total = 0;
  int count = 0;
  for (int y0 = 0; y0 + wy <= a.height; ++y0)
    for (int x0 = 0; x0 + wx <= a.width; ++x0) {
      const double n = wx * wy;
      double ma = 0, mb = 0;
      for (int y = y0; y < y0 + wy; ++y)
        for (int x = x0; x < x0 + wx; ++x) {
          ma += a.at(x, y);
          mb += b.at(x, y);
        }
      ma /= n;
      mb /= n;
      double va = 0, vb = 0, cov = 0;
      for (int y = y0; y < y0 + wy; ++y)
        for (int x = x0; x < x0 + wx; ++x) {
          va += (a.at(x, y) - ma) * (a.at(x, y) - ma);
          vb += (b.at(x, y) - mb) * (b.at(x, y) - mb);
          cov += (a.at(x, y) - ma) * (b.at(x, y) - mb);
        }
      va /= n;
      vb /= n;
      cov /= n;
      total += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
      ++count;
    }
  return total / count;
}

Image random_image(std::mt19937& rng, int w, int h) {
  Image img(w, h);
  for (auto& p : img.samples) p = static_cast<std::uint8_t>(rng());
  return img;
}

Image noisy_copy(std::mt19937& rng, const Image& src, int amplitude) {
  Image out = src;
  for (auto& p : out.samples) {
    const int v = p + static_cast<int>(rng() % (2 * amplitude + 1)) - amplitude;
    p = static_cast<std::uint8_t>(std::clamp(v, 0, 255));
  }
  return out;
}

}  // namespace

TEST_CASE("ssim of an image with itself is exactly one") {
  std::mt19937 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const auto img = random_image(rng, 8 + rng() % 40, 8 + rng() % 40);
    CHECK(ssim(img, img) == 1.0);
  }
  Image flat(16, 16, 77);
  CHECK(ssim(flat, flat) == 1.0);
}

TEST_CASE("ssim matches the direct formula") {
  Image black(8, 8, 0), white(8, 8, 255);
  const double c1 = (0.01 * 255) * (0.01 * 255);
  CHECK(ssim(black, white) == doctest::Approx(c1 / (255.0 * 255.0 + c1)).epsilon(1e-12));

  std::mt19937 rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    const auto a = random_image(rng, 8 + rng() % 17, 8 + rng() % 17);
    const auto b = trial % 2 ? random_image(rng, a.width, a.height) : noisy_copy(rng, a, 20);
    CHECK(ssim(a, b) == doctest::Approx(ssim_oracle(a, b)).epsilon(1e-9));
  }
  // Smaller than the window: one window over the whole image.
  const auto a = random_image(rng, 5, 3);
  const auto b = noisy_copy(rng, a, 30);
  CHECK(ssim(a, b) == doctest::Approx(ssim_oracle(a, b)).epsilon(1e-9));
}

TEST_CASE("ssim is symmetric and bounded") {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = random_image(rng, 24, 16);
    const auto b = noisy_copy(rng, a, 1 + static_cast<int>(rng() % 100));
    const double s = ssim(a, b);
    CHECK(s == doctest::Approx(ssim(b, a)).epsilon(1e-12));
    CHECK(s <= 1.0);
    CHECK(s >= -1.0);
  }
  CHECK_THROWS_AS(ssim(Image(8, 8), Image(8, 9)), ConfigError);
}

TEST_CASE("encoding density") {
  CHECK(encoding_density(8, 5) == 1.6);
  CHECK(encoding_density(0, 5) == 0.0);
  CHECK_THROWS_AS(encoding_density(8, 0), ConfigError);
}

TEST_CASE("barrier overhead shrinks with partition length") {
  std::mt19937 rng(4);
  std::vector<std::uint8_t> bytes(4000);
  for (auto& b : bytes) b = static_cast<std::uint8_t>(rng());
  const auto trits = bytes_to_trits(bytes);
  const double bits_per_nt = bytes.size() * 8.0 / trits.size();

  double previous_overhead = 1.0;
  double previous_density = 0.0;
  for (std::size_t pl : {10, 20, 40, 80, 160, 320, 640}) {
    const auto seq = insert_barriers(trits, {pl, 12});
    const auto barrier_nt = seq.sequence.size() - trits.size();
    CHECK(barrier_nt == 2 * ((trits.size() + pl - 1) / pl - 1));
    const double overhead = barrier_overhead(barrier_nt, bits_per_nt, bytes.size());
    const double density = encoding_density(bytes.size() * 8, seq.sequence.size());
    CHECK(overhead < previous_overhead);
    CHECK(density > previous_density);
    CHECK(overhead == doctest::Approx(barrier_nt / static_cast<double>(trits.size())));
    previous_overhead = overhead;
    previous_density = density;
  }
  CHECK(previous_overhead < 0.004);

  // Halving the partition length roughly doubles the barrier count.
  const auto at100 = insert_barriers(trits, {100, 12}).barrier_count();
  const auto at50 = insert_barriers(trits, {50, 12}).barrier_count();
  CHECK(at50 + 1 == (trits.size() + 49) / 50);
  CHECK(2 * (at100 + 1) - (at50 + 1) <= 1);
  CHECK(barrier_overhead(10, 1.5, 0) == 0.0);
}

TEST_CASE("confidence intervals") {
  CHECK(t_quantile_95(1) == doctest::Approx(6.314));
  CHECK(t_quantile_95(4) == doctest::Approx(2.132));
  CHECK(t_quantile_95(30) == doctest::Approx(1.697));
  CHECK(t_quantile_95(60) == doctest::Approx(1.671).epsilon(1e-3));
  CHECK(t_quantile_95(120) == doctest::Approx(1.658).epsilon(1e-3));
  CHECK(t_quantile_95(100000) == doctest::Approx(1.6449).epsilon(1e-4));

  const std::vector<double> v{1, 2, 3, 4, 5};
  const auto m = mean_ci90(v);
  CHECK(m.n == 5);
  CHECK(m.mean == 3.0);
  CHECK(m.half_width == doctest::Approx(2.132 * std::sqrt(2.5) / std::sqrt(5.0)));
  const std::vector<double> one{0.7};
  CHECK(mean_ci90(one).half_width == 0.0);
  CHECK(mean_ci90({}).n == 0);
}

TEST_CASE("quality report formatting") {
  QualityReport r;
  r.ssim = 0.5;
  r.density_payload = 1.5;
  r.strands = 12;
  const auto header = quality_csv_header();
  const auto row = quality_csv_row(r);
  CHECK(std::count(header.begin(), header.end(), ',') == std::count(row.begin(), row.end(), ','));
  CHECK(row.rfind("0.500000,1.500000,", 0) == 0);
  const auto text = summary(r);
  CHECK(text.find("0.01") != std::string::npos);
  CHECK(text.find("0.03") != std::string::npos);
}
