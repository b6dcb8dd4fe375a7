#include <doctest.h>

#include <cmath>
#include <random>

#include "imgdna/channel.hpp"

using namespace imgdna;

namespace {

NucleotideSequence random_seq(std::mt19937& rng, std::size_t n) {
  NucleotideSequence s(n, 'A');
  for (auto& c : s) c = "ACGT"[rng() % 4];
  return s;
}

ChannelConfig config(double rate, ErrorSplit split = {}, std::uint64_t seed = 1) {
  ChannelConfig c;
  c.total_rate = rate;
  c.split = split;
  c.seed = seed;
  return c;
}

constexpr ErrorSplit kSubOnly{1, 0, 0};

Pool small_pool(std::mt19937& rng, std::size_t strands) {
  Pool p;
  p.mapping.primers = generate_primers(11);
  for (std::size_t i = 0; i < strands; ++i)
    p.strands.push_back({"s" + std::to_string(i), p.mapping.primers.forward + random_seq(rng, 150) +
                                                      p.mapping.primers.reverse});
  return p;
}

}  // namespace

TEST_CASE("zero rate is the identity") {
  std::mt19937 rng(1);
  const auto s = random_seq(rng, 5000);
  ChannelStats st;
  CHECK(perturb_sequence(s, 0, s.size(), config(0.0), 3, &st) == s);
  CHECK(st.errors() == 0);
  CHECK(st.exposed == 5000);

  const auto pool = small_pool(rng, 10);
  const auto out = perturb(pool, config(0.0));
  CHECK(out.strands == pool.strands);
}

TEST_CASE("rate one with substitutions only changes every exposed base") {
  std::mt19937 rng(2);
  const auto s = random_seq(rng, 2000);
  const auto out = perturb_sequence(s, 100, 1900, config(1.0, kSubOnly), 0);
  REQUIRE(out.size() == s.size());
  for (std::size_t i = 0; i < s.size(); ++i) CHECK((out[i] != s[i]) == (i >= 100 && i < 1900));
}

TEST_CASE("primers are exempt unless requested") {
  std::mt19937 rng(3);
  const auto pool = small_pool(rng, 20);
  ChannelStats st;
  const auto out = perturb(pool, config(1.0, kSubOnly), &st);
  CHECK(st.exposed == 20 * 150);
  for (std::size_t i = 0; i < pool.strands.size(); ++i) {
    const auto& a = pool.strands[i].sequence;
    const auto& b = out.strands[i].sequence;
    CHECK(b.substr(0, 20) == a.substr(0, 20));
    CHECK(b.substr(170) == a.substr(170));
    for (std::size_t k = 20; k < 170; ++k) CHECK(a[k] != b[k]);
  }
  auto cfg = config(1.0, kSubOnly);
  cfg.corrupt_primers = true;
  const auto all = perturb(pool, cfg);
  CHECK(all.strands[0].sequence[0] != pool.strands[0].sequence[0]);
}

TEST_CASE("error count follows the binomial distribution") {
  std::mt19937 rng(4);
  const std::size_t n = 1000000;
  const auto s = random_seq(rng, n);
  for (double rate : {0.001, 0.01, 0.02}) {
    ChannelStats st;
    (void)perturb_sequence(s, 0, n, config(rate, {}, 9), 0, &st);
    const double mean = n * rate;
    const double sigma = std::sqrt(n * rate * (1 - rate));
    CHECK(std::abs(static_cast<double>(st.errors()) - mean) <= 3 * sigma);
  }
}

TEST_CASE("error kinds follow the split") {
  std::mt19937 rng(5);
  const std::size_t n = 1000000;
  const auto s = random_seq(rng, n);
  // Critical value of chi-square with two degrees of freedom at p = 0.001.
  const double critical = 13.816;
  for (const ErrorSplit& split : {ErrorSplit{}, ErrorSplit{0.5, 0.3, 0.2}}) {
    ChannelStats st;
    (void)perturb_sequence(s, 0, n, config(0.05, split, 21), 0, &st);
    const auto total = static_cast<double>(st.errors());
    const auto p = split.normalized();
    const double observed[3] = {double(st.substitutions), double(st.insertions), double(st.deletions)};
    const double expected[3] = {total * p.substitution, total * p.insertion, total * p.deletion};
    double chi2 = 0;
    for (int k = 0; k < 3; ++k) chi2 += (observed[k] - expected[k]) * (observed[k] - expected[k]) / expected[k];
    CHECK(chi2 < critical);
  }
}

TEST_CASE("output length drifts by insertions minus deletions") {
  std::mt19937 rng(6);
  const auto s = random_seq(rng, 100000);
  ChannelStats st;
  const auto out = perturb_sequence(s, 0, s.size(), config(0.03), 0, &st);
  CHECK(out.size() + st.deletions == s.size() + st.insertions);
  CHECK(is_nucleotide_sequence(out));
}

TEST_CASE("determinism and nesting across rates") {
  std::mt19937 rng(7);
  const auto s = random_seq(rng, 1000000);
  const auto a = perturb_sequence(s, 0, s.size(), config(0.01, {}, 5), 2);
  CHECK(perturb_sequence(s, 0, s.size(), config(0.01, {}, 5), 2) == a);
  CHECK(perturb_sequence(s, 0, s.size(), config(0.01, {}, 6), 2) != a);
  CHECK(perturb_sequence(s, 0, s.size(), config(0.01, {}, 5), 3) != a);

  const auto lo = perturb_sequence(s, 0, s.size(), config(0.005, kSubOnly, 5), 2);
  const auto hi = perturb_sequence(s, 0, s.size(), config(0.01, kSubOnly, 5), 2);
  std::size_t lo_hits = 0;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (lo[i] != s[i]) {
      ++lo_hits;
      CHECK(hi[i] == lo[i]);
    }
  CHECK(lo_hits > 0);
}

TEST_CASE("copies and seeds") {
  std::mt19937 rng(8);
  const auto pool = small_pool(rng, 5);
  auto cfg = config(0.05);
  cfg.copies = 3;
  const auto out = perturb(pool, cfg);
  REQUIRE(out.strands.size() == 15);
  CHECK(out.strands[0].id == out.strands[2].id);
  CHECK(out.strands[3].id == pool.strands[1].id);
  CHECK(out.strands[0].sequence != out.strands[1].sequence);
  CHECK(perturb(pool, cfg).strands == out.strands);
}

TEST_CASE("exposure masks restrict where errors land") {
  std::mt19937 rng(9);
  const auto pool = small_pool(rng, 4);
  ExposureMask mask(4);
  mask[1].assign(190, false);
  for (std::size_t k = 20; k < 170; k += 2) mask[1][k] = true;
  mask[2].assign(100, true);
  ChannelStats st;
  const auto out = perturb(pool, config(1.0, kSubOnly), &st, &mask);
  CHECK(out.strands[0].sequence == pool.strands[0].sequence);
  CHECK(out.strands[3].sequence == pool.strands[3].sequence);
  for (std::size_t k = 0; k < 190; ++k) {
    CHECK((out.strands[1].sequence[k] != pool.strands[1].sequence[k]) == (k >= 20 && k < 170 && k % 2 == 0));
    CHECK((out.strands[2].sequence[k] != pool.strands[2].sequence[k]) == (k >= 20 && k < 100));
  }
  CHECK(st.exposed == 75 + 80);
}

TEST_CASE("configuration text and descriptions") {
  CHECK(format_rate(0.001) == "0.1%");
  CHECK(format_rate(0.02) == "2%");
  CHECK(format_rate(0.005) == "0.5%");
  CHECK(describe(config(0.001, {}, 7)) == "rate 0.1%, split uniform, seed 7, copies 1, primers exempt");
  CHECK(describe(config(0.01, {2, 1, 1}, 1)) ==
        "rate 1%, split sub 0.5 / ins 0.25 / del 0.25, seed 1, copies 1, primers exempt");

  const auto c = parse_channel_config(
      "# channel\n"
      "rate = 0.5%\n"
      "substitution = 2   # weights are normalized\n"
      "\n"
      "seed = 42\n"
      "copies = 3\n"
      "corrupt_primers = true\n");
  CHECK(c.total_rate == doctest::Approx(0.005));
  CHECK(c.split.substitution == 2.0);
  CHECK(c.split.insertion == doctest::Approx(1.0 / 3.0));
  CHECK(c.seed == 42);
  CHECK(c.copies == 3);
  CHECK(c.corrupt_primers);
  CHECK(parse_channel_config("rate = 0.02").total_rate == 0.02);

  CHECK_THROWS_AS(parse_channel_config("rate = 2"), ConfigError);
  CHECK_THROWS_AS(parse_channel_config("rate"), ConfigError);
  CHECK_THROWS_AS(parse_channel_config("speed = 1"), ConfigError);
  CHECK_THROWS_AS(parse_channel_config("seed = -3"), ConfigError);
  CHECK_THROWS_AS(parse_channel_config("copies = 0"), ConfigError);
  CHECK_THROWS_AS(parse_channel_config("substitution = 0\ninsertion = 0\ndeletion = 0"), ConfigError);
  CHECK_THROWS_AS(parse_channel_config("deletion = -1"), ConfigError);
  try {
    (void)parse_channel_config("rate = 0.1\nbogus = 1\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}
