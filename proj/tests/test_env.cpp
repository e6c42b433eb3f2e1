#include "bspre/env.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "bspre/infomath.hpp"
#include "bspre/rng.hpp"
#include "doctest.h"

using namespace bspre;

TEST_CASE("glyph table shape") {
  const auto& table = glyph_table();
  CHECK(table.size() == 25);
  std::map<char, int> seen;
  for (const Glyph& g : table) {
    CHECK(g.letter >= 'A');
    CHECK(g.letter <= 'Y');
    seen[g.letter]++;
    REQUIRE(g.bitmap.size() == 25);
    for (std::int16_t px : g.bitmap) CHECK((px == 0 || px == 1));
  }
  CHECK(seen.size() == 25);
}

TEST_CASE("shipped asset file matches the embedded glyph text") {
  std::ifstream f(std::string(BSPRE_SOURCE_DIR) + "/assets/glyphs.txt",
                  std::ios::binary);
  REQUIRE(f.good());
  std::stringstream ss;
  ss << f.rdbuf();
  CHECK(ss.str() == default_glyph_text());
  std::vector<Glyph> parsed = parse_glyphs(ss.str());
  REQUIRE(parsed.size() == 25);
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    CHECK(parsed[i].letter == glyph_table()[i].letter);
    CHECK(parsed[i].bitmap == glyph_table()[i].bitmap);
  }
}

TEST_CASE("exactly 14 glyphs carry a full vertical bar") {
  std::vector<char> bar = vertical_bar_subset();
  CHECK(bar.size() == 14);
  std::size_t recount = 0;
  for (const Glyph& g : glyph_table()) {
    bool has = has_vertical_bar(g.bitmap);
    bool listed = std::find(bar.begin(), bar.end(), g.letter) != bar.end();
    CHECK(has == listed);
    recount += has;
  }
  CHECK(recount == 14);

  // a perfect bar detector under the uniform stream sits near the reward peak
  CHECK(14.0 / 25.0 == doctest::Approx(0.56));
  CHECK(intrinsic_reward(14.0 / 25.0) == doctest::Approx(0.4684).epsilon(1e-3));
}

TEST_CASE("letter stream is deterministic") {
  LetterStreamConfig cfg;
  std::uint64_t a = 42, b = 42;
  for (int i = 0; i < 1000; ++i) {
    auto fa = letter_frame(cfg, a);
    auto fb = letter_frame(cfg, b);
    CHECK(fa.first == fb.first);
    CHECK(fa.second == fb.second);
    REQUIRE(fa.second.size() == 25);
  }
}

TEST_CASE("one-hot weights pin the stream to a single letter") {
  LetterStreamConfig cfg;
  cfg.weights.fill(0.0);
  cfg.weights[0] = 1.0;  // 'A'
  std::uint64_t rng = 7;
  for (int i = 0; i < 200; ++i) {
    auto [letter, bitmap] = letter_frame(cfg, rng);
    CHECK(letter == 'A');
    CHECK(bitmap == glyph_table()[0].bitmap);
  }
}

TEST_CASE("uniform letter frequencies land at 0.04") {
  LetterStreamConfig cfg;
  std::uint64_t rng = 123;
  std::map<char, int> counts;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) counts[letter_frame(cfg, rng).first]++;
  CHECK(counts.size() == 25);
  for (const auto& [letter, n] : counts) {
    double freq = static_cast<double>(n) / draws;
    CHECK(freq == doctest::Approx(0.04).epsilon(0.125));  // 0.04 +/- 0.005
    CHECK(freq > 0.035);
    CHECK(freq < 0.045);
  }
}

TEST_CASE("scripted pixel stream replays its script") {
  PixelStreamConfig cfg;
  cfg.mode = PixelStreamConfig::Mode::Scripted;
  cfg.script = {{16, 128, 128}, {200, 30, 90}};
  std::uint64_t rng = 0;
  for (std::uint64_t i = 0; i < 10; ++i) {
    FeatureVector f = pixel_frame(cfg, rng, i);
    const auto& want = cfg.script[i % 2];
    CHECK(f == FeatureVector({want[0], want[1], want[2]}));
  }
}

TEST_CASE("uniform pixel stream is deterministic and in range") {
  PixelStreamConfig cfg;
  std::uint64_t a = 9, b = 9;
  for (std::uint64_t i = 0; i < 100000; ++i) {
    FeatureVector fa = pixel_frame(cfg, a, i);
    CHECK(fa == pixel_frame(cfg, b, i));
    REQUIRE(fa.size() == 3);
    for (std::int16_t ch : fa) {
      CHECK(ch >= 0);
      CHECK(ch <= 255);
    }
  }
}
