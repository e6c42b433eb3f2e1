#include "bspre/env.hpp"

#include <sstream>

#include "bspre/errors.hpp"
#include "bspre/rng.hpp"

namespace bspre {

namespace {

// Mirrored verbatim in assets/glyphs.txt. A..Y; Z is the omitted 26th letter.
const char* kGlyphText =
    "A\n01110\n10001\n11111\n10001\n10001\n"
    "B\n11110\n10001\n11110\n10001\n11110\n"
    "C\n01111\n10000\n10000\n10000\n01111\n"
    "D\n11110\n10001\n10001\n10001\n11110\n"
    "E\n11111\n10000\n11110\n10000\n11111\n"
    "F\n11111\n10000\n11110\n10000\n10000\n"
    "G\n01111\n10000\n10011\n10001\n01111\n"
    "H\n10001\n10001\n11111\n10001\n10001\n"
    "I\n11111\n00100\n00100\n00100\n11111\n"
    "J\n00111\n00010\n00010\n10010\n01100\n"
    "K\n10010\n10100\n11000\n10100\n10010\n"
    "L\n10000\n10000\n10000\n10000\n11111\n"
    "M\n10001\n11011\n10101\n10001\n10001\n"
    "N\n10001\n11001\n10101\n10011\n10001\n"
    "O\n01110\n10001\n10001\n10001\n01110\n"
    "P\n11110\n10001\n11110\n10000\n10000\n"
    "Q\n01110\n10001\n10101\n10010\n01101\n"
    "R\n11110\n10001\n11110\n10100\n10010\n"
    "S\n01111\n10000\n01110\n00001\n11110\n"
    "T\n11111\n00100\n00100\n00100\n00100\n"
    "U\n10001\n10001\n10001\n10001\n11111\n"
    "V\n10001\n10001\n10001\n01010\n00100\n"
    "W\n10001\n10001\n10101\n10101\n01010\n"
    "X\n10001\n01010\n00100\n01010\n10001\n"
    "Y\n10001\n01010\n00100\n00100\n00100\n";

std::array<Glyph, kGlyphCount> build_table() {
  std::vector<Glyph> parsed = parse_glyphs(kGlyphText);
  std::array<Glyph, kGlyphCount> table;
  for (std::size_t i = 0; i < kGlyphCount; ++i) table[i] = parsed[i];
  return table;
}

}  // namespace

const std::string& default_glyph_text() {
  static const std::string text = kGlyphText;
  return text;
}

std::vector<Glyph> parse_glyphs(const std::string& text) {
  std::vector<Glyph> out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line.size() != 1 || line[0] < 'A' || line[0] > 'Z')
      throw ParseError(line_no, "expected a single letter tag");
    Glyph g;
    g.letter = line[0];
    for (std::size_t r = 0; r < kGlyphSide; ++r) {
      if (!std::getline(in, line)) throw ParseError(line_no, "truncated glyph block");
      ++line_no;
      if (line.size() != kGlyphSide) throw ParseError(line_no, "row must have 5 cells");
      for (char ch : line) {
        if (ch != '0' && ch != '1') throw ParseError(line_no, "cells must be 0 or 1");
        g.bitmap.push_back(ch == '1' ? 1 : 0);
      }
    }
    out.push_back(std::move(g));
  }
  return out;
}

const std::array<Glyph, kGlyphCount>& glyph_table() {
  static const std::array<Glyph, kGlyphCount> table = build_table();
  return table;
}

bool has_vertical_bar(const FeatureVector& bitmap) {
  for (std::size_t col = 0; col < kGlyphSide; ++col) {
    bool full = true;
    for (std::size_t row = 0; row < kGlyphSide; ++row)
      if (bitmap[row * kGlyphSide + col] == 0) { full = false; break; }
    if (full) return true;
  }
  return false;
}

std::vector<char> vertical_bar_subset() {
  std::vector<char> out;
  for (const Glyph& g : glyph_table())
    if (has_vertical_bar(g.bitmap)) out.push_back(g.letter);
  return out;
}

std::pair<char, FeatureVector> letter_frame(const LetterStreamConfig& cfg,
                                            std::uint64_t& rng_state) {
  double total = 0.0;
  for (double w : cfg.weights) {
    if (w < 0.0) throw DomainError("letter weights must be non-negative");
    total += w;
  }
  if (!(total > 0.0)) throw DomainError("letter weights must not all be zero");
  double u = rng_unit(rng_state) * total;
  std::size_t pick = kGlyphCount - 1;
  double acc = 0.0;
  for (std::size_t i = 0; i < kGlyphCount; ++i) {
    acc += cfg.weights[i];
    if (u < acc) { pick = i; break; }
  }
  const Glyph& g = glyph_table()[pick];
  return {g.letter, g.bitmap};
}

FeatureVector pixel_frame(const PixelStreamConfig& cfg, std::uint64_t& rng_state,
                          std::uint64_t frame_index) {
  if (cfg.mode == PixelStreamConfig::Mode::Scripted) {
    if (cfg.script.empty()) throw DomainError("scripted pixel stream is empty");
    const auto& px = cfg.script[frame_index % cfg.script.size()];
    return {px[0], px[1], px[2]};
  }
  FeatureVector v(3);
  for (auto& ch : v) ch = static_cast<std::int16_t>(rng_below(rng_state, 256));
  return v;
}

}  // namespace bspre
