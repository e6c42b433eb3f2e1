#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "bspre/vm.hpp"

namespace bspre {

inline constexpr std::size_t kGlyphCount = 25;
inline constexpr std::size_t kGlyphSide = 5;

// A letter and its 5x5 bitmap flattened row-major into a 25-element vector
// of 0/1.
struct Glyph {
  char letter;
  FeatureVector bitmap;
};

// The shipped glyph set: the Latin alphabet A..Y (Z omitted to keep the
// 25-glyph count). Exactly 14 glyphs contain a full-height column of 1s.
const std::array<Glyph, kGlyphCount>& glyph_table();

// Text form of the glyph set, identical to assets/glyphs.txt.
const std::string& default_glyph_text();
std::vector<Glyph> parse_glyphs(const std::string& text);

// The 14 letters whose bitmap contains a full column of 1s.
std::vector<char> vertical_bar_subset();
bool has_vertical_bar(const FeatureVector& bitmap);

struct LetterStreamConfig {
  std::array<double, kGlyphCount> weights;  // relative, default uniform
  LetterStreamConfig() { weights.fill(1.0); }
};

// Samples one glyph per the configured distribution; deterministic given
// rng_state.
std::pair<char, FeatureVector> letter_frame(const LetterStreamConfig& cfg,
                                            std::uint64_t& rng_state);

struct PixelStreamConfig {
  enum class Mode { UniformRandom, Scripted } mode = Mode::UniformRandom;
  std::vector<std::array<std::int16_t, 3>> script;  // cycled when scripted
};

// One (Y, U, V) sample, each channel in 0..255. frame_index selects the
// scripted entry (modulo script length).
FeatureVector pixel_frame(const PixelStreamConfig& cfg, std::uint64_t& rng_state,
                          std::uint64_t frame_index);

}  // namespace bspre
