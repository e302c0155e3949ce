// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

namespace occ {

// 1-bit glyphs for ASCII 32..126. Row-major, one byte per row, MSB is the
// leftmost pixel. Regenerate with tools/gen_font.py.
extern const uint8_t kFont8x16[95][16];

inline constexpr int kFontW = 8;
inline constexpr int kFontH = 16;

inline bool font_has_glyph(char c) { return c >= 32 && c <= 126; }

inline const uint8_t* glyph_bitmap(char c) { return kFont8x16[c - 32]; }

}  // namespace occ
