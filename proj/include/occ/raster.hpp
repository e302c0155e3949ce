// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "occ/common.hpp"

namespace occ {

struct PageSpec {
  int width_px = 1024;
  int height_px = 1024;
  int glyph_w = 8;   // must be a multiple of 8
  int glyph_h = 16;  // must be a multiple of 16
  int margin_px = 16;
  uint8_t foreground = 0;
  uint8_t background = 255;

  int cols() const { return (width_px - 2 * margin_px) / glyph_w; }
  int rows() const { return (height_px - 2 * margin_px) / glyph_h; }
  int capacity() const { return cols() * rows(); }
};

void validate(const PageSpec& spec);

struct PageImage {
  std::vector<uint8_t> pixels;  // row-major, width_px * height_px
  int width_px = 0;
  int height_px = 0;
  int64_t span_begin = 0;  // token offsets rendered on this page
  int64_t span_end = 0;

  uint8_t at(int x, int y) const {
    return pixels[static_cast<size_t>(y) * static_cast<size_t>(width_px) +
                  static_cast<size_t>(x)];
  }
  uint8_t& at(int x, int y) {
    return pixels[static_cast<size_t>(y) * static_cast<size_t>(width_px) +
                  static_cast<size_t>(x)];
  }
};

PageImage blank_page(int w, int h, uint8_t fill);

/// Draws one character into glyph cell (col, row). Newline draws a blank
/// cell; any codepoint outside the font is an error.
void blit_char(PageImage& img, const PageSpec& spec, int col, int row, char c);

/// Fills glyph cells in reading order, wrapping at the right margin and
/// spilling onto further pages. Every character, newline included, consumes
/// exactly one cell, so ceil(len/capacity) pages come out.
std::vector<PageImage> render(const std::string& text, const PageSpec& spec);

/// Block mean over factor x factor tiles, rounded half-up.
PageImage downsample(const PageImage& img, int factor);

/// Corner-aligned bilinear resample, half-up rounding.
PageImage resize_bilinear(const PageImage& img, int new_w, int new_h);

struct PaddedImage {
  PageImage img;
  int orig_w = 0;
  int orig_h = 0;
  int off_x = 0;
  int off_y = 0;
};

PaddedImage pad_to_square(const PageImage& img, int side, uint8_t fill);

void write_pgm(const std::string& path, const PageImage& img);
PageImage read_pgm(const std::string& path);

}  // namespace occ
