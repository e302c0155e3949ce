// SPDX-License-Identifier: Apache-2.0
#include "occ/raster.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "occ/font8x16.hpp"

namespace occ {

void validate(const PageSpec& spec) {
  check(spec.width_px > 0 && spec.height_px > 0, "PageSpec: page dims must be positive");
  check(spec.glyph_w >= 8 && spec.glyph_w % 8 == 0, "PageSpec: glyph_w must be a multiple of 8");
  check(spec.glyph_h >= 16 && spec.glyph_h % 16 == 0,
        "PageSpec: glyph_h must be a multiple of 16");
  check(spec.margin_px >= 0, "PageSpec: margin must be non-negative");
  check(spec.cols() >= 1 && spec.rows() >= 1, "PageSpec: no glyph cell fits inside margins");
}

PageImage blank_page(int w, int h, uint8_t fill) {
  PageImage img;
  img.width_px = w;
  img.height_px = h;
  img.pixels.assign(static_cast<size_t>(w) * static_cast<size_t>(h), fill);
  return img;
}

void blit_char(PageImage& img, const PageSpec& spec, int col, int row, char c) {
  check(col >= 0 && col < spec.cols() && row >= 0 && row < spec.rows(),
        "blit_char: cell out of range");
  if (c == '\n') return;  // blank cell
  if (!font_has_glyph(c))
    fail("blit_char: no glyph for codepoint " +
         std::to_string(static_cast<int>(static_cast<unsigned char>(c))));
  const uint8_t* bits = glyph_bitmap(c);
  int sx = spec.glyph_w / kFontW;
  int sy = spec.glyph_h / kFontH;
  int x0 = spec.margin_px + col * spec.glyph_w;
  int y0 = spec.margin_px + row * spec.glyph_h;
  for (int fy = 0; fy < kFontH; ++fy) {
    uint8_t rowbits = bits[fy];
    if (!rowbits) continue;
    for (int fx = 0; fx < kFontW; ++fx) {
      if (!(rowbits & (0x80u >> fx))) continue;
      for (int dy = 0; dy < sy; ++dy)
        for (int dx = 0; dx < sx; ++dx)
          img.at(x0 + fx * sx + dx, y0 + fy * sy + dy) = spec.foreground;
    }
  }
}

std::vector<PageImage> render(const std::string& text, const PageSpec& spec) {
  validate(spec);
  for (char c : text)
    if (c != '\n' && !font_has_glyph(c))
      fail("render: no glyph for codepoint " +
           std::to_string(static_cast<int>(static_cast<unsigned char>(c))));
  int cols = spec.cols();
  int capacity = spec.capacity();
  int64_t total = static_cast<int64_t>(text.size());
  int64_t n_pages = total == 0 ? 1 : (total + capacity - 1) / capacity;
  std::vector<PageImage> pages;
  pages.reserve(static_cast<size_t>(n_pages));
  for (int64_t p = 0; p < n_pages; ++p) {
    PageImage img = blank_page(spec.width_px, spec.height_px, spec.background);
    img.span_begin = p * capacity;
    img.span_end = std::min(total, (p + 1) * capacity);
    for (int64_t i = img.span_begin; i < img.span_end; ++i) {
      int cell = static_cast<int>(i - img.span_begin);
      blit_char(img, spec, cell % cols, cell / cols, text[static_cast<size_t>(i)]);
    }
    pages.push_back(std::move(img));
  }
  return pages;
}

PageImage downsample(const PageImage& img, int factor) {
  check(factor >= 1, "downsample: factor must be >= 1");
  check(img.width_px % factor == 0 && img.height_px % factor == 0,
        "downsample: factor must divide both dimensions");
  PageImage out = blank_page(img.width_px / factor, img.height_px / factor, 0);
  out.span_begin = img.span_begin;
  out.span_end = img.span_end;
  int64_t f2 = static_cast<int64_t>(factor) * factor;
  for (int y = 0; y < out.height_px; ++y) {
    for (int x = 0; x < out.width_px; ++x) {
      int64_t sum = 0;
      for (int dy = 0; dy < factor; ++dy)
        for (int dx = 0; dx < factor; ++dx) sum += img.at(x * factor + dx, y * factor + dy);
      out.at(x, y) = static_cast<uint8_t>((2 * sum + f2) / (2 * f2));
    }
  }
  return out;
}

namespace {

inline double src_coord(int i, int n_out, int n_in) {
  if (n_out == 1) return (n_in - 1) / 2.0;
  return static_cast<double>(i) * (n_in - 1) / (n_out - 1);
}

}  // namespace

PageImage resize_bilinear(const PageImage& img, int new_w, int new_h) {
  check(new_w > 0 && new_h > 0, "resize_bilinear: target dims must be positive");
  PageImage out = blank_page(new_w, new_h, 0);
  out.span_begin = img.span_begin;
  out.span_end = img.span_end;
  for (int y = 0; y < new_h; ++y) {
    double sy = src_coord(y, new_h, img.height_px);
    int y0 = static_cast<int>(sy);
    int y1 = std::min(y0 + 1, img.height_px - 1);
    double fy = sy - y0;
    for (int x = 0; x < new_w; ++x) {
      double sx = src_coord(x, new_w, img.width_px);
      int x0 = static_cast<int>(sx);
      int x1 = std::min(x0 + 1, img.width_px - 1);
      double fx = sx - x0;
      double v = (1 - fy) * ((1 - fx) * img.at(x0, y0) + fx * img.at(x1, y0)) +
                 fy * ((1 - fx) * img.at(x0, y1) + fx * img.at(x1, y1));
      out.at(x, y) = static_cast<uint8_t>(std::floor(v + 0.5));
    }
  }
  return out;
}

PaddedImage pad_to_square(const PageImage& img, int side, uint8_t fill) {
  check(img.width_px <= side && img.height_px <= side,
        "pad_to_square: image larger than target side");
  PaddedImage out;
  out.orig_w = img.width_px;
  out.orig_h = img.height_px;
  out.off_x = (side - img.width_px) / 2;
  out.off_y = (side - img.height_px) / 2;
  out.img = blank_page(side, side, fill);
  out.img.span_begin = img.span_begin;
  out.img.span_end = img.span_end;
  for (int y = 0; y < img.height_px; ++y)
    for (int x = 0; x < img.width_px; ++x) out.img.at(out.off_x + x, out.off_y + y) = img.at(x, y);
  return out;
}

void write_pgm(const std::string& path, const PageImage& img) {
  std::ofstream f(path, std::ios::binary);
  check(f.good(), "write_pgm: cannot open " + path);
  f << "P5\n" << img.width_px << " " << img.height_px << "\n255\n";
  f.write(reinterpret_cast<const char*>(img.pixels.data()),
          static_cast<std::streamsize>(img.pixels.size()));
  check(f.good(), "write_pgm: write failed for " + path);
}

PageImage read_pgm(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  check(f.good(), "read_pgm: cannot open " + path);
  std::string magic;
  f >> magic;
  check(magic == "P5", "read_pgm: not a binary PGM: " + path);
  auto next_int = [&]() {
    int v;
    f >> std::ws;
    while (f.peek() == '#') {
      std::string line;
      std::getline(f, line);
      f >> std::ws;
    }
    f >> v;
    check(f.good(), "read_pgm: bad header in " + path);
    return v;
  };
  int w = next_int(), h = next_int(), maxval = next_int();
  check(w > 0 && h > 0, "read_pgm: bad dimensions in " + path);
  check(maxval == 255, "read_pgm: expected maxval 255 in " + path);
  f.get();  // single whitespace after maxval
  PageImage img = blank_page(w, h, 0);
  f.read(reinterpret_cast<char*>(img.pixels.data()),
         static_cast<std::streamsize>(img.pixels.size()));
  check(f.gcount() == static_cast<std::streamsize>(img.pixels.size()),
        "read_pgm: truncated pixel data in " + path);
  return img;
}

}  // namespace occ
