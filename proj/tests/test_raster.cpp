// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>

#include "occ/font8x16.hpp"
#include "occ/raster.hpp"
#include "occ/rng.hpp"

using namespace occ;

namespace {

PageSpec small_spec() {
  PageSpec s;
  s.width_px = 128;
  s.height_px = 96;
  s.margin_px = 4;
  return s;  // cols 15, rows 5, capacity 75
}

}  // namespace

TEST_CASE("empty text renders one background page") {
  PageSpec spec = small_spec();
  auto pages = render("", spec);
  REQUIRE(pages.size() == 1);
  CHECK(pages[0].width_px == 128);
  CHECK(pages[0].height_px == 96);
  for (uint8_t p : pages[0].pixels) CHECK(p == spec.background);
  CHECK(pages[0].span_begin == 0);
  CHECK(pages[0].span_end == 0);
}

TEST_CASE("single glyph lands in cell (0,0) and matches the font table") {
  PageSpec spec = small_spec();
  auto pages = render("A", spec);
  REQUIRE(pages.size() == 1);
  const uint8_t* bits = glyph_bitmap('A');
  for (int y = 0; y < spec.height_px; ++y) {
    for (int x = 0; x < spec.width_px; ++x) {
      int fx = x - spec.margin_px, fy = y - spec.margin_px;
      bool inked = fx >= 0 && fx < 8 && fy >= 0 && fy < 16 && (bits[fy] & (0x80u >> fx));
      CHECK(pages[0].at(x, y) == (inked ? spec.foreground : spec.background));
    }
  }
}

TEST_CASE("page count follows capacity") {
  PageSpec spec = small_spec();
  int cap = spec.capacity();
  REQUIRE(cap == 75);
  std::string text(static_cast<size_t>(cap * 5 / 2), 'x');  // 2.5 pages
  auto pages = render(text, spec);
  REQUIRE(pages.size() == 3);
  CHECK(pages[0].span_begin == 0);
  CHECK(pages[0].span_end == 75);
  CHECK(pages[1].span_begin == 75);
  CHECK(pages[2].span_end == static_cast<int64_t>(text.size()));
  // last page is partially filled: its lower rows stay background
  bool any_ink_top = false;
  for (int x = 0; x < spec.width_px; ++x)
    if (pages[2].at(x, spec.margin_px + 8) != spec.background) any_ink_top = true;
  CHECK(any_ink_top);
  for (int y = spec.margin_px + 3 * 16; y < spec.height_px; ++y)
    for (int x = 0; x < spec.width_px; ++x) CHECK(pages[2].at(x, y) == spec.background);
}

TEST_CASE("newline consumes a cell and draws nothing") {
  PageSpec spec = small_spec();
  auto pages = render("a\nb", spec);
  REQUIRE(pages.size() == 1);
  // cell 1 (the newline) stays blank, 'b' is in cell 2
  int x0 = spec.margin_px + spec.glyph_w, y0 = spec.margin_px;
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 8; ++x) CHECK(pages[0].at(x0 + x, y0 + y) == spec.background);
  const uint8_t* bits = glyph_bitmap('b');
  bool match = true;
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 8; ++x) {
      bool inked = bits[y] & (0x80u >> x);
      if (pages[0].at(spec.margin_px + 2 * 8 + x, y0 + y) !=
          (inked ? spec.foreground : spec.background))
        match = false;
    }
  CHECK(match);
}

TEST_CASE("unsupported codepoint is rejected by name") {
  PageSpec spec = small_spec();
  CHECK_THROWS_WITH_AS(render("a\tb", spec), doctest::Contains("codepoint 9"), Error);
}

TEST_CASE("glyph scaling doubles pixels in blocks") {
  PageSpec spec = small_spec();
  spec.glyph_w = 16;
  spec.glyph_h = 32;
  auto pages = render("H", spec);
  const uint8_t* bits = glyph_bitmap('H');
  for (int fy = 0; fy < 16; ++fy)
    for (int fx = 0; fx < 8; ++fx) {
      bool inked = bits[fy] & (0x80u >> fx);
      for (int dy = 0; dy < 2; ++dy)
        for (int dx = 0; dx < 2; ++dx)
          CHECK(pages[0].at(spec.margin_px + 2 * fx + dx, spec.margin_px + 2 * fy + dy) ==
                (inked ? spec.foreground : spec.background));
    }
}

TEST_CASE("rendering is deterministic") {
  PageSpec spec;
  auto a = render("the quick brown fox\njumps over it", spec);
  auto b = render("the quick brown fox\njumps over it", spec);
  REQUIRE(a.size() == b.size());
  CHECK(a[0].pixels == b[0].pixels);
}

TEST_CASE("downsample") {
  PageImage img = blank_page(2, 2, 0);
  img.at(0, 1) = 255;
  img.at(1, 1) = 255;
  PageImage one = downsample(img, 2);
  REQUIRE(one.width_px == 1);
  REQUIRE(one.height_px == 1);
  CHECK(one.at(0, 0) == 128);  // mean 127.5 rounds half-up

  PageImage same = downsample(img, 1);
  CHECK(same.pixels == img.pixels);

  PageImage flat = blank_page(8, 8, 77);
  for (int f : {1, 2, 4, 8}) {
    PageImage d = downsample(flat, f);
    for (uint8_t p : d.pixels) CHECK(p == 77);
  }
  CHECK_THROWS_AS(downsample(flat, 3), Error);
}

TEST_CASE("downsample composes within rounding slack") {
  Rng rng(99);
  PageImage img = blank_page(16, 16, 0);
  for (auto& p : img.pixels) p = static_cast<uint8_t>(rng.uniform_index(256));
  PageImage ab = downsample(downsample(img, 2), 2);
  PageImage c = downsample(img, 4);
  REQUIRE(ab.pixels.size() == c.pixels.size());
  for (size_t i = 0; i < c.pixels.size(); ++i)
    CHECK(std::abs(int(ab.pixels[i]) - int(c.pixels[i])) <= 1);
}

TEST_CASE("resize_bilinear") {
  PageImage img = blank_page(2, 1, 0);
  img.at(1, 0) = 255;
  PageImage r = resize_bilinear(img, 3, 1);
  REQUIRE(r.width_px == 3);
  CHECK(r.at(0, 0) == 0);
  CHECK(r.at(1, 0) == 128);
  CHECK(r.at(2, 0) == 255);

  PageImage flat = blank_page(5, 7, 200);
  PageImage rf = resize_bilinear(flat, 11, 3);
  for (uint8_t p : rf.pixels) CHECK(p == 200);

  PageImage same = resize_bilinear(img, 2, 1);
  CHECK(same.pixels == img.pixels);
}

TEST_CASE("pad_to_square") {
  PageImage img = blank_page(4, 2, 10);
  PaddedImage p = pad_to_square(img, 4, 99);
  CHECK(p.orig_w == 4);
  CHECK(p.orig_h == 2);
  CHECK(p.off_x == 0);
  CHECK(p.off_y == 1);
  int fills = 0, content = 0;
  for (uint8_t v : p.img.pixels) (v == 99 ? fills : content)++;
  CHECK(fills == 4 * 4 - 4 * 2);
  CHECK(content == 8);
  for (int x = 0; x < 4; ++x) {
    CHECK(p.img.at(x, 1) == 10);
    CHECK(p.img.at(x, 2) == 10);
  }

  PageImage sq = blank_page(4, 4, 7);
  PaddedImage q = pad_to_square(sq, 4, 0);
  CHECK(q.img.pixels == sq.pixels);
  CHECK_THROWS_AS(pad_to_square(blank_page(5, 2, 0), 4, 0), Error);
}

TEST_CASE("pgm round trip") {
  PageSpec spec = small_spec();
  auto pages = render("pgm round trip!", spec);
  std::string path = "test_raster_tmp.pgm";
  write_pgm(path, pages[0]);
  PageImage back = read_pgm(path);
  CHECK(back.width_px == pages[0].width_px);
  CHECK(back.height_px == pages[0].height_px);
  CHECK(back.pixels == pages[0].pixels);
  std::remove(path.c_str());
}

TEST_CASE("default page spec capacity") {
  PageSpec spec;
  validate(spec);
  CHECK(spec.cols() == 124);
  CHECK(spec.rows() == 62);
  CHECK(spec.capacity() == 7688);
}

TEST_CASE("bad specs are rejected") {
  PageSpec s;
  s.glyph_w = 12;
  CHECK_THROWS_AS(validate(s), Error);
  PageSpec t;
  t.margin_px = 1000;
  CHECK_THROWS_AS(validate(t), Error);
}
