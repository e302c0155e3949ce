// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "occ/modes.hpp"
#include "occ/rng.hpp"

using namespace occ;

namespace {

// Independent re-derivation of the documented grid rule for cross-checking.
std::pair<int, int> oracle_grid(int w, int h) {
  double target = std::log(double(w) / h);
  double best = 1e300;
  std::pair<int, int> pick{0, 0};
  for (int r = 1; r <= 9; ++r)
    for (int c = 1; c <= 9; ++c) {
      if (r * c < 2 || r * c > 9) continue;
      double err = std::abs(std::log(double(c) / r) - target);
      auto cand = std::make_tuple(err, r * c, r);
      auto cur = std::make_tuple(best, pick.first * pick.second, pick.first);
      if (pick.first == 0 || cand < cur) {
        best = err;
        pick = {r, c};
      }
    }
  return pick;
}

}  // namespace

TEST_CASE("token table matches the mode table") {
  CHECK(tokens_for_mode(ResolutionMode::Tiny, 0) == 64);
  CHECK(tokens_for_mode(ResolutionMode::Small, 0) == 100);
  CHECK(tokens_for_mode(ResolutionMode::Base, 0) == 256);
  CHECK(tokens_for_mode(ResolutionMode::Large, 0) == 400);
  CHECK(tokens_for_mode(ResolutionMode::Gundam, 4) == 656);
  CHECK(tokens_for_mode(ResolutionMode::GundamM, 3) == 1168);
  CHECK(tokens_for_mode(ResolutionMode::Gundam, 0) == 256);
  CHECK(tokens_for_mode(ResolutionMode::GundamM, 0) == 400);
  for (int n = 2; n <= 9; ++n) {
    CHECK(tokens_for_mode(ResolutionMode::Gundam, n) == n * 100 + 256);
    CHECK(tokens_for_mode(ResolutionMode::GundamM, n) == n * 256 + 400);
  }
  CHECK_THROWS_AS(tokens_for_mode(ResolutionMode::Gundam, 1), Error);
  CHECK_THROWS_AS(tokens_for_mode(ResolutionMode::Gundam, 10), Error);
  CHECK_THROWS_AS(tokens_for_mode(ResolutionMode::Base, 2), Error);
}

TEST_CASE("valid token formula") {
  CHECK(valid_tokens(256, 1000, 1000) == 256);
  CHECK(valid_tokens(256, 1024, 512) == 128);
  CHECK(valid_tokens(400, 1280, 720) == 225);
  Rng rng(31);
  for (int i = 0; i < 500; ++i) {
    int a = 1 + rng.uniform_int(0, 999);
    int w = 1 + rng.uniform_int(0, 4095);
    int h = 1 + rng.uniform_int(0, 4095);
    int v = valid_tokens(a, w, h);
    CHECK(v >= 1);
    CHECK(v <= a);
    CHECK(v == valid_tokens(a, h, w));
    if (w == h) CHECK(v == a);
  }
  // strict loss whenever the skew wipes out at least one token
  CHECK(valid_tokens(64, 2000, 1000) < 64);
  CHECK_THROWS_AS(valid_tokens(0, 10, 10), Error);
  CHECK_THROWS_AS(valid_tokens(10, 0, 10), Error);
}

TEST_CASE("native plans") {
  TilingPlan t = plan(512, 512, ResolutionMode::Tiny);
  CHECK(t.mode == ResolutionMode::Tiny);
  CHECK(t.n_tiles == 0);
  CHECK(t.resized_w == 512);
  CHECK(t.resized_h == 512);
  CHECK(t.total_tokens == 64);
  CHECK(t.valid_tokens == 64);

  TilingPlan b = plan(2048, 1024, ResolutionMode::Base);
  CHECK(b.global_view_side == 1024);
  CHECK(b.resized_w == 1024);
  CHECK(b.resized_h == 512);
  CHECK(b.total_tokens == 256);
  CHECK(b.valid_tokens == 128);

  TilingPlan l = plan(1280, 720, ResolutionMode::Large);
  CHECK(l.total_tokens == 400);
  CHECK(l.valid_tokens == 225);
  CHECK(l.resized_w == 1280);
  CHECK(l.resized_h == 720);

  // non-square input through a resize mode distorts to square, all valid
  TilingPlan s = plan(900, 300, ResolutionMode::Small);
  CHECK(s.resized_w == 640);
  CHECK(s.resized_h == 640);
  CHECK(s.valid_tokens == 100);
}

TEST_CASE("gundam degradation") {
  TilingPlan g = plan(600, 500, ResolutionMode::Gundam);
  CHECK(g.n_tiles == 0);
  CHECK(g.total_tokens == 256);
  CHECK(g == plan(600, 500, ResolutionMode::Base));

  Rng rng(7);
  for (int i = 0; i < 100; ++i) {
    int w = 1 + rng.uniform_int(0, 638);
    int h = 1 + rng.uniform_int(0, 638);
    CHECK(plan(w, h, ResolutionMode::Gundam) == plan(w, h, ResolutionMode::Base));
    if (w < 1024 && h < 1024)
      CHECK(plan(w, h, ResolutionMode::GundamM) == plan(w, h, ResolutionMode::Large));
  }
  // one large dimension keeps tiling alive
  CHECK(plan(2000, 400, ResolutionMode::Gundam).n_tiles >= 2);
}

TEST_CASE("grid selection matches the documented rule") {
  TilingPlan g = plan(2560, 1280, ResolutionMode::Gundam);
  // aspect 2.0 ties (1,2) against (2,4); smaller tile count wins
  CHECK(g.grid_rows == 1);
  CHECK(g.grid_cols == 2);
  CHECK(g.n_tiles == 2);
  CHECK(g.total_tokens == 2 * 100 + 256);
  CHECK(g.valid_tokens == 200 + 128);

  Rng rng(17);
  for (int i = 0; i < 200; ++i) {
    int w = 640 + rng.uniform_int(0, 3000);
    int h = 100 + rng.uniform_int(0, 3000);
    TilingPlan p = plan(w, h, ResolutionMode::Gundam);
    if (p.n_tiles == 0) continue;
    auto [r, c] = oracle_grid(w, h);
    CHECK(p.grid_rows == r);
    CHECK(p.grid_cols == c);
    CHECK(p.n_tiles == r * c);
  }
}

TEST_CASE("tile regions partition the resized source") {
  TilingPlan p = plan(3000, 1100, ResolutionMode::Gundam);
  REQUIRE(p.n_tiles >= 2);
  int64_t area = 0;
  for (const Rect& r : p.tile_regions) {
    CHECK(r.w == 640);
    CHECK(r.h == 640);
    area += int64_t(r.w) * r.h;
    for (const Rect& q : p.tile_regions) {
      if (&q == &r) continue;
      bool overlap = r.x < q.x + q.w && q.x < r.x + r.w && r.y < q.y + q.h && q.y < r.y + r.h;
      CHECK(!overlap);
    }
  }
  CHECK(area == int64_t(p.grid_cols * 640) * (p.grid_rows * 640));
}

TEST_CASE("crop_tiles emits square views with the global view last") {
  PageImage img = blank_page(1300, 1300, 0);
  Rng rng(5);
  for (auto& px : img.pixels) px = uint8_t(rng.uniform_index(256));

  TilingPlan p = plan(1300, 1300, ResolutionMode::Gundam);
  REQUIRE(p.grid_rows == 2);
  REQUIRE(p.grid_cols == 2);
  auto views = crop_tiles(img, p);
  REQUIRE(views.size() == 5);
  for (int i = 0; i < 4; ++i) {
    CHECK(views[size_t(i)].width_px == 640);
    CHECK(views[size_t(i)].height_px == 640);
  }
  CHECK(views[4].width_px == 1024);
  CHECK(views[4].height_px == 1024);

  // stitching the tiles reproduces the resized source bit-exactly
  PageImage resized = resize_bilinear(img, 1280, 1280);
  for (size_t t = 0; t < 4; ++t) {
    const Rect& r = p.tile_regions[t];
    for (int y = 0; y < r.h; ++y)
      for (int x = 0; x < r.w; ++x)
        if (views[t].at(x, y) != resized.at(r.x + x, r.y + y)) {
          REQUIRE(views[t].at(x, y) == resized.at(r.x + x, r.y + y));
        }
  }
}

TEST_CASE("crop_tiles native modes") {
  PageImage img = blank_page(512, 512, 0);
  Rng rng(6);
  for (auto& px : img.pixels) px = uint8_t(rng.uniform_index(256));
  auto tiny = crop_tiles(img, plan(512, 512, ResolutionMode::Tiny));
  REQUIRE(tiny.size() == 1);
  CHECK(tiny[0].pixels == img.pixels);  // exact native size, resize is a no-op

  PageImage wide = blank_page(1024, 512, 0);
  for (auto& px : wide.pixels) px = uint8_t(rng.uniform_index(256));
  auto base = crop_tiles(wide, plan(1024, 512, ResolutionMode::Base));
  REQUIRE(base.size() == 1);
  CHECK(base[0].width_px == 1024);
  CHECK(base[0].height_px == 1024);
  for (int x = 0; x < 1024; ++x) {
    CHECK(base[0].at(x, 0) == 255);    // pad above
    CHECK(base[0].at(x, 1023) == 255); // pad below
    CHECK(base[0].at(x, 256) == wide.at(x, 0));
    CHECK(base[0].at(x, 767) == wide.at(x, 511));
  }

  auto degraded = crop_tiles(wide, plan(1024, 512, ResolutionMode::Gundam));
  REQUIRE(degraded.size() >= 1);

  PageImage tiny_src = blank_page(600, 500, 0);
  auto deg = crop_tiles(tiny_src, plan(600, 500, ResolutionMode::Gundam));
  REQUIRE(deg.size() == 1);
  CHECK(deg[0].width_px == 1024);

  CHECK_THROWS_AS(crop_tiles(img, plan(100, 100, ResolutionMode::Tiny)), Error);
}

TEST_CASE("mode names round trip") {
  for (auto m : {ResolutionMode::Tiny, ResolutionMode::Small, ResolutionMode::Base,
                 ResolutionMode::Large, ResolutionMode::Gundam, ResolutionMode::GundamM})
    CHECK(mode_from_string(to_string(m)) == m);
  CHECK_THROWS_AS(mode_from_string("Huge"), Error);
}
