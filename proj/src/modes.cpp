// SPDX-License-Identifier: Apache-2.0
#include "occ/modes.hpp"

#include <cmath>

namespace occ {

std::string to_string(ResolutionMode mode) {
  switch (mode) {
    case ResolutionMode::Tiny: return "Tiny";
    case ResolutionMode::Small: return "Small";
    case ResolutionMode::Base: return "Base";
    case ResolutionMode::Large: return "Large";
    case ResolutionMode::Gundam: return "Gundam";
    case ResolutionMode::GundamM: return "GundamM";
  }
  fail("bad ResolutionMode");
}

ResolutionMode mode_from_string(const std::string& name) {
  if (name == "Tiny") return ResolutionMode::Tiny;
  if (name == "Small") return ResolutionMode::Small;
  if (name == "Base") return ResolutionMode::Base;
  if (name == "Large") return ResolutionMode::Large;
  if (name == "Gundam") return ResolutionMode::Gundam;
  if (name == "GundamM") return ResolutionMode::GundamM;
  fail("unknown resolution mode '" + name + "'");
}

bool is_dynamic(ResolutionMode mode) {
  return mode == ResolutionMode::Gundam || mode == ResolutionMode::GundamM;
}

int native_side(ResolutionMode mode) {
  switch (mode) {
    case ResolutionMode::Tiny: return 512;
    case ResolutionMode::Small: return 640;
    case ResolutionMode::Base: return 1024;
    case ResolutionMode::Large: return 1280;
    case ResolutionMode::Gundam: return 640;
    case ResolutionMode::GundamM: return 1024;
  }
  fail("bad ResolutionMode");
}

int global_side(ResolutionMode mode) {
  switch (mode) {
    case ResolutionMode::Gundam: return 1024;
    case ResolutionMode::GundamM: return 1280;
    default: return native_side(mode);
  }
}

int tokens_for_side(int side) {
  check(side > 0 && side % 16 == 0, "tokens_for_side: side must be a positive multiple of 16");
  int grid = side / 16;
  check((grid * grid) % 16 == 0, "tokens_for_side: patch grid not divisible by 16");
  return grid * grid / 16;
}

int tokens_for_mode(ResolutionMode mode, int n_tiles) {
  if (!is_dynamic(mode)) {
    check(n_tiles == 0, "tokens_for_mode: native modes take n_tiles == 0");
    return tokens_for_side(native_side(mode));
  }
  check(n_tiles == 0 || (n_tiles >= 2 && n_tiles <= 9),
        "tokens_for_mode: n_tiles must be 0 or within 2..9");
  return n_tiles * tokens_for_side(native_side(mode)) + tokens_for_side(global_side(mode));
}

int valid_tokens(int actual_tokens, int w, int h) {
  check(actual_tokens > 0 && w > 0 && h > 0, "valid_tokens: arguments must be positive");
  int64_t lo = std::min(w, h), hi = std::max(w, h);
  int64_t a = actual_tokens;
  return static_cast<int>((a * lo + hi - 1) / hi);
}

namespace {

// Longest side maps to `side` exactly; the short side rounds half-up.
void resize_longest_dims(int w, int h, int side, int& out_w, int& out_h) {
  int64_t hi = std::max(w, h), lo = std::min(w, h);
  int short_side = static_cast<int>((2 * lo * side + hi) / (2 * hi));
  if (short_side < 1) short_side = 1;
  if (w >= h) {
    out_w = side;
    out_h = short_side;
  } else {
    out_w = short_side;
    out_h = side;
  }
}

TilingPlan plan_native(int w, int h, ResolutionMode mode) {
  TilingPlan p;
  p.mode = mode;
  p.src_w = w;
  p.src_h = h;
  p.global_view_side = native_side(mode);
  p.total_tokens = tokens_for_side(p.global_view_side);
  bool padded = mode == ResolutionMode::Base || mode == ResolutionMode::Large;
  if (padded) {
    resize_longest_dims(w, h, p.global_view_side, p.resized_w, p.resized_h);
    p.valid_tokens = valid_tokens(p.total_tokens, w, h);
  } else {
    p.resized_w = p.resized_h = p.global_view_side;
    p.valid_tokens = p.total_tokens;
  }
  return p;
}

// Grid choice: minimize |log(cols/rows) - log(w/h)|, tie-break by smaller
// rows*cols, then smaller rows.
void choose_grid(int w, int h, int& best_rows, int& best_cols) {
  double target = std::log(static_cast<double>(w) / h);
  double best_err = 0;
  best_rows = best_cols = 0;
  for (int rows = 1; rows <= 9; ++rows) {
    for (int cols = 1; cols <= 9; ++cols) {
      int n = rows * cols;
      if (n < 2 || n > 9) continue;
      double err = std::abs(std::log(static_cast<double>(cols) / rows) - target);
      bool better = best_rows == 0 || err < best_err ||
                    (err == best_err && (n < best_rows * best_cols ||
                                         (n == best_rows * best_cols && rows < best_rows)));
      if (better) {
        best_err = err;
        best_rows = rows;
        best_cols = cols;
      }
    }
  }
}

}  // namespace

TilingPlan plan(int w, int h, ResolutionMode mode) {
  check(w > 0 && h > 0, "plan: image dims must be positive");
  if (!is_dynamic(mode)) return plan_native(w, h, mode);

  int tile = native_side(mode);
  if (w < tile && h < tile) {
    ResolutionMode fallback =
        mode == ResolutionMode::Gundam ? ResolutionMode::Base : ResolutionMode::Large;
    return plan_native(w, h, fallback);
  }

  TilingPlan p;
  p.mode = mode;
  p.src_w = w;
  p.src_h = h;
  choose_grid(w, h, p.grid_rows, p.grid_cols);
  p.n_tiles = p.grid_rows * p.grid_cols;
  p.tile_regions.reserve(static_cast<size_t>(p.n_tiles));
  for (int r = 0; r < p.grid_rows; ++r)
    for (int c = 0; c < p.grid_cols; ++c)
      p.tile_regions.push_back({c * tile, r * tile, tile, tile});
  p.global_view_side = global_side(mode);
  resize_longest_dims(w, h, p.global_view_side, p.resized_w, p.resized_h);
  p.total_tokens = tokens_for_mode(mode, p.n_tiles);
  p.valid_tokens = p.n_tiles * tokens_for_side(tile) +
                   valid_tokens(tokens_for_side(p.global_view_side), w, h);
  return p;
}

std::vector<PageImage> crop_tiles(const PageImage& img, const TilingPlan& plan) {
  check(img.width_px == plan.src_w && img.height_px == plan.src_h,
        "crop_tiles: image dims do not match plan");
  std::vector<PageImage> views;
  if (plan.n_tiles > 0) {
    int tile = native_side(plan.mode);
    PageImage resized = resize_bilinear(img, plan.grid_cols * tile, plan.grid_rows * tile);
    for (const Rect& r : plan.tile_regions) {
      PageImage t = blank_page(r.w, r.h, 0);
      t.span_begin = img.span_begin;
      t.span_end = img.span_end;
      for (int y = 0; y < r.h; ++y)
        for (int x = 0; x < r.w; ++x) t.at(x, y) = resized.at(r.x + x, r.y + y);
      views.push_back(std::move(t));
    }
  }
  bool padded = plan.mode == ResolutionMode::Base || plan.mode == ResolutionMode::Large ||
                plan.n_tiles > 0;
  if (padded) {
    PageImage content = resize_bilinear(img, plan.resized_w, plan.resized_h);
    views.push_back(pad_to_square(content, plan.global_view_side, 255).img);
  } else {
    views.push_back(resize_bilinear(img, plan.global_view_side, plan.global_view_side));
  }
  return views;
}

}  // namespace occ
