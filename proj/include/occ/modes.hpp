// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "occ/raster.hpp"

namespace occ {

enum class ResolutionMode { Tiny, Small, Base, Large, Gundam, GundamM };

std::string to_string(ResolutionMode mode);
ResolutionMode mode_from_string(const std::string& name);

bool is_dynamic(ResolutionMode mode);

/// Square view side in pixels: the native side for native modes, the local
/// tile side for dynamic modes.
int native_side(ResolutionMode mode);

/// Global-view side for dynamic modes; equals native_side for native modes.
int global_side(ResolutionMode mode);

/// Latent tokens produced by one square view: (side/16)^2 / 16.
int tokens_for_side(int side);

/// Total latent tokens for a mode. n_tiles must be 0 for native modes;
/// 0 (degraded) or 2..9 for dynamic modes.
int tokens_for_mode(ResolutionMode mode, int n_tiles);

/// Eq. 1 accounting: ceil(actual * min(w,h) / max(w,h)).
int valid_tokens(int actual_tokens, int w, int h);

struct Rect {
  int x = 0, y = 0, w = 0, h = 0;
  bool operator==(const Rect&) const = default;
};

struct TilingPlan {
  ResolutionMode mode = ResolutionMode::Tiny;  // effective mode after degradation
  int n_tiles = 0;                             // 0 or 2..9
  int grid_rows = 0;
  int grid_cols = 0;
  std::vector<Rect> tile_regions;  // row-major, in the resized source
  int global_view_side = 0;
  int resized_w = 0;  // content dims of the global/primary view before padding
  int resized_h = 0;
  int total_tokens = 0;
  int valid_tokens = 0;
  int src_w = 0;
  int src_h = 0;
  bool operator==(const TilingPlan&) const = default;
};

TilingPlan plan(int w, int h, ResolutionMode mode);

/// Materializes the model-input views for a plan: local tiles in row-major
/// order (dynamic modes), then the global/primary view last. Every view is
/// square.
std::vector<PageImage> crop_tiles(const PageImage& img, const TilingPlan& plan);

}  // namespace occ
