// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>

#include "occ/decoder.hpp"
#include "occ/encoder.hpp"
#include "occ/nn/core.hpp"

namespace occ {

struct TrainMeta {
  int64_t step = 0;
  uint64_t seed = 0;
  int64_t tokens_seen = 0;
};

// Header info readable without the parameter payload; used to rebuild the
// models before loading weights.
struct CheckpointInfo {
  EncoderConfig enc;
  DecoderConfig dec;
  TrainMeta meta;
  bool has_opt = false;
};

/// Binary container: 8-byte magic, u64 little-endian header length, JSON
/// header, then raw float32 tensor payloads in header order. Optimizer
/// moments, when present, follow in the same order (m then v per tensor).
void save_checkpoint(const std::string& path, const EncoderConfig& enc, const DecoderConfig& dec,
                     const nn::ParamStore<float>& ps, const TrainMeta& meta,
                     const nn::AdamW<float>* opt = nullptr);

CheckpointInfo peek_checkpoint(const std::string& path);

/// Fills an already-constructed store. Tensor names and shapes must match the
/// file exactly. `opt` must have been constructed against `ps` when given.
CheckpointInfo load_checkpoint(const std::string& path, nn::ParamStore<float>& ps,
                               nn::AdamW<float>* opt = nullptr);

}  // namespace occ
