// SPDX-License-Identifier: Apache-2.0
#include "occ/checkpoint.hpp"

#include <fstream>
#include <json.hpp>
#include <vector>

namespace occ {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'O', 'C', 'C', 'K', 'P', 'T', '0', '1'};

json enc_to_json(const EncoderConfig& c) {
  return {{"patch", c.patch},
          {"d_window", c.d_window},
          {"d_global", c.d_global},
          {"d_latent", c.d_latent},
          {"window_size", c.window_size},
          {"n_window_layers", c.n_window_layers},
          {"n_global_layers", c.n_global_layers},
          {"n_heads_window", c.n_heads_window},
          {"n_heads_global", c.n_heads_global},
          {"pos_patch_side", c.pos_patch_side},
          {"pos_global_side", c.pos_global_side},
          {"max_global_tokens", c.max_global_tokens}};
}

EncoderConfig enc_from_json(const json& j) {
  EncoderConfig c;
  c.patch = j.at("patch");
  c.d_window = j.at("d_window");
  c.d_global = j.at("d_global");
  c.d_latent = j.at("d_latent");
  c.window_size = j.at("window_size");
  c.n_window_layers = j.at("n_window_layers");
  c.n_global_layers = j.at("n_global_layers");
  c.n_heads_window = j.at("n_heads_window");
  c.n_heads_global = j.at("n_heads_global");
  c.pos_patch_side = j.at("pos_patch_side");
  c.pos_global_side = j.at("pos_global_side");
  c.max_global_tokens = j.at("max_global_tokens");
  return c;
}

json dec_to_json(const DecoderConfig& c) {
  return {{"d_model", c.d_model},
          {"n_layers", c.n_layers},
          {"n_heads", c.n_heads},
          {"n_routed_experts", c.n_routed_experts},
          {"n_shared_experts", c.n_shared_experts},
          {"top_k", c.top_k},
          {"expert_hidden", c.expert_hidden},
          {"shared_expert_hidden", c.shared_expert_hidden},
          {"vocab", c.vocab},
          {"max_seq", c.max_seq},
          {"d_latent", c.d_latent}};
}

DecoderConfig dec_from_json(const json& j) {
  DecoderConfig c;
  c.d_model = j.at("d_model");
  c.n_layers = j.at("n_layers");
  c.n_heads = j.at("n_heads");
  c.n_routed_experts = j.at("n_routed_experts");
  c.n_shared_experts = j.at("n_shared_experts");
  c.top_k = j.at("top_k");
  c.expert_hidden = j.at("expert_hidden");
  c.shared_expert_hidden = j.at("shared_expert_hidden");
  c.vocab = j.at("vocab");
  c.max_seq = j.at("max_seq");
  c.d_latent = j.at("d_latent");
  return c;
}

void write_mat(std::ofstream& f, const nn::Mat<float>& m) {
  f.write(reinterpret_cast<const char*>(m.data()),
          static_cast<std::streamsize>(sizeof(float) * static_cast<size_t>(m.size())));
}

void read_mat(std::ifstream& f, nn::Mat<float>& m) {
  f.read(reinterpret_cast<char*>(m.data()),
         static_cast<std::streamsize>(sizeof(float) * static_cast<size_t>(m.size())));
  check(f.good(), "checkpoint: truncated payload");
}

json read_header(std::ifstream& f, const std::string& path) {
  check(f.is_open(), "checkpoint: cannot open " + path);
  char magic[8];
  f.read(magic, 8);
  check(f.good() && std::equal(magic, magic + 8, kMagic), "checkpoint: bad magic in " + path);
  uint64_t hlen = 0;
  f.read(reinterpret_cast<char*>(&hlen), 8);
  check(f.good() && hlen > 0 && hlen < (64u << 20), "checkpoint: bad header length");
  std::string hdr(hlen, '\0');
  f.read(hdr.data(), static_cast<std::streamsize>(hlen));
  check(f.good(), "checkpoint: truncated header");
  return json::parse(hdr);
}

CheckpointInfo info_from_header(const json& h) {
  CheckpointInfo info;
  check(h.at("format") == 1, "checkpoint: unsupported format version");
  info.enc = enc_from_json(h.at("encoder"));
  info.dec = dec_from_json(h.at("decoder"));
  info.meta.step = h.at("train").at("step");
  info.meta.seed = h.at("train").at("seed");
  info.meta.tokens_seen = h.at("train").at("tokens_seen");
  info.has_opt = h.contains("opt");
  return info;
}

}  // namespace

void save_checkpoint(const std::string& path, const EncoderConfig& enc, const DecoderConfig& dec,
                     const nn::ParamStore<float>& ps, const TrainMeta& meta,
                     const nn::AdamW<float>* opt) {
  json h;
  h["format"] = 1;
  h["encoder"] = enc_to_json(enc);
  h["decoder"] = dec_to_json(dec);
  h["train"] = {{"step", meta.step}, {"seed", meta.seed}, {"tokens_seen", meta.tokens_seen}};
  json tensors = json::array();
  int64_t offset = 0;
  for (const auto& t : ps.tensors()) {
    tensors.push_back(
        {{"name", t->name}, {"rows", t->v.rows()}, {"cols", t->v.cols()}, {"offset", offset}});
    offset += static_cast<int64_t>(sizeof(float)) * t->v.size();
  }
  h["tensors"] = std::move(tensors);
  if (opt) h["opt"] = {{"step", opt->step_count()}};

  std::string hdr = h.dump();
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  check(f.is_open(), "checkpoint: cannot write " + path);
  f.write(kMagic, 8);
  uint64_t hlen = hdr.size();
  f.write(reinterpret_cast<const char*>(&hlen), 8);
  f.write(hdr.data(), static_cast<std::streamsize>(hdr.size()));
  for (const auto& t : ps.tensors()) write_mat(f, t->v);
  if (opt) {
    check(opt->states().size() == ps.tensors().size(), "checkpoint: optimizer shape mismatch");
    for (const auto& s : opt->states()) {
      write_mat(f, s.m);
      write_mat(f, s.v);
    }
  }
  check(f.good(), "checkpoint: write failed for " + path);
}

CheckpointInfo peek_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  return info_from_header(read_header(f, path));
}

CheckpointInfo load_checkpoint(const std::string& path, nn::ParamStore<float>& ps,
                               nn::AdamW<float>* opt) {
  std::ifstream f(path, std::ios::binary);
  json h = read_header(f, path);
  CheckpointInfo info = info_from_header(h);

  const json& tensors = h.at("tensors");
  check(tensors.size() == ps.tensors().size(), "checkpoint: tensor count mismatch");
  for (size_t i = 0; i < ps.tensors().size(); ++i) {
    nn::Tensor<float>& t = *ps.tensors()[i];
    const json& e = tensors.at(i);
    check(e.at("name") == t.name, "checkpoint: tensor name mismatch at " + t.name);
    check(e.at("rows") == t.v.rows() && e.at("cols") == t.v.cols(),
          "checkpoint: shape mismatch for " + t.name);
    read_mat(f, t.v);
  }
  if (opt) {
    check(info.has_opt, "checkpoint: no optimizer state in " + path);
    check(opt->states().size() == ps.tensors().size(), "checkpoint: optimizer shape mismatch");
    for (auto& s : opt->states()) {
      read_mat(f, s.m);
      read_mat(f, s.v);
    }
    opt->set_step_count(h.at("opt").at("step"));
  }
  return info;
}

}  // namespace occ
