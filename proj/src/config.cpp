// SPDX-License-Identifier: Apache-2.0
#include "occ/config.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

namespace occ {

using nlohmann::json;

namespace {

json corpus_to_json(const CorpusConfig& c) {
  return {{"target_tokens", c.target_tokens},
          {"line_min", c.line_min},
          {"line_max", c.line_max},
          {"vocabulary", c.vocabulary}};
}

CorpusConfig corpus_from_json(const json& j) {
  CorpusConfig c;
  c.target_tokens = j.at("target_tokens");
  c.line_min = j.at("line_min");
  c.line_max = j.at("line_max");
  c.vocabulary = j.at("vocabulary");
  return c;
}

json page_to_json(const PageSpec& p) {
  return {{"width_px", p.width_px},   {"height_px", p.height_px}, {"glyph_w", p.glyph_w},
          {"glyph_h", p.glyph_h},     {"margin_px", p.margin_px}, {"foreground", p.foreground},
          {"background", p.background}};
}

PageSpec page_from_json(const json& j) {
  PageSpec p;
  p.width_px = j.at("width_px");
  p.height_px = j.at("height_px");
  p.glyph_w = j.at("glyph_w");
  p.glyph_h = j.at("glyph_h");
  p.margin_px = j.at("margin_px");
  p.foreground = j.at("foreground");
  p.background = j.at("background");
  return p;
}

json encoder_to_json(const EncoderConfig& c) {
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

EncoderConfig encoder_from_json(const json& j) {
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

json decoder_to_json(const DecoderConfig& c) {
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

DecoderConfig decoder_from_json(const json& j) {
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

json curriculum_entry_to_json(const CurriculumEntry& e) {
  return {{"mode", to_string(e.mode)}, {"n_tokens", e.n_tokens}, {"weight", e.weight}};
}

CurriculumEntry curriculum_entry_from_json(const json& j) {
  CurriculumEntry e;
  e.mode = mode_from_string(j.at("mode").get<std::string>());
  e.n_tokens = j.at("n_tokens");
  e.weight = j.at("weight");
  return e;
}

json train_to_json(const TrainConfig& c) {
  json cur = json::array();
  for (const auto& e : c.curriculum) cur.push_back(curriculum_entry_to_json(e));
  return {{"steps", c.steps},
          {"batch", c.batch},
          {"lr", c.lr},
          {"warmup_steps", c.warmup_steps},
          {"schedule", c.schedule},
          {"min_lr_frac", c.min_lr_frac},
          {"clip_norm", c.clip_norm},
          {"weight_decay", c.weight_decay},
          {"length_jitter", c.length_jitter},
          {"vocabulary", c.vocabulary},
          {"log_every", c.log_every},
          {"ckpt_every", c.ckpt_every},
          {"fixed_pool", c.fixed_pool},
          {"out_dir", c.out_dir},
          {"curriculum", std::move(cur)}};
}

TrainConfig train_from_json(const json& j) {
  TrainConfig c;
  c.steps = j.at("steps");
  c.batch = j.at("batch");
  c.lr = j.at("lr");
  c.warmup_steps = j.at("warmup_steps");
  c.schedule = j.at("schedule");
  c.min_lr_frac = j.at("min_lr_frac");
  c.clip_norm = j.at("clip_norm");
  c.weight_decay = j.at("weight_decay");
  c.length_jitter = j.at("length_jitter");
  c.vocabulary = j.at("vocabulary");
  c.log_every = j.at("log_every");
  c.ckpt_every = j.at("ckpt_every");
  c.fixed_pool = j.at("fixed_pool");
  c.out_dir = j.at("out_dir");
  c.curriculum.clear();
  for (const auto& e : j.at("curriculum")) c.curriculum.push_back(curriculum_entry_from_json(e));
  return c;
}

json eval_to_json(const EvalConfig& c) {
  return {{"docs_per_bucket", c.docs_per_bucket}, {"vocabulary", c.vocabulary},
          {"buckets", c.buckets},                 {"decoder", c.decoder},
          {"checkpoint", c.checkpoint},           {"dump_worst", c.dump_worst}};
}

EvalConfig eval_from_json(const json& j) {
  EvalConfig c;
  c.docs_per_bucket = j.at("docs_per_bucket");
  c.vocabulary = j.at("vocabulary");
  c.buckets = j.at("buckets");
  c.decoder = j.at("decoder");
  c.checkpoint = j.at("checkpoint");
  c.dump_worst = j.at("dump_worst");
  return c;
}

json stage_to_json(const DecayStage& s) {
  return {{"age_min", s.age_min}, {"mode", to_string(s.mode)}, {"factor", s.factor}};
}

DecayStage stage_from_json(const json& j) {
  DecayStage s;
  s.age_min = j.at("age_min");
  s.mode = mode_from_string(j.at("mode").get<std::string>());
  s.factor = j.at("factor");
  return s;
}

json decay_to_json(const DecayConfig& c) {
  json stages = json::array();
  for (const auto& s : c.stages) stages.push_back(stage_to_json(s));
  return {{"keep_text_rounds", c.keep_text_rounds},
          {"discard_terminal", c.discard_terminal},
          {"stages", std::move(stages)},
          {"curve_csv", c.curve_csv},
          {"rounds", c.rounds},
          {"tokens_per_round", c.tokens_per_round}};
}

DecayConfig decay_from_json(const json& j) {
  DecayConfig c;
  c.keep_text_rounds = j.at("keep_text_rounds");
  c.discard_terminal = j.at("discard_terminal");
  c.stages.clear();
  for (const auto& s : j.at("stages")) c.stages.push_back(stage_from_json(s));
  c.curve_csv = j.at("curve_csv");
  c.rounds = j.at("rounds");
  c.tokens_per_round = j.at("tokens_per_round");
  return c;
}

json config_to_json(const GlobalConfig& c) {
  return {{"seed", c.seed},       {"corpus", corpus_to_json(c.corpus)},
          {"page", page_to_json(c.page)},       {"encoder", encoder_to_json(c.encoder)},
          {"decoder", decoder_to_json(c.decoder)}, {"train", train_to_json(c.train)},
          {"eval", eval_to_json(c.eval)},       {"decay", decay_to_json(c.decay)}};
}

GlobalConfig config_from_json(const json& j) {
  GlobalConfig c;
  c.seed = j.at("seed");
  c.corpus = corpus_from_json(j.at("corpus"));
  c.page = page_from_json(j.at("page"));
  c.encoder = encoder_from_json(j.at("encoder"));
  c.decoder = decoder_from_json(j.at("decoder"));
  c.train = train_from_json(j.at("train"));
  c.eval = eval_from_json(j.at("eval"));
  c.decay = decay_from_json(j.at("decay"));
  c.train.seed = c.seed;
  return c;
}

// Schema with one prototype element per typed array so user-supplied array
// entries get their keys checked too.
json schema_json() {
  GlobalConfig c;
  c.train.curriculum = {{ResolutionMode::Tiny, 128, 1.0}};
  if (c.decay.stages.empty()) c.decay.stages = {{0, ResolutionMode::Base, 1}};
  return config_to_json(c);
}

void validate_keys(const json& input, const json& schema, const std::string& path) {
  if (input.is_object()) {
    check(schema.is_object(), "config: expected a scalar at " + (path.empty() ? "/" : path));
    for (auto it = input.begin(); it != input.end(); ++it) {
      if (!schema.contains(it.key())) fail("config: unknown key at " + path + "/" + it.key());
      validate_keys(it.value(), schema.at(it.key()), path + "/" + it.key());
    }
  } else if (input.is_array() && schema.is_array() && !schema.empty()) {
    for (size_t i = 0; i < input.size(); ++i)
      validate_keys(input.at(i), schema.at(0), path + "/" + std::to_string(i));
  }
}

}  // namespace

GlobalConfig parse_config(const std::string& text) {
  json input;
  try {
    input = json::parse(text, nullptr, /*allow_exceptions=*/true, /*ignore_comments=*/true);
  } catch (const json::exception& e) {
    fail(std::string("config: ") + e.what());
  }
  check(input.is_object(), "config: top level must be an object");
  validate_keys(input, schema_json(), "");
  json merged = config_to_json(GlobalConfig{});
  merged.merge_patch(input);
  try {
    return config_from_json(merged);
  } catch (const json::exception& e) {
    fail(std::string("config: ") + e.what());
  }
}

GlobalConfig load_config(const std::string& path) {
  std::ifstream f(path);
  check(f.is_open(), "config: cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const GlobalConfig& cfg) {
  return config_to_json(cfg).dump(2) + "\n";
}

}  // namespace occ
