// SPDX-License-Identifier: Apache-2.0
//
// occ: render text pages, plan tilings, train, evaluate, and simulate
// memory decay, all from one shared config file.

#include <CLI11.hpp>
#include <Eigen/Core>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>

#include "occ/checkpoint.hpp"
#include "occ/config.hpp"
#include "occ/decay.hpp"
#include "occ/decoder.hpp"
#include "occ/encoder.hpp"
#include "occ/evalharness.hpp"
#include "occ/modes.hpp"
#include "occ/raster.hpp"
#include "occ/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int cmd_render(const occ::GlobalConfig& cfg, const std::string& text_file,
               const std::string& out_dir) {
  std::ifstream f(text_file, std::ios::binary);
  occ::check(f.is_open(), "render: cannot open " + text_file);
  std::stringstream ss;
  ss << f.rdbuf();
  std::string text = ss.str();

  std::vector<occ::PageImage> pages = occ::render(text, cfg.page);
  fs::create_directories(out_dir);

  json manifest;
  manifest["source"] = text_file;
  manifest["chars"] = text.size();
  manifest["capacity"] = cfg.page.capacity();
  manifest["pages"] = json::array();
  char name[32];
  for (size_t p = 0; p < pages.size(); ++p) {
    std::snprintf(name, sizeof(name), "page_%04zu.pgm", p);
    occ::write_pgm((fs::path(out_dir) / name).string(), pages[p]);
    manifest["pages"].push_back({{"file", name},
                                 {"span_begin", pages[p].span_begin},
                                 {"span_end", pages[p].span_end}});
  }
  std::ofstream mf(fs::path(out_dir) / "manifest.json");
  mf << manifest.dump(2) << "\n";
  std::printf("rendered %zu page(s) of %zu chars (capacity %d/page) to %s\n", pages.size(),
              text.size(), cfg.page.capacity(), out_dir.c_str());
  return 0;
}

int cmd_plan(int width, int height, const std::string& mode_name) {
  occ::ResolutionMode mode = occ::mode_from_string(mode_name);
  occ::TilingPlan p = occ::plan(width, height, mode);

  std::printf("source        %dx%d\n", p.src_w, p.src_h);
  std::printf("mode          %s%s\n", occ::to_string(p.mode).c_str(),
              p.mode != mode ? " (degraded)" : "");
  if (p.n_tiles > 0)
    std::printf("tiles         %d (%dx%d grid)\n", p.n_tiles, p.grid_rows, p.grid_cols);
  std::printf("resized       %dx%d in %d\n", p.resized_w, p.resized_h, p.global_view_side);
  std::printf("tokens        %d\n", p.total_tokens);
  std::printf("valid tokens  %d\n", p.valid_tokens);

  json j = {{"mode", occ::to_string(p.mode)},
            {"n_tiles", p.n_tiles},
            {"grid_rows", p.grid_rows},
            {"grid_cols", p.grid_cols},
            {"global_view_side", p.global_view_side},
            {"resized_w", p.resized_w},
            {"resized_h", p.resized_h},
            {"total_tokens", p.total_tokens},
            {"valid_tokens", p.valid_tokens}};
  std::printf("%s\n", j.dump().c_str());
  return 0;
}

int cmd_train(occ::GlobalConfig cfg, const std::string& out_dir) {
  if (!out_dir.empty()) cfg.train.out_dir = out_dir;
  fs::create_directories(cfg.train.out_dir);
  occ::Trainer trainer(cfg.train, cfg.encoder, cfg.decoder);
  auto pc = trainer.decoder().count_params(trainer.params());
  long long total = static_cast<long long>(trainer.params().param_count());
  std::printf("training: %d steps, batch %d, %lld params (%lld active)\n", cfg.train.steps,
              cfg.train.batch, total, total - static_cast<long long>(pc.total - pc.active));
  trainer.run([](int step, const occ::StepStats& s) {
    std::printf("step %6d  loss %.4f  lr %.6f  grad %.3f\n", step, s.loss, s.lr, s.grad_norm);
    std::fflush(stdout);
  });
  std::printf("done: %s/metrics.csv, %s/ckpt_final.bin\n", cfg.train.out_dir.c_str(),
              cfg.train.out_dir.c_str());
  return 0;
}

int cmd_eval(const occ::GlobalConfig& cfg, const std::string& out_dir) {
  occ::StudyConfig sc;
  sc.seed = cfg.seed;
  sc.docs_per_bucket = cfg.eval.docs_per_bucket;
  sc.vocabulary = cfg.eval.vocabulary;
  sc.dump_worst = cfg.eval.dump_worst;
  sc.out_dir = out_dir;
  if (cfg.eval.buckets == "ratio")
    sc.buckets = occ::default_ratio_buckets();
  else if (cfg.eval.buckets == "modes")
    sc.buckets = occ::default_mode_sweep();
  else
    occ::fail("eval: unknown bucket preset '" + cfg.eval.buckets + "' (ratio|modes)");
  if (!sc.out_dir.empty()) fs::create_directories(sc.out_dir);

  occ::StudyResult res;
  if (cfg.eval.decoder == "echo") {
    res = occ::run_compression_study(sc, occ::echo_decoder());
  } else if (cfg.eval.decoder == "empty") {
    res = occ::run_compression_study(sc, occ::empty_decoder());
  } else if (cfg.eval.decoder == "model") {
    occ::check(!cfg.eval.checkpoint.empty(), "eval: model decoder needs eval.checkpoint");
    occ::CheckpointInfo info = occ::peek_checkpoint(cfg.eval.checkpoint);
    occ::nn::ParamStore<float> ps;
    occ::Rng rng(0);
    occ::Encoder<float> enc(ps, info.enc, rng);
    occ::Decoder<float> dec(ps, info.dec, rng);
    occ::load_checkpoint(cfg.eval.checkpoint, ps);
    std::printf("loaded %s (step %lld, %lld tokens seen)\n", cfg.eval.checkpoint.c_str(),
                static_cast<long long>(info.meta.step),
                static_cast<long long>(info.meta.tokens_seen));
    res = occ::run_compression_study(sc, occ::model_decoder(enc, dec));
  } else {
    occ::fail("eval: unknown decoder '" + cfg.eval.decoder + "' (model|echo|empty)");
  }

  std::printf("%-8s %8s %8s %10s %10s %10s\n", "mode", "tokens", "ratio", "precision", "min",
              "max");
  for (const auto& b : res.buckets)
    std::printf("%-8s %8d %8.2f %10.6f %10.6f %10.6f\n", occ::to_string(b.mode).c_str(),
                b.n_tokens, b.ratio, b.precision_mean, b.precision_min, b.precision_max);
  if (!sc.out_dir.empty())
    std::printf("wrote %s/records.csv, %s/summary.csv\n", sc.out_dir.c_str(),
                sc.out_dir.c_str());
  return 0;
}

int cmd_decay(const occ::GlobalConfig& cfg, const std::string& out_dir) {
  occ::DecayPolicy policy;
  policy.keep_text_rounds = cfg.decay.keep_text_rounds;
  policy.discard_terminal = cfg.decay.discard_terminal;
  policy.stages = cfg.decay.stages;
  policy.validate();

  std::vector<occ::RoundInfo> rounds;
  for (int i = 0; i < cfg.decay.rounds; ++i)
    rounds.push_back({i, cfg.decay.tokens_per_round});
  occ::DecayLedger ledger = occ::assign_stages(rounds, policy);

  if (!cfg.decay.curve_csv.empty()) {
    occ::RecallCurve curve = occ::RecallCurve::from_summary_csv(cfg.decay.curve_csv);
    occ::expected_recall(ledger, curve);
  }

  occ::BudgetReport rep = occ::budget_report(ledger);
  std::printf("%-10s %8s %10s\n", "stage", "rounds", "tokens");
  for (const auto& su : rep.stages) {
    std::string label = su.stage == -1  ? "text"
                        : su.stage == -2 ? "discarded"
                                         : "stage " + std::to_string(su.stage);
    std::printf("%-10s %8d %10lld\n", label.c_str(), su.n_rounds,
                static_cast<long long>(su.tokens));
  }
  std::printf("raw text tokens    %lld\n", static_cast<long long>(rep.raw_text_tokens));
  std::printf("retained tokens    %lld\n", static_cast<long long>(rep.total_tokens));
  std::printf("compression factor %.6f\n", rep.compression_factor);

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    std::string path = (fs::path(out_dir) / "ledger.csv").string();
    occ::write_ledger_csv(ledger, path);
    std::printf("wrote %s\n", path.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"optical context compression toolkit"};
  app.require_subcommand(0, 1);
  app.fallthrough();

  std::string config_path;
  std::string out_dir;
  int64_t seed = -1;
  bool deterministic = false;
  bool print_config = false;
  app.add_option("--config", config_path, "config file (JSON with // comments)");
  app.add_option("--seed", seed, "override the config seed");
  app.add_flag("--deterministic", deterministic, "single-threaded bit-exact mode");
  app.add_option("--out", out_dir, "output directory");
  app.add_flag("--print-config", print_config, "print the fully-resolved config");

  std::string render_file;
  CLI::App* c_render = app.add_subcommand("render", "rasterize a text file to PGM pages");
  c_render->add_option("text_file", render_file, "input text file")->required();

  int plan_w = 0, plan_h = 0;
  std::string plan_mode;
  CLI::App* c_plan = app.add_subcommand("plan", "show the tiling plan for an image size");
  c_plan->add_option("width", plan_w, "source width in px")->required();
  c_plan->add_option("height", plan_h, "source height in px")->required();
  c_plan->add_option("mode", plan_mode, "resolution mode")->required();

  CLI::App* c_train = app.add_subcommand("train", "train encoder+decoder per config");
  CLI::App* c_eval = app.add_subcommand("eval", "run the compression study per config");
  CLI::App* c_decay = app.add_subcommand("decay-sim", "simulate a memory decay policy");

  CLI11_PARSE(app, argc, argv);

  if (deterministic) Eigen::setNbThreads(1);

  try {
    occ::GlobalConfig cfg =
        config_path.empty() ? occ::parse_config("{}") : occ::load_config(config_path);
    if (seed >= 0) {
      cfg.seed = static_cast<uint64_t>(seed);
      cfg.train.seed = cfg.seed;
    }
    if (print_config) std::printf("%s", occ::serialize_config(cfg).c_str());

    if (c_render->parsed())
      return cmd_render(cfg, render_file, out_dir.empty() ? "." : out_dir);
    if (c_plan->parsed()) return cmd_plan(plan_w, plan_h, plan_mode);
    if (c_train->parsed()) return cmd_train(cfg, out_dir);
    if (c_eval->parsed()) return cmd_eval(cfg, out_dir);
    if (c_decay->parsed()) return cmd_decay(cfg, out_dir);
    if (!print_config) std::printf("%s", app.help().c_str());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
