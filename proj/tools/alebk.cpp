// alebk: blink-rate attention estimation from the command line.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "alebk/app/commands.hpp"

namespace {

using alebk::app::fs::path;

struct Common {
  std::string config;
  std::uint64_t seed = 0;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "JSON run configuration")->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "PRNG seed")->required();
}

alebk::io::RunConfig resolve(const Common& c) {
  auto cfg = c.config.empty() ? alebk::io::default_config() : alebk::io::load_config(c.config);
  cfg.seed = c.seed;
  cfg.train.seed = c.seed;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Blink detection and blink-rate attention estimation"};
  app.require_subcommand(1);

  Common train_c, score_c, events_c, calib_c, eval_c, synth_c;
  std::string manifest, out, model, frames, landmarks, scores, protocol, kind;
  std::optional<double> fps;
  alebk::app::SynthOptions synth;

  auto* train = app.add_subcommand("train", "Train a blink model on a crop manifest");
  add_common(train, train_c);
  train->add_option("--manifest", manifest, "dataset manifest")->required();
  train->add_option("--out", out, "output directory");

  auto* score = app.add_subcommand("score", "Score face frames with a trained model");
  add_common(score, score_c);
  score->add_option("--model", model, "model file")->required()->check(CLI::ExistingFile);
  score->add_option("--frames", frames, "directory of frame images")->required();
  score->add_option("--landmarks", landmarks, "landmark JSON")->required()->check(CLI::ExistingFile);
  score->add_option("--out", out, "score CSV")->required();

  auto* events = app.add_subcommand("events", "Extract blink events and blinks per minute");
  add_common(events, events_c);
  events->add_option("--scores", scores, "score CSV")->required()->check(CLI::ExistingFile);
  events->add_option("--fps", fps, "frame rate of the score stream");
  events->add_option("--out", out, "output directory");

  auto* calib = app.add_subcommand("calibrate", "Sweep attention thresholds and calibrate the bpm threshold");
  add_common(calib, calib_c);
  calib->add_option("--manifest", manifest, "manifest with sessions")->required();
  calib->add_option("--out", out, "output directory");

  auto* evaluate = app.add_subcommand("evaluate", "Evaluate blink detection under a protocol");
  add_common(evaluate, eval_c);
  evaluate->add_option("--manifest", manifest, "dataset manifest")->required();
  evaluate->add_option("--protocol", protocol, "holdout, loso or hust-min")
      ->required()
      ->check(CLI::IsMember({"holdout", "loso", "hust-min"}));
  evaluate->add_option("--model", model, "model file (not used by loso)");
  evaluate->add_option("--out", out, "output directory");

  auto* syn = app.add_subcommand("synth", "Generate synthetic datasets");
  add_common(syn, synth_c);
  syn->add_option("--kind", synth.kind, "eyes, sequences, sessions or frames")
      ->required()
      ->check(CLI::IsMember({"eyes", "sequences", "sessions", "frames"}));
  syn->add_option("--out", out, "output directory")->required();
  syn->add_option("--count", synth.count, "samples, sequences or sessions");
  syn->add_option("--subjects", synth.subjects, "distinct subject ids");
  syn->add_option("--frames", synth.frames, "frames per sequence or frame set");
  syn->add_option("--minutes", synth.minutes, "minutes per session");
  syn->add_option("--normal-fraction", synth.normal_fraction, "share of Normal minutes")->check(CLI::Range(0.0, 1.0));

  CLI11_PARSE(app, argc, argv);

  try {
    auto out_or = [&](const alebk::io::RunConfig& cfg) { return out.empty() ? path(cfg.output_dir) : path(out); };
    if (train->parsed()) {
      const auto cfg = resolve(train_c);
      const auto r = alebk::app::cmd_train(manifest, cfg, out_or(cfg));
      std::cout << "trained " << r.result.history.size() << " epochs (" << r.result.stop_reason << "), final accuracy "
                << r.result.history.back().accuracy << "\nmodel: " << r.model.string() << "\n";
    } else if (score->parsed()) {
      const auto cfg = resolve(score_c);
      const auto rows = alebk::app::cmd_score(model, frames, landmarks, out, cfg);
      std::size_t skipped = 0;
      for (const auto& r : rows) skipped += r.score ? 0 : 1;
      std::cout << "scored " << rows.size() - skipped << " frames, skipped " << skipped << "\n";
    } else if (events->parsed()) {
      auto cfg = resolve(events_c);
      if (fps) cfg.fps = *fps;
      const auto r = alebk::app::cmd_events(scores, cfg, out_or(cfg));
      std::cout << r.events.size() << " events, " << r.windows.size() << " complete minutes\n";
    } else if (calib->parsed()) {
      const auto cfg = resolve(calib_c);
      const auto report = alebk::app::cmd_calibrate(manifest, cfg, out_or(cfg));
      for (const auto& row : report["rows"]) {
        std::cout << "tau_L " << row["tau_l"] << " tau_H " << row["tau_h"];
        if (row.contains("max_acc")) {
          std::cout << " max_acc " << row["max_acc"] << " acc_eer " << row["acc_eer"] << " tau_bpm " << row["tau_bpm"];
        } else {
          std::cout << " (" << row["note"].get<std::string>() << ")";
        }
        std::cout << "\n";
      }
    } else if (evaluate->parsed()) {
      const auto cfg = resolve(eval_c);
      std::optional<path> model_path;
      if (!model.empty()) model_path = path(model);
      const auto report = alebk::app::cmd_evaluate(model_path, manifest, alebk::app::protocol_from_string(protocol),
                                                   cfg, out_or(cfg));
      const auto& m = report.contains("pooled") ? report["pooled"] : report["metrics"];
      std::cout << protocol << ": precision " << m["precision"] << " recall " << m["recall"] << " f1 " << m["f1"]
                << "\n";
    } else if (syn->parsed()) {
      const auto cfg = resolve(synth_c);
      std::cout << alebk::app::cmd_synth(synth, out, cfg.seed).string() << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "alebk: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
