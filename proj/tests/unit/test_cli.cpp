// Drives the built alebk binary end to end on small synthetic inputs.

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "alebk/io/csv.hpp"
#include "alebk/io/files.hpp"
#include "alebk/io/json_io.hpp"
#include "doctest.h"

#ifndef ALEBK_CLI_PATH
#error "ALEBK_CLI_PATH must name the alebk executable"
#endif

namespace fs = std::filesystem;
using alebk::io::json;

namespace {

struct Run {
  int status = -1;
  std::string err;
};

const fs::path& workdir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("alebk_cli_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

Run alebk_cli(const std::string& args) {
  const auto err = workdir() / "stderr.txt";
  const std::string cmd = std::string("\"") + ALEBK_CLI_PATH + "\" " + args + " >/dev/null 2>\"" + err.string() + "\"";
  const int raw = std::system(cmd.c_str());
  Run r;
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.err = fs::exists(err) ? alebk::io::read_file(err) : "";
  return r;
}

std::string p(const fs::path& path) { return "\"" + path.string() + "\""; }

// Small, fast training run shared by several cases.
const fs::path& tiny_config() {
  static const fs::path cfg = [] {
    const auto c = workdir() / "tiny.json";
    alebk::io::write_json(c, json::parse(R"({"train": {"epochs": 2, "batch_size": 8}})"));
    return c;
  }();
  return cfg;
}

const fs::path& trained_model() {
  static const fs::path model = [] {
    const auto w = workdir();
    REQUIRE(alebk_cli("synth --seed 1 --kind eyes --count 8 --subjects 2 --out " + p(w / "eyes")).status == 0);
    REQUIRE(alebk_cli("train --seed 3 --config " + p(tiny_config()) + " --manifest " + p(w / "eyes" / "manifest.json") +
                      " --out " + p(w / "m1"))
                .status == 0);
    return w / "m1" / "model.alebk";
  }();
  return model;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("an empty manifest fails and names the file") {
    const auto m = workdir() / "empty_manifest.json";
    alebk::io::write_json(m, json::parse(R"({"root": ".", "entries": []})"));
    const auto r = alebk_cli("train --seed 1 --manifest " + p(m) + " --out " + p(workdir() / "never"));
    CHECK(r.status != 0);
    CHECK(r.err.find("empty_manifest.json") != std::string::npos);
  }

  TEST_CASE("missing seed is a usage error") {
    CHECK(alebk_cli("synth --kind eyes --out " + p(workdir() / "noseed")).status != 0);
  }

  TEST_CASE("training is bit-reproducible for a fixed seed") {
    const auto& first = trained_model();
    const auto w = workdir();
    REQUIRE(alebk_cli("train --seed 3 --config " + p(tiny_config()) + " --manifest " + p(w / "eyes" / "manifest.json") +
                      " --out " + p(w / "m2"))
                .status == 0);
    CHECK(alebk::io::read_file(first) == alebk::io::read_file(w / "m2" / "model.alebk"));
    CHECK(fs::exists(w / "m1" / "history.csv"));
    CHECK(alebk::io::read_json(w / "m1" / "config.json")["seed"] == 3);
  }

  TEST_CASE("scoring writes one row per frame and marks missing landmarks") {
    const auto w = workdir();
    const auto& model = trained_model();
    REQUIRE(alebk_cli("synth --seed 2 --kind frames --frames 19 --out " + p(w / "faces")).status == 0);
    auto lm = alebk::io::read_json(w / "faces" / "landmarks.json");
    lm["frames"].erase("4");
    alebk::io::write_json(w / "faces" / "partial.json", lm);

    REQUIRE(alebk_cli("score --seed 0 --model " + p(model) + " --frames " + p(w / "faces" / "frames") +
                      " --landmarks " + p(w / "faces" / "partial.json") + " --out " + p(w / "scores.csv"))
                .status == 0);
    const auto rows = alebk::io::read_score_csv(w / "scores.csv");
    REQUIRE(rows.size() == 19);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      CHECK(rows[i].frame_index == i);
      CHECK(rows[i].score.has_value() == (i != 4));
    }
    CHECK(alebk::io::read_file(w / "scores.csv").find("skipped") != std::string::npos);

    fs::create_directories(w / "no_frames");
    alebk::io::write_json(w / "no_lm.json", json::parse(R"({"width": 200, "height": 160, "frames": {}})"));
    REQUIRE(alebk_cli("score --seed 0 --model " + p(model) + " --frames " + p(w / "no_frames") + " --landmarks " +
                      p(w / "no_lm.json") + " --out " + p(w / "none.csv"))
                .status == 0);
    CHECK(alebk::io::read_csv(w / "none.csv").rows.empty());
  }

  TEST_CASE("events and calibration on synthetic sessions") {
    const auto w = workdir();
    REQUIRE(alebk_cli("synth --seed 4 --kind sessions --count 2 --minutes 12 --out " + p(w / "sess")).status == 0);
    REQUIRE(alebk_cli("events --seed 0 --scores " + p(w / "sess" / "sessions" / "s01_scores.csv") + " --out " +
                      p(w / "ev"))
                .status == 0);
    CHECK(alebk::io::read_bpm_csv(w / "ev" / "bpm.csv").size() == 12);
    REQUIRE(alebk_cli("calibrate --seed 0 --manifest " + p(w / "sess" / "manifest.json") + " --out " + p(w / "cal"))
                .status == 0);
    const auto report = alebk::io::read_json(w / "cal" / "calibration.json");
    CHECK(report["rows"].size() == 10);
    CHECK(fs::exists(w / "cal" / "plots" / "bpm_pdf.csv"));
    CHECK(fs::exists(w / "cal" / "plots" / "far_frr.csv"));
  }

  TEST_CASE("loso needs at least two subjects") {
    const auto w = workdir();
    REQUIRE(alebk_cli("synth --seed 5 --kind eyes --count 6 --subjects 1 --out " + p(w / "one")).status == 0);
    const auto r = alebk_cli("evaluate --seed 0 --protocol loso --config " + p(tiny_config()) + " --manifest " +
                             p(w / "one" / "manifest.json") + " --out " + p(w / "loso1"));
    CHECK(r.status != 0);
    CHECK(r.err.find("subject") != std::string::npos);
  }

  TEST_CASE("unknown protocol is rejected") {
    CHECK(alebk_cli("evaluate --seed 0 --protocol kfold --manifest x.json").status != 0);
  }
}
