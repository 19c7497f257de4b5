#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <random>

#include "alebk/io/csv.hpp"
#include "alebk/io/files.hpp"
#include "alebk/io/image.hpp"
#include "alebk/io/json_io.hpp"
#include "alebk/io/synth.hpp"
#include "doctest.h"

using namespace alebk;
using namespace alebk::io;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int n = 0;
    path = fs::temp_directory_path() / ("alebk_io_" + std::to_string(::getpid()) + "_" + std::to_string(n++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("doubles survive text") {
    std::mt19937_64 gen(41);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 1000; ++i) {
      const double v = u(gen) / static_cast<double>(1 + gen() % 1000);
      CHECK(parse_double(format_double(v), "t") == v);
    }
    CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(std::isnan(parse_double("nan", "t")));
    CHECK(format_double(0.5) == "0.5");
    CHECK_THROWS_AS(parse_double("1.5x", "t"), IoError);
    CHECK_THROWS_AS(parse_index("-1", "t"), IoError);
  }

  TEST_CASE("csv parse and format") {
    const auto t = parse_csv("a,b\n1,2\n3,4\n");
    CHECK(t.header == std::vector<std::string>{"a", "b"});
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[1][0] == "3");
    CHECK(t.column("b") == 1);
    CHECK_THROWS_AS(t.column("c"), IoError);
    CHECK(format_csv(t) == "a,b\n1,2\n3,4\n");
    CHECK_THROWS_AS(parse_csv("a,b\n1\n"), IoError);
    CsvTable bad{{"a"}, {{"x,y"}}};
    CHECK_THROWS(format_csv(bad));
  }

  TEST_CASE("score, event, bpm, history, plot and attention files round-trip") {
    TempDir d;
    std::vector<ScoreRow> rows{{2, 0.25, "f2.png"}, {0, 0.75, "f0.png"}, {1, std::nullopt, "f1.png"}};
    write_score_csv(d.path / "s.csv", rows);
    const auto back = read_score_csv(d.path / "s.csv");
    REQUIRE(back.size() == 3);
    CHECK(!back[2].score);
    CHECK(*back[0].score == 0.25);
    const auto seq = to_sequence(back, 25.0);
    CHECK(seq.scores == std::vector<double>{0.75, 0.0, 0.25});
    CHECK(seq.fps == 25.0);

    std::vector<temporal::BlinkEvent> ev{{3, 5, 0.9}, {40, 40, 0.6}};
    write_events_csv(d.path / "e.csv", ev, 30.0);
    CHECK(read_events_csv(d.path / "e.csv") == ev);

    std::vector<temporal::MinuteWindow> w{{0, 12, 0, 1799}, {1, 7, 1800, 3599}};
    write_bpm_csv(d.path / "b.csv", w);
    const auto wb = read_bpm_csv(d.path / "b.csv");
    REQUIRE(wb.size() == 2);
    CHECK(wb[1].bpm == 7);
    CHECK(wb[1].first_frame == 1800);

    std::vector<blink::EpochStats> h{{1, 0.69, 0.5}, {2, 0.31, 1.0}};
    write_history_csv(d.path / "h.csv", h);
    const auto hb = read_history_csv(d.path / "h.csv");
    REQUIRE(hb.size() == 2);
    CHECK(hb[0].loss == 0.69);

    std::vector<PlotPoint> p{{1.5, 0.2, "far@tau_l=10"}, {2.5, 0.1, "frr@tau_l=10"}};
    write_plot_csv(d.path / "p.csv", p);
    CHECK(read_plot_csv(d.path / "p.csv") == p);

    attention::AttentionRecord a{"s01", {10, 20.5, 99}};
    write_attention_csv(d.path / "a.csv", a);
    const auto ab = read_attention_csv(d.path / "a.csv", "s01");
    CHECK(ab.values == a.values);
    atomic_write(d.path / "bad.csv", "timestamp_s,attention\n1,10\n0,20\n");
    CHECK_THROWS_AS(read_attention_csv(d.path / "bad.csv", "x"), IoError);
  }

  TEST_CASE("images round-trip at 8 bits") {
    TempDir d;
    std::mt19937_64 gen(42);
    for (const char* ext : {".png", ".pgm", ".ppm"}) {
      const std::size_t C = std::string(ext) == ".pgm" ? 1 : 3;
      Tensor img({7, 9, C});
      for (auto& v : img.data()) v = static_cast<double>(gen() % 256) / 255.0;
      const auto path = d.path / (std::string("img") + ext);
      write_image(path, img);
      const auto back = read_image(path);
      REQUIRE(back.shape() == img.shape());
      for (std::size_t i = 0; i < img.size(); ++i) CHECK(back[i] == img[i]);
    }
    Tensor gray({4, 4, 1}, 0.5);
    write_image(d.path / "g.png", gray);
    CHECK(read_image(d.path / "g.png").shape() == Shape{4, 4, 1});
    CHECK_THROWS(write_image(d.path / "x.png", Tensor({2, 2, 1}, 1.5)));
    atomic_write(d.path / "junk.png", "not an image");
    CHECK_THROWS(read_image(d.path / "junk.png"));
    CHECK_THROWS(read_image(d.path / "missing.png"));
  }

  TEST_CASE("frame numbers come from the last digits of the stem") {
    CHECK(frame_index_from_name("frame_0042.png") == 42u);
    CHECK(frame_index_from_name("cam2_frame_7.pgm") == 7u);
    CHECK(!frame_index_from_name("frame.png"));
    CHECK(is_image_file("a.PNG"));
    CHECK(!is_image_file("a.txt"));
  }

  TEST_CASE("atomic writes replace whole files and leave no temporaries") {
    TempDir d;
    const auto p = d.path / "sub" / "f.txt";
    atomic_write(p, "one");
    atomic_write(p, "two");
    CHECK(read_file(p) == "two");
    std::size_t n = 0;
    for (const auto& e : fs::directory_iterator(p.parent_path())) n += e.is_regular_file() ? 1 : 0;
    CHECK(n == 1);
    CHECK_THROWS_AS(read_file(d.path / "nope"), IoError);
  }

  TEST_CASE("json numbers keep non-finite values") {
    CHECK(json_number(1.5) == json(1.5));
    CHECK(json_number(-std::numeric_limits<double>::infinity()) == json("-inf"));
    CHECK(std::isinf(number_from_json(json("+inf"), "x")));
    CHECK(std::isnan(number_from_json(json_number(std::nan("")), "x")));
    CHECK_THROWS(number_from_json(json("abc"), "x"));
  }

  TEST_CASE("manifests and samples") {
    TempDir d;
    const auto path = synth::write_eye_dataset(d.path / "eyes", 6, 2, 5);
    const auto loaded = load_manifest(path);
    REQUIRE(loaded.entries.size() == 6);
    CHECK(loaded.entries[0].subject == "s01");
    write_manifest(d.path / "eyes" / "copy.json", loaded);
    CHECK(load_manifest(d.path / "eyes" / "copy.json").entries.size() == 6);
    const auto samples = load_samples(loaded);
    REQUIRE(samples.size() == 6);
    CHECK(samples[0].left.shape() == Shape{50, 50, 3});
    CHECK(samples[0].label == loaded.entries[0].label);

    json bad = read_json(d.path / "eyes" / "manifest.json");
    bad["entries"][0]["label"] = 3;
    write_json(d.path / "eyes" / "bad.json", bad);
    CHECK_THROWS(load_manifest(d.path / "eyes" / "bad.json"));
    bad = read_json(d.path / "eyes" / "manifest.json");
    bad["entries"][1]["left"] = "missing.png";
    write_json(d.path / "eyes" / "bad.json", bad);
    try {
      load_manifest(d.path / "eyes" / "bad.json");
      FAIL("expected an error");
    } catch (const std::exception& e) {
      CHECK(std::string(e.what()).find("missing.png") != std::string::npos);
    }
  }

  TEST_CASE("landmark files round-trip") {
    TempDir d;
    LandmarkFile f;
    f.width = 200;
    f.height = 160;
    roi::LandmarkSet s;
    s.width = 200;
    s.height = 160;
    for (std::size_t i = 0; i < roi::kLandmarkCount; ++i) s.points[i] = {1.25 * i, 0.5 * i};
    f.frames[3] = s;
    f.frames[17] = s;
    write_landmarks(d.path / "lm.json", f);
    const auto back = read_landmarks(d.path / "lm.json");
    CHECK(back.width == 200);
    REQUIRE(back.frames.size() == 2);
    CHECK(back.frames.at(17).points == s.points);
  }

  TEST_CASE("run configuration") {
    const auto def = default_config();
    CHECK(def.tau_l.size() == 10);
    CHECK(config_to_json(config_from_json(config_to_json(def))) == config_to_json(def));

    auto j = json::parse(R"({"seed": 7, "train": {"epochs": 3}, "events": {"merge_gap": 0},
                             "attention": {"tau_l": [20, 10], "mu": 47.27}, "fps": 25})");
    const auto c = config_from_json(j);
    CHECK(c.seed == 7);
    CHECK(c.train.seed == 7);
    CHECK(c.train.epochs == 3);
    CHECK(c.train.batch_size == def.train.batch_size);
    CHECK(c.events.merge_gap == 0);
    CHECK(c.tau_l == std::vector<double>{20, 10});
    CHECK(*c.mu == 47.27);
    CHECK(c.fps == 25);

    CHECK_THROWS(config_from_json(json::parse(R"({"sed": 1})")));
    CHECK_THROWS(config_from_json(json::parse(R"({"train": {"epoch": 1}})")));
    CHECK_THROWS(config_from_json(json::parse(R"({"fps": -1})")));
    CHECK_THROWS(config_from_json(json::parse(R"({"attention": {"tau_l": [60]}})")));
  }
}
