#include "alebk/app/commands.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

#include "alebk/attention/alebk.hpp"
#include "alebk/eval/metrics.hpp"
#include "alebk/io/files.hpp"
#include "alebk/io/image.hpp"
#include "alebk/io/synth.hpp"
#include "alebk/nn/serialize.hpp"
#include "alebk/roi/geometry.hpp"
#include "alebk/temporal/events.hpp"

namespace alebk::app {

namespace {

blink::BlinkModel load_model(const fs::path& path) {
  try {
    return blink::BlinkModel::decode(io::read_file(path));
  } catch (const io::IoError&) {
    throw;
  } catch (const std::exception& e) {
    throw io::IoError("'" + path.string() + "': " + e.what());
  }
}

json ratio(const std::optional<double>& v) { return v ? json(*v) : json("undefined"); }

std::vector<blink::EyePairSample> subset(const std::vector<blink::EyePairSample>& all,
                                         const std::vector<std::size_t>& idx) {
  std::vector<blink::EyePairSample> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(all[i]);
  return out;
}

std::string tau_tag(double tau_l) { return "tau_l=" + io::format_double(tau_l); }

}  // namespace

json metrics_report(const std::vector<double>& scores, const std::vector<int>& labels, double threshold) {
  const auto c = eval::confusion_at(scores, labels, threshold);
  const auto p = eval::prf1(c);
  json j{{"threshold", threshold},
         {"confusion", {{"tp", c.tp}, {"fp", c.fp}, {"tn", c.tn}, {"fn", c.fn}}},
         {"precision", ratio(p.precision)},
         {"recall", ratio(p.recall)},
         {"f1", ratio(p.f1)},
         {"accuracy", c.total() ? json(eval::accuracy(c)) : json("undefined")}};
  const bool both = std::count(labels.begin(), labels.end(), 1) > 0 && std::count(labels.begin(), labels.end(), 0) > 0;
  if (both) {
    const auto e = eval::eer(eval::det_curve(scores, labels));
    j["eer"] = {{"threshold", io::json_number(e.threshold)}, {"far", e.far}, {"frr", e.frr}, {"value", e.eer}};
  } else {
    j["eer"] = nullptr;
  }
  return j;
}

TrainOutputs cmd_train(const fs::path& manifest_path, const RunConfig& config, const fs::path& out_dir) {
  const auto manifest = io::load_manifest(manifest_path);
  if (manifest.entries.empty()) throw io::IoError("'" + manifest_path.string() + "': manifest has no entries");
  const auto samples = io::load_samples(manifest);

  auto model = blink::build_model(config.seed);
  blink::TrainConfig tc = config.train;
  tc.seed = config.seed;
  TrainOutputs out;
  out.result = blink::train(model, samples, tc);

  const auto& last = out.result.history.back();
  json meta{{"epochs_run", out.result.history.size()},
            {"stop_reason", out.result.stop_reason},
            {"final_loss", last.loss},
            {"train_accuracy", last.accuracy}};
  out.model = out_dir / "model.alebk";
  out.history = out_dir / "history.csv";
  io::atomic_write(out.model, nn::encode_model(model.network(), model.seed(), meta));
  io::write_history_csv(out.history, out.result.history);
  io::write_json(out_dir / "config.json", io::config_to_json(config));
  return out;
}

std::vector<io::ScoreRow> cmd_score(const fs::path& model_path, const fs::path& frames_dir,
                                    const fs::path& landmarks_path, const fs::path& out_csv, const RunConfig& config) {
  const auto model = load_model(model_path);
  const auto landmarks = io::read_landmarks(landmarks_path);
  if (!fs::is_directory(frames_dir)) throw io::IoError("'" + frames_dir.string() + "' is not a directory");

  std::map<std::size_t, fs::path> frames;
  for (const auto& entry : fs::directory_iterator(frames_dir)) {
    if (!entry.is_regular_file() || !io::is_image_file(entry.path())) continue;
    const auto index = io::frame_index_from_name(entry.path());
    if (!index) throw io::IoError("'" + entry.path().string() + "': no frame number in the file name");
    if (!frames.emplace(*index, entry.path()).second) {
      throw io::IoError("'" + entry.path().string() + "': frame " + std::to_string(*index) + " appears twice");
    }
  }

  std::vector<io::ScoreRow> rows;
  std::vector<blink::EyePairSample> batch;
  std::vector<std::size_t> batch_rows;
  for (const auto& [index, path] : frames) {
    rows.push_back({index, std::nullopt, path.filename().string()});
    const auto lm = landmarks.frames.find(index);
    if (lm == landmarks.frames.end()) continue;
    const Tensor image = io::read_image(path);
    if (image.dim(0) != landmarks.height || image.dim(1) != landmarks.width) {
      throw io::IoError("'" + path.string() + "': image size does not match the landmark file");
    }
    auto [left, right] = roi::crop_and_resize(roi::align_face(image, lm->second), config.eye_margin);
    for (auto* t : {&left, &right}) {
      for (auto& v : t->data()) v = std::clamp(v, 0.0, 1.0);
    }
    batch.push_back({std::move(left), std::move(right), 0, "", blink::Spectrum::RGB});
    batch_rows.push_back(rows.size() - 1);
  }
  const auto scores = model.predict_batch(batch);
  for (std::size_t i = 0; i < scores.size(); ++i) rows[batch_rows[i]].score = scores[i];
  io::write_score_csv(out_csv, rows);
  return rows;
}

EventOutputs cmd_events(const fs::path& scores_csv, const RunConfig& config, const fs::path& out_dir) {
  const auto rows = io::read_score_csv(scores_csv);
  EventOutputs out;
  if (!rows.empty()) {
    const auto seq = io::to_sequence(rows, config.fps);
    out.events = temporal::detect_blink_events(seq, config.events);
    out.windows = temporal::blink_rate(out.events, config.fps, seq.scores.size());
  }
  io::write_events_csv(out_dir / "events.csv", out.events, config.fps);
  io::write_bpm_csv(out_dir / "bpm.csv", out.windows);
  return out;
}

json cmd_calibrate(const fs::path& manifest_path, const RunConfig& config, const fs::path& out_dir) {
  const auto manifest = io::load_manifest(manifest_path);
  if (manifest.sessions.empty()) throw io::IoError("'" + manifest_path.string() + "': manifest has no sessions");

  std::vector<attention::Session> sessions;
  std::vector<attention::AttentionRecord> records;
  std::size_t paired_minutes = 0;
  for (const auto& ms : manifest.sessions) {
    const double fps = ms.fps.value_or(config.fps);
    const auto rows = io::read_score_csv(manifest.resolve(ms.scores));
    attention::Session s;
    s.id = ms.subject;
    if (!rows.empty()) {
      const auto seq = io::to_sequence(rows, fps);
      const auto events = temporal::detect_blink_events(seq, config.events);
      for (const auto& w : temporal::blink_rate(events, fps, seq.scores.size())) s.bpm.push_back(w.bpm);
    }
    s.attention = io::read_attention_csv(manifest.resolve(ms.attention), ms.subject);
    paired_minutes += std::min(s.bpm.size(), s.attention.values.size() / attention::kSamplesPerMinute);
    records.push_back(s.attention);
    sessions.push_back(std::move(s));
  }
  if (paired_minutes == 0) throw io::IoError("'" + manifest_path.string() + "': no complete paired minutes");

  const double mu = config.mu.value_or(attention::compute_mu(records));
  const auto rows = attention::sweep(sessions, mu, config.tau_l);

  json report{{"mu", mu},
              {"mu_source", config.mu ? "config" : "data"},
              {"sessions", sessions.size()},
              {"paired_minutes", paired_minutes},
              {"rows", json::array()}};
  std::vector<io::PlotPoint> pdf_points, curve_points;
  for (const auto& r : rows) {
    json jr{{"tau_l", r.thresholds.tau_l},
            {"tau_h", r.thresholds.tau_h},
            {"delta", r.thresholds.delta},
            {"n_high", r.n_high},
            {"n_low", r.n_low},
            {"n_normal", r.n_normal}};
    const std::string tag = tau_tag(r.thresholds.tau_l);
    if (r.result) {
      const auto& c = *r.result;
      const auto pdfs = attention::pdf_by_class(attention::pair_minutes(sessions, r.thresholds), config.bin_width);
      jr["max_acc"] = c.max_accuracy;
      jr["acc_eer"] = c.accuracy_at_eer;
      jr["tau_bpm"] = io::json_number(c.tau_bpm_eer);
      jr["tau_bpm_maxacc"] = io::json_number(c.tau_bpm_maxacc);
      jr["far_at_eer"] = c.far_at_eer;
      jr["frr_at_eer"] = c.frr_at_eer;
      jr["mean_bpm_high"] = pdfs.high.mean;
      jr["mean_bpm_low"] = pdfs.low.mean;
      jr["pdf_overlap"] = attention::overlap_area(pdfs);
      for (std::size_t i = 0; i < pdfs.high.density.size(); ++i) {
        pdf_points.push_back({pdfs.high.bin_center(i), pdfs.high.density[i], "high@" + tag});
      }
      for (std::size_t i = 0; i < pdfs.low.density.size(); ++i) {
        pdf_points.push_back({pdfs.low.bin_center(i), pdfs.low.density[i], "low@" + tag});
      }
      for (const auto& p : c.curve) {
        if (!std::isfinite(p.tau_bpm)) continue;
        curve_points.push_back({p.tau_bpm, p.far, "far@" + tag});
        curve_points.push_back({p.tau_bpm, p.frr, "frr@" + tag});
      }
    } else {
      jr["note"] = r.note;
    }
    report["rows"].push_back(std::move(jr));
  }
  io::write_plot_csv(out_dir / "plots" / "bpm_pdf.csv", pdf_points);
  io::write_plot_csv(out_dir / "plots" / "far_frr.csv", curve_points);
  io::write_json(out_dir / "config.json", io::config_to_json(config));
  io::write_json(out_dir / "calibration.json", report);
  return report;
}

Protocol protocol_from_string(std::string_view s) {
  if (s == "holdout") return Protocol::Holdout;
  if (s == "loso") return Protocol::Loso;
  if (s == "hust-min") return Protocol::HustMin;
  throw std::invalid_argument("unknown protocol '" + std::string(s) + "' (expected holdout, loso or hust-min)");
}

const char* to_string(Protocol p) noexcept {
  switch (p) {
    case Protocol::Holdout: return "holdout";
    case Protocol::Loso: return "loso";
    case Protocol::HustMin: return "hust-min";
  }
  return "?";
}

json cmd_evaluate(const std::optional<fs::path>& model_path, const fs::path& manifest_path, Protocol protocol,
                  const RunConfig& config, const fs::path& out_dir) {
  const auto manifest = io::load_manifest(manifest_path);
  if (manifest.entries.empty()) throw io::IoError("'" + manifest_path.string() + "': manifest has no entries");
  if (protocol != Protocol::Loso && !model_path) {
    throw std::invalid_argument(std::string(to_string(protocol)) + " evaluation needs --model");
  }
  const auto samples = io::load_samples(manifest);
  std::vector<int> labels;
  for (const auto& s : samples) labels.push_back(s.label);
  const double threshold = config.events.threshold;

  json report{{"protocol", to_string(protocol)}, {"method", "ALEBk"}, {"eye_mode", "2 eyes"}, {"samples", samples.size()}};

  if (protocol == Protocol::Holdout) {
    const auto model = load_model(*model_path);
    report["metrics"] = metrics_report(model.predict_batch(samples), labels, threshold);
  } else if (protocol == Protocol::Loso) {
    std::vector<std::string> subjects;
    for (const auto& s : samples) subjects.push_back(s.subject_id);
    const auto folds = eval::loso_folds(subjects);
    std::vector<double> pooled_scores;
    std::vector<int> pooled_labels;
    report["folds"] = json::array();
    for (std::size_t k = 0; k < folds.size(); ++k) {
      const auto& f = folds[k];
      const auto train_set = subset(samples, f.train);
      const auto test_set = subset(samples, f.test);
      auto model = blink::build_model(config.seed + k);
      blink::TrainConfig tc = config.train;
      tc.seed = config.seed + k;
      blink::TrainResult tr;
      try {
        tr = blink::train(model, train_set, tc);
      } catch (const std::invalid_argument& e) {
        throw std::invalid_argument("loso fold '" + f.subject + "': " + e.what());
      }
      const auto scores = model.predict_batch(test_set);
      std::vector<int> fold_labels;
      for (std::size_t i : f.test) fold_labels.push_back(labels[i]);
      pooled_scores.insert(pooled_scores.end(), scores.begin(), scores.end());
      pooled_labels.insert(pooled_labels.end(), fold_labels.begin(), fold_labels.end());
      report["folds"].push_back({{"subject", f.subject},
                                 {"train", f.train},
                                 {"test", f.test},
                                 {"epochs_run", tr.history.size()},
                                 {"metrics", metrics_report(scores, fold_labels, threshold)}});
    }
    report["pooled"] = metrics_report(pooled_scores, pooled_labels, threshold);
  } else {
    std::vector<std::string> order;
    std::map<std::string, std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
      const auto& seq = manifest.entries[i].sequence;
      if (!seq) throw io::IoError("'" + manifest_path.string() + "': entry " + std::to_string(i) + " has no sequence id");
      if (!members.count(*seq)) order.push_back(*seq);
      members[*seq].push_back(i);
    }
    const auto model = load_model(*model_path);
    const auto scores = model.predict_batch(samples);
    std::vector<double> seq_scores;
    std::vector<int> seq_labels;
    report["decisions"] = json::array();
    for (const auto& id : order) {
      temporal::ScoreSequence seq;
      seq.fps = config.fps;
      int label = 0;
      for (std::size_t i : members[id]) {
        seq.scores.push_back(scores[i]);
        label = std::max(label, labels[i]);
      }
      const double s = temporal::aggregate_sample_score(seq, temporal::Orientation::BlinkEvidence);
      seq_scores.push_back(s);
      seq_labels.push_back(label);
      report["decisions"].push_back({{"sequence", id},
                                     {"subject", manifest.entries[members[id].front()].subject},
                                     {"frames", seq.scores.size()},
                                     {"sample_score", s},
                                     {"decision", s >= threshold ? 1 : 0},
                                     {"label", label}});
    }
    report["sequences"] = order.size();
    report["metrics"] = metrics_report(seq_scores, seq_labels, threshold);
  }
  io::write_json(out_dir / "metrics.json", report);
  return report;
}

fs::path cmd_synth(const SynthOptions& o, const fs::path& out_dir, std::uint64_t seed) {
  if (o.kind == "eyes") return synth::write_eye_dataset(out_dir, o.count, o.subjects, seed);
  if (o.kind == "sequences") return synth::write_sequence_dataset(out_dir, o.count, o.subjects, o.frames, seed);
  if (o.kind == "sessions") {
    synth::SessionSpec spec;
    spec.minutes = o.minutes;
    spec.normal_fraction = o.normal_fraction;
    return synth::write_session_dataset(out_dir, o.count, spec, seed);
  }
  if (o.kind == "frames") {
    synth::FrameSpec spec;
    spec.frames = o.frames;
    for (std::size_t f = o.frames / 2; f < std::min(o.frames, o.frames / 2 + 3); ++f) spec.closed.push_back(f);
    synth::write_frame_dataset(out_dir, spec, seed);
    return out_dir / "landmarks.json";
  }
  throw std::invalid_argument("unknown synth kind '" + o.kind + "' (expected eyes, sequences, sessions or frames)");
}

}  // namespace alebk::app
