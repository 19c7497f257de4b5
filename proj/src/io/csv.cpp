#include "alebk/io/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include "alebk/io/files.hpp"

namespace alebk::io {

namespace fs = std::filesystem;

std::size_t CsvTable::column(std::string_view name, std::string_view source) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw IoError(std::string(source) + ": missing column '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - header.begin());
}

namespace {

std::vector<std::string> split_line(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.emplace_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

}  // namespace

CsvTable parse_csv(std::string_view text, std::string_view source) {
  CsvTable table;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (line.find('"') != std::string_view::npos) {
      throw IoError(std::string(source) + ":" + std::to_string(line_no) + ": quoted fields are not supported");
    }
    auto fields = split_line(line);
    if (table.header.empty()) {
      table.header = std::move(fields);
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw IoError(std::string(source) + ":" + std::to_string(line_no) + ": expected " +
                    std::to_string(table.header.size()) + " fields, got " + std::to_string(fields.size()));
    }
    table.rows.push_back(std::move(fields));
  }
  if (table.header.empty()) throw IoError(std::string(source) + ": missing header row");
  return table;
}

std::string format_csv(const CsvTable& table) {
  std::string out;
  auto emit = [&](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (fields[i].find_first_of(",\"\n\r") != std::string::npos) {
        throw IoError("csv field '" + fields[i] + "' contains a separator or quote");
      }
      if (i) out += ',';
      out += fields[i];
    }
    out += '\n';
  };
  emit(table.header);
  for (const auto& r : table.rows) {
    if (r.size() != table.header.size()) throw IoError("csv row width does not match the header");
    emit(r);
  }
  return out;
}

CsvTable read_csv(const fs::path& path) { return parse_csv(read_file(path), path.string()); }

void write_csv(const fs::path& path, const CsvTable& table) { atomic_write(path, format_csv(table)); }

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s, std::string_view context) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw IoError(std::string(context) + ": '" + std::string(s) + "' is not a number");
  }
  return v;
}

std::size_t parse_index(std::string_view s, std::string_view context) {
  std::size_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw IoError(std::string(context) + ": '" + std::string(s) + "' is not a non-negative integer");
  }
  return v;
}

void write_score_csv(const fs::path& path, const std::vector<ScoreRow>& rows) {
  CsvTable t{{"frame_index", "score", "status", "image"}, {}};
  for (const auto& r : rows) {
    t.rows.push_back({std::to_string(r.frame_index), r.score ? format_double(*r.score) : "",
                      r.score ? "ok" : "skipped", r.image});
  }
  write_csv(path, t);
}

std::vector<ScoreRow> read_score_csv(const fs::path& path) {
  const auto t = read_csv(path);
  const std::string src = path.string();
  const auto fi = t.column("frame_index", src), si = t.column("score", src);
  const auto ii = std::find(t.header.begin(), t.header.end(), "image");
  std::vector<ScoreRow> rows;
  for (const auto& r : t.rows) {
    ScoreRow row;
    row.frame_index = parse_index(r[fi], src);
    if (!r[si].empty()) row.score = parse_double(r[si], src);
    if (ii != t.header.end()) row.image = r[static_cast<std::size_t>(ii - t.header.begin())];
    rows.push_back(std::move(row));
  }
  return rows;
}

temporal::ScoreSequence to_sequence(const std::vector<ScoreRow>& rows, double fps) {
  std::vector<const ScoreRow*> order;
  for (const auto& r : rows) order.push_back(&r);
  std::stable_sort(order.begin(), order.end(),
                   [](const ScoreRow* a, const ScoreRow* b) { return a->frame_index < b->frame_index; });
  temporal::ScoreSequence seq;
  seq.fps = fps;
  seq.scores.reserve(order.size());
  for (const auto* r : order) seq.scores.push_back(r->score.value_or(0.0));
  return seq;
}

void write_attention_csv(const fs::path& path, const attention::AttentionRecord& record) {
  CsvTable t{{"timestamp_s", "attention"}, {}};
  for (std::size_t i = 0; i < record.values.size(); ++i) {
    t.rows.push_back({std::to_string(i), format_double(record.values[i])});
  }
  write_csv(path, t);
}

attention::AttentionRecord read_attention_csv(const fs::path& path, std::string session_id) {
  const auto t = read_csv(path);
  const std::string src = path.string();
  const auto ti = t.column("timestamp_s", src), ai = t.column("attention", src);
  attention::AttentionRecord rec{std::move(session_id), {}};
  double last = -std::numeric_limits<double>::infinity();
  for (const auto& r : t.rows) {
    const double ts = parse_double(r[ti], src);
    if (!(ts > last)) throw IoError(src + ": timestamps must be strictly increasing");
    last = ts;
    rec.values.push_back(parse_double(r[ai], src));
  }
  try {
    rec.validate();
  } catch (const std::invalid_argument& e) {
    throw IoError(src + ": " + e.what());
  }
  return rec;
}

void write_history_csv(const fs::path& path, const std::vector<blink::EpochStats>& history) {
  CsvTable t{{"epoch", "loss", "accuracy"}, {}};
  for (const auto& h : history) t.rows.push_back({std::to_string(h.epoch), format_double(h.loss), format_double(h.accuracy)});
  write_csv(path, t);
}

std::vector<blink::EpochStats> read_history_csv(const fs::path& path) {
  const auto t = read_csv(path);
  const std::string src = path.string();
  const auto ei = t.column("epoch", src), li = t.column("loss", src), ai = t.column("accuracy", src);
  std::vector<blink::EpochStats> out;
  for (const auto& r : t.rows) out.push_back({parse_index(r[ei], src), parse_double(r[li], src), parse_double(r[ai], src)});
  return out;
}

void write_events_csv(const fs::path& path, const std::vector<temporal::BlinkEvent>& events, double fps) {
  CsvTable t{{"start_frame", "end_frame", "duration_frames", "start_s", "end_s", "peak"}, {}};
  for (const auto& e : events) {
    t.rows.push_back({std::to_string(e.start), std::to_string(e.end), std::to_string(e.duration()),
                      format_double(static_cast<double>(e.start) / fps),
                      format_double(static_cast<double>(e.end + 1) / fps), format_double(e.peak)});
  }
  write_csv(path, t);
}

std::vector<temporal::BlinkEvent> read_events_csv(const fs::path& path) {
  const auto t = read_csv(path);
  const std::string src = path.string();
  const auto si = t.column("start_frame", src), ei = t.column("end_frame", src), pi = t.column("peak", src);
  std::vector<temporal::BlinkEvent> out;
  for (const auto& r : t.rows) {
    temporal::BlinkEvent e{parse_index(r[si], src), parse_index(r[ei], src), parse_double(r[pi], src)};
    if (e.end < e.start) throw IoError(src + ": event ends before it starts");
    out.push_back(e);
  }
  return out;
}

void write_bpm_csv(const fs::path& path, const std::vector<temporal::MinuteWindow>& windows) {
  CsvTable t{{"window", "first_frame", "last_frame", "bpm"}, {}};
  for (const auto& w : windows) {
    t.rows.push_back({std::to_string(w.index), std::to_string(w.first_frame), std::to_string(w.last_frame),
                      format_double(w.bpm)});
  }
  write_csv(path, t);
}

std::vector<temporal::MinuteWindow> read_bpm_csv(const fs::path& path) {
  const auto t = read_csv(path);
  const std::string src = path.string();
  const auto wi = t.column("window", src), fi = t.column("first_frame", src), li = t.column("last_frame", src),
             bi = t.column("bpm", src);
  std::vector<temporal::MinuteWindow> out;
  for (const auto& r : t.rows) {
    out.push_back({parse_index(r[wi], src), parse_double(r[bi], src), parse_index(r[fi], src), parse_index(r[li], src)});
  }
  return out;
}

void write_plot_csv(const fs::path& path, const std::vector<PlotPoint>& points) {
  CsvTable t{{"x", "y", "series"}, {}};
  for (const auto& p : points) t.rows.push_back({format_double(p.x), format_double(p.y), p.series});
  write_csv(path, t);
}

std::vector<PlotPoint> read_plot_csv(const fs::path& path) {
  const auto t = read_csv(path);
  const std::string src = path.string();
  const auto xi = t.column("x", src), yi = t.column("y", src), si = t.column("series", src);
  std::vector<PlotPoint> out;
  for (const auto& r : t.rows) out.push_back({parse_double(r[xi], src), parse_double(r[yi], src), r[si]});
  return out;
}

}  // namespace alebk::io
