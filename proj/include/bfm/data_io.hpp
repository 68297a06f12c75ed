#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "bfm/dataset.hpp"
#include "bfm/error.hpp"

namespace bfm {

// Dataset files:
//
//   # format: bfm-dataset/1
//   # name: <text>
//   # time_unit: <text>
//   # cause_labels: <text>
//   # note: <text>            (any number, optional)
//   time,status
//   <time>,<c1|c2|cu|cen>
//
// A tab may replace the comma. Blank lines are ignored.

inline constexpr std::string_view kDatasetFormat = "bfm-dataset/1";

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

inline std::vector<std::string_view> split_fields(std::string_view line, char delim) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i)
    if (i == line.size() || line[i] == delim) {
      out.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  return out;
}

inline std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '&') out += "&amp;";
    else if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else out += c;
  }
  return out;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace detail

inline const char* status_code(Status s) {
  switch (s) {
    case Status::failure_cause1: return "c1";
    case Status::failure_cause2: return "c2";
    case Status::failure_cause_unknown: return "cu";
    case Status::censored: return "cen";
  }
  return "";
}

inline Dataset parse_dataset_text(std::string_view text) {
  Dataset d;
  bool saw_header_row = false, saw_format = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view raw = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    const std::string_view line = detail::trim(raw);
    if (line.empty()) continue;
    if (line.front() == '#') {
      const std::string_view body = detail::trim(line.substr(1));
      const auto colon = body.find(':');
      if (colon == std::string_view::npos) continue;
      const std::string key(detail::trim(body.substr(0, colon)));
      const std::string value(detail::trim(body.substr(colon + 1)));
      if (key == "format") {
        if (value != kDatasetFormat) throw ParseError(line_no, 1, "unsupported format '" + value + "'");
        saw_format = true;
      } else if (key == "name") d.name = value;
      else if (key == "time_unit") d.time_unit = value;
      else if (key == "cause_labels") d.cause_labels = value;
      else if (key == "note") d.notes.push_back(value);
      continue;
    }
    const char delim = line.find('\t') != std::string_view::npos ? '\t' : ',';
    const auto fields = detail::split_fields(line, delim);
    if (!saw_header_row) {
      if (fields.size() != 2 || detail::trim(fields[0]) != "time" || detail::trim(fields[1]) != "status")
        throw ParseError(line_no, 1, "expected header row 'time,status'");
      saw_header_row = true;
      continue;
    }
    if (fields.size() != 2)
      throw ParseError(line_no, 1, "expected 2 fields, found " + std::to_string(fields.size()));
    double t = 0.0;
    if (!detail::parse_double(fields[0], t)) throw ParseError(line_no, 1, "time is not a number");
    if (!(t > 0.0) || !std::isfinite(t)) throw ParseError(line_no, 1, "time must be positive and finite");
    const std::string_view code = detail::trim(fields[1]);
    const std::size_t col = fields[0].size() + 2;
    Status s;
    if (code == "c1") s = Status::failure_cause1;
    else if (code == "c2") s = Status::failure_cause2;
    else if (code == "cu") s = Status::failure_cause_unknown;
    else if (code == "cen") s = Status::censored;
    else throw ParseError(line_no, col, "unknown status code '" + std::string(code) + "'");
    d.observations.push_back({t, s});
  }
  if (!saw_format && !saw_header_row) throw ParseError(1, 1, "empty dataset file");
  if (!saw_header_row) throw ParseError(line_no, 1, "missing header row 'time,status'");
  if (d.observations.empty()) throw ParseError(line_no, 1, "no observations");
  d.validate();
  return d;
}

inline Dataset parse_dataset(const std::string& path) {
  const std::string text = detail::read_file(path);
  try {
    return parse_dataset_text(text);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), e.column(), path + ": " + e.reason());
  }
}

inline std::string serialize(const Dataset& d) {
  std::string out;
  out += "# format: " + std::string(kDatasetFormat) + "\n";
  out += "# name: " + d.name + "\n";
  out += "# time_unit: " + d.time_unit + "\n";
  out += "# cause_labels: " + d.cause_labels + "\n";
  for (const auto& n : d.notes) out += "# note: " + n + "\n";
  out += "time,status\n";
  for (const auto& o : d.observations) out += detail::format_double(o.time) + "," + status_code(o.status) + "\n";
  return out;
}

/// Writes to a sibling temporary file and renames it over path.
inline void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
  }
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw DataError("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) throw DataError("cannot rename onto '" + path + "': " + ec.message());
}

/// Path of a dataset shipped in the repository's data directory.
inline std::string bundled_data_path(const std::string& file) {
#ifdef BFM_DATA_DIR
  return std::string(BFM_DATA_DIR) + "/" + file;
#else
  return "data/" + file;
#endif
}

/// Cause-specific failure fractions among failures with a known cause.
inline std::pair<double, double> empirical_risks(const Dataset& d) {
  const auto c = d.counts();
  const std::size_t labelled = c.cause1 + c.cause2;
  if (labelled == 0) throw DataError("empirical_risks: no cause-labelled failures");
  return {static_cast<double>(c.cause1) / labelled, static_cast<double>(c.cause2) / labelled};
}

/// Throws DataError describing the first count that differs.
inline void verify_counts(const Dataset& d, const StatusCounts& expected) {
  const auto c = d.counts();
  auto check = [&](const char* what, std::size_t got, std::size_t want) {
    if (got != want)
      throw DataError("dataset '" + d.name + "': " + what + " count " + std::to_string(got) + ", expected " +
                      std::to_string(want));
  };
  check("cause-1", c.cause1, expected.cause1);
  check("cause-2", c.cause2, expected.cause2);
  check("unknown-cause", c.unknown, expected.unknown);
  check("censored", c.censored, expected.censored);
}

enum class SeriesKind { frf, mrl, rf, ttt, ecdf };

inline const char* to_string(SeriesKind k) {
  switch (k) {
    case SeriesKind::frf: return "frf";
    case SeriesKind::mrl: return "mrl";
    case SeriesKind::rf: return "rf";
    case SeriesKind::ttt: return "ttt";
    case SeriesKind::ecdf: return "ecdf";
  }
  return "";
}

inline SeriesKind series_kind_from(std::string_view s) {
  for (auto k : {SeriesKind::frf, SeriesKind::mrl, SeriesKind::rf, SeriesKind::ttt, SeriesKind::ecdf})
    if (s == to_string(k)) return k;
  throw ConfigError("unknown series kind '" + std::string(s) + "'");
}

struct PlotSeries {
  std::string name;
  SeriesKind kind = SeriesKind::frf;
  std::vector<double> x, y;

  void validate() const {
    if (x.size() != y.size()) throw ConfigError("series '" + name + "': x and y lengths differ");
    for (std::size_t i = 1; i < x.size(); ++i)
      if (!(x[i] > x[i - 1])) throw ConfigError("series '" + name + "': x must be strictly increasing");
    if (name.find(',') != std::string::npos || name.find('\n') != std::string::npos)
      throw ConfigError("series name must not contain commas or newlines");
  }
  bool operator==(const PlotSeries&) const = default;
};

inline std::string series_to_csv(const std::vector<PlotSeries>& series) {
  std::string out = "name,kind,x,y\n";
  for (const auto& s : series) {
    s.validate();
    for (std::size_t i = 0; i < s.x.size(); ++i)
      out += s.name + "," + to_string(s.kind) + "," + detail::format_double(s.x[i]) + "," +
             detail::format_double(s.y[i]) + "\n";
  }
  return out;
}

inline std::vector<PlotSeries> parse_series_csv(std::string_view text) {
  std::vector<PlotSeries> out;
  std::size_t pos = 0, line_no = 0;
  bool header = false;
  while (pos < text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = detail::trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    if (!header) {
      if (line != "name,kind,x,y") throw ParseError(line_no, 1, "expected header 'name,kind,x,y'");
      header = true;
      continue;
    }
    const auto f = detail::split_fields(line, ',');
    if (f.size() != 4) throw ParseError(line_no, 1, "expected 4 fields");
    double x = 0.0, y = 0.0;
    if (!detail::parse_double(f[2], x)) throw ParseError(line_no, 3, "x is not a number");
    if (!detail::parse_double(f[3], y)) throw ParseError(line_no, 4, "y is not a number");
    const std::string name(f[0]);
    const SeriesKind kind = series_kind_from(f[1]);
    if (out.empty() || out.back().name != name || out.back().kind != kind) out.push_back({name, kind, {}, {}});
    out.back().x.push_back(x);
    out.back().y.push_back(y);
  }
  if (!header) throw ParseError(1, 1, "empty series file");
  return out;
}

/// Minimal line chart: shared linear axes, one polyline per series, legend.
inline std::string series_to_svg(const std::vector<PlotSeries>& series) {
  static const char* colours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  const double w = 640, h = 400, left = 60, right = 160, top = 20, bottom = 40;
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series) {
    s.validate();
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  if (!(x1 > x0)) x0 = 0, x1 = 1;
  if (!(y1 > y0)) y0 = 0, y1 = 1;
  auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * (w - left - right); };
  auto py = [&](double y) { return h - bottom - (y - y0) / (y1 - y0) * (h - top - bottom); };
  char buf[256];
  std::string out;
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" font-family=\"sans-serif\" "
                "font-size=\"11\">\n",
                w, h);
  out += buf;
  std::snprintf(buf, sizeof buf, "<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" fill=\"none\" stroke=\"#000\"/>\n",
                left, top, w - left - right, h - top - bottom);
  out += buf;
  std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\">%.4g</text><text x=\"%.1f\" y=\"%.1f\" text-anchor=\"end\">%.4g</text>\n",
                left, h - bottom + 14, x0, w - right, h - bottom + 14, x1);
  out += buf;
  std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"end\">%.4g</text><text x=\"%.1f\" y=\"%.1f\" text-anchor=\"end\">%.4g</text>\n",
                left - 4, h - bottom, y0, left - 4, top + 10, y1);
  out += buf;
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* c = colours[k % 10];
    out += "<polyline fill=\"none\" stroke=\"" + std::string(c) + "\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(s.x[i]), py(s.y[i]));
      out += buf;
    }
    out += "\"/>\n";
    const double ly = top + 14.0 * (k + 1);
    std::snprintf(buf, sizeof buf, "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"%s\"/>",
                  w - right + 8, ly - 4, w - right + 28, ly - 4, c);
    out += buf;
    std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%.1f\">", w - right + 32, ly);
    out += buf;
    out += detail::xml_escape(s.name) + " (" + to_string(s.kind) + ")</text>\n";
  }
  out += "</svg>\n";
  return out;
}

enum class SeriesFormat { csv, svg };

inline void emit_series(const std::vector<PlotSeries>& series, const std::string& path, SeriesFormat format) {
  write_file_atomic(path, format == SeriesFormat::csv ? series_to_csv(series) : series_to_svg(series));
}

}  // namespace bfm
