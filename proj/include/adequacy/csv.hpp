#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "adequacy/types.hpp"

namespace adequacy::csv {

// A parsed CSV file with a header row. Cells are raw, whitespace-trimmed text.
struct Table {
  std::string file;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> lines;  // 1-based source line of each row

  std::optional<std::size_t> column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    return std::nullopt;
  }
};

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string> split(std::string_view line, char sep = ',') {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    std::size_t pos = line.find(sep, start);
    std::string_view cell = line.substr(start, pos == std::string_view::npos ? pos : pos - start);
    out.emplace_back(trim(cell));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline Table parse(std::istream& in, std::string display_name) {
  Table t;
  t.file = std::move(display_name);
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    auto cells = split(line);
    if (!have_header) {
      t.header = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != t.header.size())
      throw InputError(t.file, lineno, "",
                       "expected " + std::to_string(t.header.size()) + " cells, found " +
                           std::to_string(cells.size()));
    t.rows.push_back(std::move(cells));
    t.lines.push_back(lineno);
  }
  if (!have_header) throw InputError(t.file, 0, "", "missing header row");
  return t;
}

inline Table read(const std::filesystem::path& path, std::string display_name) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(display_name, 0, "", "cannot open file '" + path.string() + "'");
  return parse(in, std::move(display_name));
}

// Locale-independent; rejects trailing garbage, accepts inf/nan spellings.
inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::optional<long long> parse_int(std::string_view s) {
  s = trim(s);
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

// Fixed textual form for every number the tool writes: 12 significant digits.
inline std::string format(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";  // folds -0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// Rounds to the value a reader obtains from format(v).
inline double round12(double v) {
  if (!std::isfinite(v)) return v;
  return *parse_double(format(v));
}

// Accumulates rows in memory; writes them in one shot.
class Writer {
 public:
  explicit Writer(std::vector<std::string> header) { row(header); }

  Writer& row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
    return *this;
  }

  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
};

}  // namespace adequacy::csv
