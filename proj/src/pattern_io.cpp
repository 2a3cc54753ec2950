#include "pattern_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <vector>

namespace gibbsfit {

namespace {

std::string trim(std::string s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      fields.push_back(trim(line.substr(start)));
      break;
    }
    fields.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return fields;
}

double parse_number(const std::string& field, std::size_t line_no,
                    const char* what) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end) {
    raise(ErrorCode::parse, "line " + std::to_string(line_no) +
                                ": cannot parse " + what + " '" + field + "'");
  }
  return value;
}

}  // namespace

PointPattern read_pattern(std::istream& in, const MarkSpace& marks,
                          const Window& window) {
  const bool has_mark = marks.kind != MarkKind::unit;
  std::string line;
  std::size_t line_no = 0;

  if (!std::getline(in, line)) {
    raise(ErrorCode::parse, "line 1: missing header");
  }
  ++line_no;
  const auto header = split_row(line);
  const std::vector<std::string> expected =
      has_mark ? std::vector<std::string>{"x", "y", "mark"}
               : std::vector<std::string>{"x", "y"};
  if (header != expected) {
    raise(ErrorCode::parse,
          std::string("line 1: expected header '") +
              (has_mark ? "x,y,mark" : "x,y") + "'");
  }

  std::vector<MarkedPoint> points;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_row(line);
    if (fields.size() != expected.size()) {
      raise(ErrorCode::parse, "line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(expected.size()) + " fields");
    }
    MarkedPoint p;
    p.x = parse_number(fields[0], line_no, "x");
    p.y = parse_number(fields[1], line_no, "y");
    if (has_mark) p.mark = parse_number(fields[2], line_no, "mark");
    if (!window.contains(p.location())) {
      raise(ErrorCode::parse, "line " + std::to_string(line_no) +
                                  ": point lies outside the window");
    }
    if (!marks.mark_valid(p.mark)) {
      raise(ErrorCode::parse, "line " + std::to_string(line_no) +
                                  ": invalid mark '" +
                                  (has_mark ? fields[2] : std::string("0")) +
                                  "'");
    }
    points.push_back(p);
  }
  return PointPattern(std::move(points), window, marks);
}

PointPattern read_pattern_file(const std::string& path, const MarkSpace& marks,
                               const Window& window) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::io, "cannot open '" + path + "'");
  return read_pattern(in, marks, window);
}

std::string format_coordinate(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_pattern(std::ostream& out, const PointPattern& pattern) {
  const bool has_mark = pattern.mark_space().kind != MarkKind::unit;
  out << (has_mark ? "x,y,mark\n" : "x,y\n");
  for (const MarkedPoint& p : pattern.points()) {
    out << format_coordinate(p.x) << ',' << format_coordinate(p.y);
    if (has_mark) out << ',' << format_coordinate(p.mark);
    out << '\n';
  }
}

void write_pattern_file(const std::string& path, const PointPattern& pattern) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorCode::io, "cannot open '" + path + "' for writing");
  write_pattern(out, pattern);
  if (!out) raise(ErrorCode::io, "write failed for '" + path + "'");
}

}  // namespace gibbsfit
