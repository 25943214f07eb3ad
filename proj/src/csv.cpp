#include "epmc/csv.hpp"

#include <cstdio>

#include "epmc/errors.hpp"

namespace epmc::csv {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Writer::Writer(const std::string& path) : out_(path, std::ios::binary) {
  if (!out_) throw Error("csv: cannot open '" + path + "' for writing");
}

void Writer::comment(const std::string& text) { out_ << "# " << text << "\n"; }

void Writer::header(const std::vector<std::string>& columns) { row(columns); }

void Writer::row(const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    out_ << cells[i];
  }
  out_ << '\n';
}

void Writer::row(const std::vector<double>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    out_ << format_double(cells[i]);
  }
  out_ << '\n';
}

std::vector<Line> read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("parse: cannot open '" + path + "'");
  std::vector<Line> lines;
  std::string raw;
  std::size_t number = 0;
  while (std::getline(in, raw)) {
    ++number;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    std::string trimmed = raw;
    const auto first = trimmed.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    if (trimmed[first] == '#') continue;
    Line line;
    line.number = number;
    std::string cell;
    for (char c : raw) {
      if (c == ',') {
        line.cells.push_back(cell);
        cell.clear();
      } else {
        cell.push_back(c);
      }
    }
    line.cells.push_back(cell);
    lines.push_back(std::move(line));
  }
  return lines;
}

}  // namespace epmc::csv
