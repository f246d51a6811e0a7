#include "csv_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace relugeo::cli {

Mat parse_matrix(const std::string& text, const std::string& origin) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    // skip blank lines
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::size_t at = 0;
    while (at <= line.size()) {
      std::size_t comma = line.find(',', at);
      std::string cell = line.substr(at, comma == std::string::npos ? std::string::npos
                                                                    : comma - at);
      std::size_t b = cell.find_first_not_of(" \t");
      std::size_t e = cell.find_last_not_of(" \t");
      if (b == std::string::npos)
        throw CsvError(origin + ":" + std::to_string(lineno) + ": empty cell");
      cell = cell.substr(b, e - b + 1);
      try {
        std::size_t used = 0;
        double v = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
        row.push_back(v);
      } catch (const std::exception&) {
        throw CsvError(origin + ":" + std::to_string(lineno) + ": bad number '" + cell + "'");
      }
      if (comma == std::string::npos) break;
      at = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw CsvError(origin + ":" + std::to_string(lineno) + ": ragged row");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw CsvError(origin + ": no data rows");
  Mat m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j)
      m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return m;
}

Mat read_matrix(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw CsvError(path + ": cannot open");
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_matrix(buf.str(), path);
}

std::string format_matrix(const Mat& m) {
  std::ostringstream out;
  out.precision(17);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << m(i, j);
    }
    out << '\n';
  }
  return out.str();
}

void write_matrix(const std::string& path, const Mat& m) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw CsvError(path + ": cannot open for writing");
  f << format_matrix(m);
}

}  // namespace relugeo::cli
