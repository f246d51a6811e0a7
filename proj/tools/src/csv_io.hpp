#pragma once

#include "relugeo/types.hpp"

#include <stdexcept>
#include <string>

namespace relugeo::cli {

class CsvError : public std::runtime_error {
 public:
  explicit CsvError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Comma-separated numeric matrix, no header, one row per line.
Mat read_matrix(const std::string& path);
Mat parse_matrix(const std::string& text, const std::string& origin);
void write_matrix(const std::string& path, const Mat& m);
std::string format_matrix(const Mat& m);

}  // namespace relugeo::cli
