#pragma once

#include "relugeo/types.hpp"

#include <json.hpp>

#include <chrono>
#include <string>

namespace relugeo::cli {

using Json = nlohmann::ordered_json;

inline constexpr const char* kArtifactVersion = "1.0.0";
inline constexpr int kSchemaVersion = 1;

/// Serializable record of one CLI run: command, configuration, input digests,
/// results, timing. Byte-identical across reruns except for the timestamp and
/// wall-time fields.
class RunRecord {
 public:
  explicit RunRecord(std::string command);

  void set_seed(std::uint64_t seed);
  void add_config(const std::string& key, const Json& value);
  void add_input_digest(const std::string& role, const std::string& path);
  void set_results(Json results);
  void finish_and_save(const std::string& path);  // stamps wall time, writes JSON

  Json& results() { return record_["results"]; }

 private:
  Json record_;
  std::chrono::steady_clock::time_point start_;
};

/// FNV-1a 64-bit digest of a file's bytes, as "fnv1a:<hex>".
std::string file_digest(const std::string& path);

Json matrix_to_json(const Mat& m);
Json vector_to_json(const Vec& v);

}  // namespace relugeo::cli
