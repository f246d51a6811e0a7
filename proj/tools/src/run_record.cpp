#include "run_record.hpp"

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace relugeo::cli {

RunRecord::RunRecord(std::string command) : start_(std::chrono::steady_clock::now()) {
  record_["schema_version"] = kSchemaVersion;
  record_["artifact_version"] = kArtifactVersion;
  record_["command"] = std::move(command);
  record_["config"] = Json::object();
  record_["seed"] = 0;
  record_["input_digests"] = Json::object();
  record_["results"] = Json::object();
}

void RunRecord::set_seed(std::uint64_t seed) { record_["seed"] = seed; }

void RunRecord::add_config(const std::string& key, const Json& value) {
  record_["config"][key] = value;
}

void RunRecord::add_input_digest(const std::string& role, const std::string& path) {
  record_["input_digests"][role] = file_digest(path);
}

void RunRecord::set_results(Json results) { record_["results"] = std::move(results); }

void RunRecord::finish_and_save(const std::string& path) {
  auto elapsed = std::chrono::steady_clock::now() - start_;
  record_["wall_time_ms"] =
      std::chrono::duration_cast<std::chrono::microseconds>(elapsed).count() / 1000.0;
  auto now = std::chrono::system_clock::now();
  std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::ostringstream ts;
  ts << std::put_time(std::gmtime(&tt), "%FT%TZ");
  record_["timestamp"] = ts.str();

  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error(path + ": cannot open for writing");
  f << record_.dump(2) << '\n';
}

std::string file_digest(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error(path + ": cannot open for digest");
  std::uint64_t h = 0xcbf29ce484222325ull;
  char buf[4096];
  while (f.read(buf, sizeof(buf)) || f.gcount() > 0) {
    for (std::streamsize i = 0; i < f.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ull;
    }
    if (!f) break;
  }
  std::ostringstream out;
  out << "fnv1a:" << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

Json matrix_to_json(const Mat& m) {
  Json rows = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json vector_to_json(const Vec& v) {
  Json arr = Json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

}  // namespace relugeo::cli
