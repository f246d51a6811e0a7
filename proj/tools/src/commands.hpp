#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace relugeo::cli {

// Exit codes: 0 completed analysis (any mathematical verdict), 2 parse error,
// 3 dimension mismatch, 4 enumeration cap exceeded without --numeric.
inline constexpr int kExitOk = 0;
inline constexpr int kExitParse = 2;
inline constexpr int kExitShape = 3;
inline constexpr int kExitCap = 4;

struct ConeArgs {
  std::string subcommand;  // dim | member | faces
  std::string sample_file;
  std::string vector_file;
  double tol = -1.0;
  std::string out;
};

struct ImageArgs {
  std::string subcommand;  // member | distance | dim | bound
  std::string sample_file;
  std::string response_file;
  std::int64_t width = 1;
  std::int64_t outputs = 0;  // 0: infer from the response file
  bool numeric = false;
  std::int64_t restarts = 0;  // image dim: trial count
  std::int64_t max_iters = 0;
  std::int64_t inputs = 0;   // bound without a sample file
  std::int64_t samples = 0;  // bound without a sample file
  std::uint64_t seed = 1;
  double tol = -1.0;
  std::string config_file;
  std::string out;
};

struct FitArgs {
  std::string sample_file;
  std::string response_file;
  std::vector<std::int64_t> widths;
  std::string activation = "relu";
  std::int64_t restarts = 0;
  std::int64_t max_iters = 0;
  std::uint64_t seed = 0;
  bool seed_given = false;
  double tol = -1.0;
  std::string config_file;
  std::string out;
};

struct ReplicateArgs {
  std::string target;  // nonclosed | tanh
  std::vector<std::uint64_t> ks;
  double epsilon = 0.05;
  std::int64_t grid = 5;
  bool dump = false;
  std::int64_t restarts = 0;
  std::int64_t max_iters = 0;
  std::uint64_t seed = 1;
  std::string config_file;
  std::string out;
};

int cmd_cone(const ConeArgs& args);
int cmd_image(const ImageArgs& args);
int cmd_fit(const FitArgs& args);
int cmd_replicate(const ReplicateArgs& args);

}  // namespace relugeo::cli
