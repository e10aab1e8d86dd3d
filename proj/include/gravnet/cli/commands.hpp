#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace gravnet::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitDegenerate = 3;
inline constexpr int kExitIo = 4;

struct EtlRailOptions {
  std::filesystem::path raw;
  std::optional<std::filesystem::path> crosswalk;
  std::optional<std::filesystem::path> universe;  // CSV with a `region` column
  std::filesystem::path out;
};

struct ClusterOptions {
  std::filesystem::path sci;
  std::string measure = "sci";
  std::vector<int> k;
  std::filesystem::path out;
};

struct FitOptions {
  std::filesystem::path config;
  std::filesystem::path out;
};

struct ForeignShareOptions {
  std::filesystem::path sci;
  std::string measure = "sci";
  std::filesystem::path weights;
  std::string weight_column = "users";
  std::filesystem::path out;
};

struct CorrelateOptions {
  std::vector<std::filesystem::path> inputs;  // one per measure, or one shared
  std::vector<std::string> measures;
  std::filesystem::path out;
};

// Each command writes its outputs and manifest.json into `out` (created
// when absent) and reports progress on `log` unless it is null.
void etl_rail(const EtlRailOptions& opt, std::ostream* log);
void cluster(const ClusterOptions& opt, std::ostream* log);
void fit(const FitOptions& opt, std::ostream* log);
void foreign_share(const ForeignShareOptions& opt, std::ostream* log);
void correlate(const CorrelateOptions& opt, std::ostream* log);

// Full command-line entry point. Returns the process exit code: 0 success,
// 2 validation or usage error, 3 degenerate model, 4 I/O error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Worker cap for column-parallel fits: GRAVNET_THREADS when set and
// positive, else the hardware concurrency.
unsigned worker_limit();

}  // namespace gravnet::cli
