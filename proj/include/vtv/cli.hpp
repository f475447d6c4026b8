#ifndef VTV_CLI_HPP
#define VTV_CLI_HPP

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "vtv/degrade.hpp"
#include "vtv/solver.hpp"

namespace vtv::cli {

// Stable exit-code contract.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNotConverged = 2;
inline constexpr int kExitSelftestFailed = 3;

enum class Task { Denoise, Deblur, Selftest };

struct RunConfig {
  Task task = Task::Denoise;
  /// Clean images to degrade; empty means the built-in synthetic scene.
  std::vector<std::filesystem::path> inputs;
  /// When set, the single input is an observation and this is its ground truth.
  std::optional<std::filesystem::path> ref;
  std::filesystem::path out_dir = ".";
  std::optional<std::filesystem::path> bank_path;
  SolverConfig solver;
  NoiseSpec noise;
  int blur_len = 9;
  bool trace = false;
  bool dump_features = false;
  int jobs = 1;
  bool perturb_bank = false;
  int selftest_min_size = 4;
};

/// Parses argv (flags override --config JSON, which overrides the task
/// presets). Throws ConfigError on invalid input; CLI11's help request is
/// reported by returning std::nullopt after printing to `out`.
std::optional<RunConfig> parse_args(int argc, const char* const* argv, std::ostream& out);

/// Effective configuration as the JSON document --config accepts.
std::string config_to_json(const RunConfig& cfg);

std::string task_name(Task task);

int cmd_denoise(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_deblur(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_selftest(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Full entry point: parse, dispatch, map exceptions to exit codes.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace vtv::cli

#endif  // VTV_CLI_HPP
