#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace helios::cli {

enum ExitCode : int { kOk = 0, kValidationFailure = 1, kUsage = 2, kNumerical = 3 };

struct RunOptions {
  std::filesystem::path out_dir = ".";
  bool plot = false;
  std::optional<std::uint64_t> seed;  ///< overrides the ensemble and Monte Carlo seeds
  std::optional<std::filesystem::path> tolerances;  ///< JSON object of validate tolerance overrides
};

int cmd_trace(const std::filesystem::path& scenario, const RunOptions& options);
int cmd_transport(const std::filesystem::path& scenario, const RunOptions& options);
int cmd_measure(const std::filesystem::path& scenario, const RunOptions& options);
int cmd_wigner(const std::filesystem::path& scenario, const RunOptions& options);
int cmd_validate(const std::string& suite, const RunOptions& options);

/// Dispatches `command` and converts every failure into an exit code, with
/// a one-line diagnostic on stderr.
int run_command(const std::string& command, const std::string& argument, const RunOptions& options);

}  // namespace helios::cli
