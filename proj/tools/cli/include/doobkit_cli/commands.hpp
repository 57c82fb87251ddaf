#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "doobkit/errors.hpp"

namespace doobkit::cli {

/// 0 = every check passed, 1 = a mathematical check failed, 2 = bad input.
enum ExitCode : int { kExitOk = 0, kExitCheckFailed = 1, kExitInputError = 2 };

int exit_code_for(ErrorKind kind);

struct RunConfig {
  std::string command;
  std::filesystem::path model;
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
  std::size_t depth_min = 4;
  std::size_t depth_max = 8;
  std::size_t paths = 100000;
  std::vector<double> levels{1.0, 2.0, 4.0, 8.0};
  std::string estimator = "analytic";
  double tol = 1e-10;
  std::size_t trials = 1000;
  unsigned workers = 0;
};

struct CommandResult {
  int exit_code = kExitOk;
  /// JSON summary: command, config echo, verdicts, max violations.
  std::string summary;
  /// Output file name -> contents.
  std::map<std::string, std::string> files;
};

/// Runs one command in memory. Input problems throw doobkit::Error.
CommandResult run_command(const RunConfig& config);

/// "a..b" or "a".
std::pair<std::size_t, std::size_t> parse_depths(const std::string& text);
/// Comma separated numbers.
std::vector<double> parse_levels(const std::string& text);

/// Full command line handling: parses args (without the program name), runs
/// the command, writes files under --out and the summary to `out`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace doobkit::cli
