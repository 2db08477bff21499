#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "asep/config.hpp"

namespace asep {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kExitOk = 0, kExitCompute = 1, kExitConfig = 2 };

struct RunOutcome {
  int exit_code = kExitOk;
  std::string message;     // empty on success
  std::string output_dir;  // empty when nothing was written
};

// Validates everything first, then runs the subcommand and writes its CSV files plus
// summary.json into the output directory. Never throws. `log` may be null.
RunOutcome run_config(const RunConfig& config, std::ostream* log = nullptr);
// Parses `path` first; a subcommand given here wins over run.subcommand in the file.
RunOutcome run_config_file(const std::string& path, std::optional<Subcommand> subcommand = std::nullopt,
                           std::ostream* log = nullptr);

}  // namespace asep
