#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace gpd::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kConfigError = 2, kNumericalError = 3 };

/// Entry point of the `gpd` executable. Returns the process exit code.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

/// Flat key=value file; '#' starts a comment. Throws ParseError.
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);

/// Scenario files (*.scenario) in a directory, sorted by name.
std::vector<std::filesystem::path> scenario_files(const std::filesystem::path& dir);

/// $GPD_OUT_ROOT, or "." when unset.
std::filesystem::path output_root();

}  // namespace gpd::cli
