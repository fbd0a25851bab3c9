#pragma once

#include "fits_cli/config.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace fits::cli {

struct Invocation {
    std::string command;
    Config config; ///< resolved against the command schema
    std::filesystem::path out_root = "runs";
    std::filesystem::path data_root; ///< empty: relative data paths resolve against the cwd only
    std::optional<std::filesystem::path> resume; ///< grid: earlier run directory
};

/// Runs one command and returns its committed run directory.
std::filesystem::path run_command(const Invocation& inv, std::ostream& log);

/// Full command-line entry point. Exit codes: 0 success, 2 config error, 3 runtime error.
int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err);

} // namespace fits::cli
