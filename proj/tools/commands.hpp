#pragma once

/// @file commands.hpp
/// @brief Subcommands of the cfront tool. Each command resolves its schema,
/// writes its outputs into one directory and closes it with a manifest.

#include "cfront/config.hpp"
#include "cfront/io.hpp"

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace cfront::cli {

/// Exit codes.
inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitRejected = 2;

struct Invocation {
    std::string command;
    std::filesystem::path out;
    Config raw;
    int jobs = 1;
    std::vector<std::string> inputs;  ///< report only
    std::ostream* log = nullptr;      ///< progress lines; null for silence
};

/// Names accepted by run_command.
const std::vector<std::string>& command_names();

/// Schema of a computing command (not sweep or report).
Schema command_schema(const std::string& command);

/// Runs one command end to end, always leaving a manifest in `out`
/// (unless the directory itself cannot be written). Returns the exit code.
int run_command(const Invocation& inv);

}  // namespace cfront::cli
