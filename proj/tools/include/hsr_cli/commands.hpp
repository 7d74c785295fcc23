#pragma once

#include "hsr_cli/config.hpp"

#include <iosfwd>
#include <string>

namespace hsr::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 2,
    kExitIo = 3,
    kExitDivergence = 4,
};

void cmd_simulate(const RunConfig& config, const std::string& out_dir);
void cmd_fuse(const RunConfig& config, const std::string& in_dir, const std::string& out_dir);
void cmd_evaluate(const RunConfig& config, const std::string& reference, const std::string& estimate,
                  const std::string& out_dir);
void cmd_rank_table(const RunConfig& config, const std::string& image, const std::string& out_dir);

/// Parses arguments, dispatches, and maps exceptions to exit codes with a
/// diagnostic on `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace hsr::cli
