#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "config.hpp"

namespace pnshape::cli {

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitInvariant = 2, kExitInsufficient = 3 };

/// Command-line flags; each one overrides the matching config key.
struct Overrides {
    std::optional<std::string> config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<unsigned> workers;
    bool net = false;
};

/// Loads the config file (if any) and applies the flag overrides.
RunConfig build_config(const Overrides& o);

/// The four subcommands. Each reads its keys, writes `manifest.json` to the
/// output directory, then its artifacts. They throw the library exceptions;
/// run_subcommand maps those to exit codes.
int cmd_optimize(RunConfig& cfg, std::ostream& log);
int cmd_evaluate(RunConfig& cfg, std::ostream& log);
int cmd_validate(RunConfig& cfg, std::ostream& log);
int cmd_fec(RunConfig& cfg, std::ostream& log);

int run_subcommand(const std::string& name, const Overrides& o, std::ostream& log, std::ostream& err);

const char* tool_version();

} // namespace pnshape::cli
