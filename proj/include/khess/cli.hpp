#pragma once

#include "khess/report.hpp"

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace khess {

enum ExitCode : int {
    kExitOk = 0,
    kExitPropertyFailure = 1,
    kExitNonconvergence = 2,
    kExitConfig = 64,
    kExitIo = 74,
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Command plus fully resolved parameters (defaults, then config file, then flags).
struct RunConfig {
    std::string command;
    Json params;

    std::uint64_t seed() const;
    std::string out_dir() const;
};

const std::vector<std::string>& command_names();

/// Defaults for a command; throws ConfigError for unknown commands.
Json command_defaults(const std::string& command);

/// Applies `overrides` onto the command defaults and validates the result.
RunConfig resolve_config(const std::string& command, const Json& file_params, const Json& overrides);

/// Parses argv (subcommand, --config file, flags). Throws ConfigError.
RunConfig parse_command_line(int argc, const char* const* argv);

/// Runs the pipeline and writes `{command}-{seed}.*` under the output directory.
/// Returns an ExitCode value.
int run(const RunConfig& config, std::ostream& log);

/// argv entry point with the full exit-code contract.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace khess
