#pragma once

#include <iosfwd>

namespace crowdsync::cli {

/// Entry point for the `crowdsync` tool. Subcommands: run, sweep, metrics,
/// curve, validate. Returns the process exit status.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace crowdsync::cli
