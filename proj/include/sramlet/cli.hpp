#pragma once

#include <iosfwd>

namespace sramlet {

/// Runs one subcommand. Returns 0 on success, 1 on a computation error and
/// 2 on a usage error.
int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace sramlet
