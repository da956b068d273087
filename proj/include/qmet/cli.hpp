#pragma once

#include <iosfwd>

namespace qmet {

/// Parses argv, runs one subcommand and writes JSON to `out`.
/// Returns 0 on success, 2 on validation or configuration errors and 1 on
/// computation errors; failures are reported as {"error": name, "message": ...}.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qmet
