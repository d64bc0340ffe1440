#pragma once

#include <ostream>

namespace kvflow {

/// Entry point of the kvflow command. Exit codes: 0 when every executed check
/// passes, 1 when one fails, 2 for usage and configuration errors.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace kvflow
