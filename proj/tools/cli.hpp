#pragma once

#include <ostream>

namespace tsolve::cli {

/// Entry point shared by main() and the tests. Returns the process exit
/// status: 0 solved, 1 usage error, 2 witness/inconclusive, 3 cap/failure.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace tsolve::cli
