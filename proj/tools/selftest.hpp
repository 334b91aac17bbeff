#pragma once

#include <iosfwd>

namespace cft::cli {

/// Runs the quick property suites, one line per suite on out.
/// Returns the number of failing suites.
int run_selftest(std::ostream& out);

}  // namespace cft::cli
