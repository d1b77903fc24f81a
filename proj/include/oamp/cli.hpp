#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace oamp::cli {

enum ExitCode : int { kSuccess = 0, kUsage = 1, kFailure = 2 };

/// Grid syntax: comma-separated items, each a number or "start:stop:count"
/// (count equally spaced values including both ends).
/// Throws DomainError on malformed input.
std::vector<double> parse_grid(const std::vector<std::string>& items);

/// Entry point of the `oamp` executable. CSV goes to `out` unless an output
/// directory is given; diagnostics go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace oamp::cli
