#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace corescale::cli {

/// Runs one CLI invocation. args excludes the program name.
/// Returns 0 on success, 1 on a domain error, 2 on a usage error.
int run(std::vector<std::string> args, std::ostream& out, std::ostream& err);

/// Parses "1/N" (coarsen by N) or "N" (refine by N). Returns N and whether
/// the scale shrinks.
struct ScaleArg {
    std::size_t factor = 1;
    bool coarsen = false;
};
ScaleArg parse_scale(const std::string& text);

}  // namespace corescale::cli
