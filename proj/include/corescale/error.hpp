#pragma once

#include <stdexcept>
#include <string>

namespace corescale {

/// Domain error carrying a short machine-readable code, e.g. "io", "format",
/// "degenerate". The CLI prints these as `error: <code>: <message>`.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message);

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

}  // namespace corescale
