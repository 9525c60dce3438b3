#include "corescale/error.hpp"

#include <utility>

namespace corescale {

Error::Error(std::string code, const std::string& message)
    : std::runtime_error(message), code_(std::move(code)) {}

}  // namespace corescale
