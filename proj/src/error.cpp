#include "htrace/error.hpp"

namespace htrace {

Error::Error(std::string code, const std::string& message)
    : std::runtime_error(code + ": " + message), code_(std::move(code)) {}

}  // namespace htrace
