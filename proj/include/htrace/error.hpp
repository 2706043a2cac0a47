#pragma once

#include <stdexcept>
#include <string>

namespace htrace {

// Data-level failure. `code` is a short stable rule name ("duplicate-id",
// "missing-field", ...) that tests and the CLI key on.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message);

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

// Bad invocation: unknown subcommand, missing flag, out-of-range argument.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace htrace
