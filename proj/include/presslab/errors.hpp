#pragma once

#include <stdexcept>
#include <string>

namespace presslab {

// Bad user input: malformed config, inconsistent dimensions, invalid parameters.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A resource cap was hit (pattern enumeration count, state-space size, overflow).
struct CapExceeded : std::runtime_error {
  explicit CapExceeded(const std::string& what) : std::runtime_error(what) {}
};

// A precondition on arguments failed (window too small, mismatched systems, ...).
struct DomainError : std::runtime_error {
  explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

// Exit codes used by the CLI and acceptance binaries.
enum ExitCode : int {
  kExitOk = 0,
  kExitAssertionFailed = 1,
  kExitConfigError = 2,
  kExitCapExceeded = 3,
};

}  // namespace presslab
