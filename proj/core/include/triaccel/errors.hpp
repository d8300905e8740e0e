#pragma once

#include <stdexcept>
#include <string>

namespace triaccel {

// Bad configuration or arguments: unknown plan keys, dimension mismatches,
// out-of-range parameters. CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Filesystem trouble (unreadable plan, unwritable output dir). Exit code 4.
struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace triaccel
