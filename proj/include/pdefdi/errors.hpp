#pragma once

#include <stdexcept>
#include <string>

namespace pdefdi {

// Bad scenario / configuration / dimension mismatch. CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numeric divergence (blowup, domain violation). CLI maps this to exit code 3.
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace pdefdi
