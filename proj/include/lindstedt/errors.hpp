#pragma once
// Error types shared by every module.

#include <stdexcept>
#include <string>

namespace lindstedt {

/// Raised when an enumeration or table would exceed a configured limit.
/// Never a silent truncation: callers either raise the limit or shrink the problem.
class BudgetError : public std::runtime_error {
public:
    explicit BudgetError(const std::string& what) : std::runtime_error("budget: " + what) {}
};

/// Invalid inputs: malformed config, wrong dimensions, non-real Fourier data.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error("config: " + what) {}
};

/// A matrix that had to be inverted was numerically singular.
class SingularMatrix : public std::runtime_error {
public:
    explicit SingularMatrix(const std::string& what) : std::runtime_error("singular: " + what) {}
};

}  // namespace lindstedt
