#pragma once

#include <stdexcept>
#include <string>

namespace dryerctl {

/// Bad configuration, bad arguments, malformed files. CLI maps this to exit code 2.
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure: singular state, non-convergence, integration blow-up.
/// CLI maps this to exit code 3.
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace dryerctl
