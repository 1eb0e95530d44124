#pragma once

#include <stdexcept>
#include <string>

namespace pairsketch {

// Argument and shape errors derive from std::invalid_argument; the CLI maps
// them to exit code 1.
class dimension_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// File read/write and parse failures (exit code 2).
class io_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Numerical failures: non-convergence, degenerate products (exit code 3).
class numeric_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace pairsketch
