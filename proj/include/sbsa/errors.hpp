#pragma once

#include <stdexcept>
#include <string>

namespace sbsa {

// Error taxonomy shared by the library and the CLI. The CLI maps each class
// to a distinct process exit code (see cli.hpp): input 2, numeric 3,
// insufficient data 4.

// Malformed or out-of-contract input: unreadable files, bad rows, invalid
// signals, impossible configuration values.
class input_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A numerical procedure failed: eigensolver non-convergence, an unreachable
// search bracket, a target that cannot be met.
class numeric_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Too few data points for the requested statistic.
class insufficient_data_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace sbsa
