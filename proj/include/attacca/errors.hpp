#pragma once

#include <stdexcept>
#include <string>

namespace attacca {

// Invalid user-supplied configuration or parameter values. CLI exit code 1.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// File, socket or device failures, including malformed input files. Exit code 2.
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A numeric routine cannot proceed (factorization failure, degenerate system,
// insufficient data for a fit). Exit code 3.
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace attacca
