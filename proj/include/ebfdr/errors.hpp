#pragma once

#include <stdexcept>
#include <string>

namespace ebfdr {

// Parameter and configuration errors are reported as std::invalid_argument.
// The two types below cover the remaining failure classes.

/// A factorization or other numerical step failed (non-PD covariance, ...).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File system failure; the message carries the offending path.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ebfdr
