#pragma once
#include <stdexcept>

namespace bglmb {

/// Malformed input files, bad configuration, inconsistent data.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Numerical breakdown inside a filter (degenerate weights, non-finite values).
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace bglmb
