#pragma once

#include <stdexcept>
#include <string>

namespace vige {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Dimension/shape contract violations (always name the offending shapes).
struct ShapeError : Error {
    using Error::Error;
};

// Bad argument values (out-of-range index, nonpositive count, ...).
struct ValueError : Error {
    using Error::Error;
};

// NaN/Inf produced by a forward op, or a diverged training step.
struct NumericError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

// Malformed file contents (image headers, checkpoint records).
struct FormatError : Error {
    using Error::Error;
};

}  // namespace vige
