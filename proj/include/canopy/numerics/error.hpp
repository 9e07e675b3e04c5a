#pragma once

#include <stdexcept>
#include <string>

namespace canopy {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when operand extents disagree. `axis()` names the offending
/// dimension ("batch", "channels", "height", "width", "rank", ...).
class ShapeError : public Error {
public:
    ShapeError(const std::string& op, const std::string& axis, long expected, long actual);

    const std::string& axis() const noexcept { return axis_; }
    long expected() const noexcept { return expected_; }
    long actual() const noexcept { return actual_; }

private:
    std::string axis_;
    long expected_;
    long actual_;
};

/// Non-finite values where finite ones are required (gradients, losses).
class NumericError : public Error {
public:
    using Error::Error;
};

/// Malformed or unreadable file.
class FormatError : public Error {
public:
    using Error::Error;
};

}  // namespace canopy
