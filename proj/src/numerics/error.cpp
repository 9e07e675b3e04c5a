#include "canopy/numerics/error.hpp"

namespace canopy {

ShapeError::ShapeError(const std::string& op, const std::string& axis, long expected, long actual)
    : Error(op + ": shape mismatch on axis '" + axis + "' (expected " + std::to_string(expected) +
            ", got " + std::to_string(actual) + ")"),
      axis_(axis),
      expected_(expected),
      actual_(actual) {}

}  // namespace canopy
