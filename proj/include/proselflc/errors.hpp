#pragma once

#include <stdexcept>
#include <string>

namespace proselflc {

/// Raised when a numeric or configuration parameter is outside its domain.
class InvalidParameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when two vectors that must share a class count do not.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised for empty or malformed input collections.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace proselflc
