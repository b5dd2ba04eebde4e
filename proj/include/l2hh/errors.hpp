#pragma once

#include <stdexcept>
#include <string>

namespace l2hh {

/// An item id or index fell outside the configured universe.
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// A parameter violates its documented domain.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed command line or unknown experiment kind.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace l2hh
