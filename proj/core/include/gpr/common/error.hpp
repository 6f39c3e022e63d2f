#pragma once

#include <stdexcept>
#include <string>

namespace gpr {

/// Argument or shape contract violated by the caller.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed or inconsistent input data (files, datasets, empty detections).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Binary/text file does not follow its format.
class FormatError : public DataError {
 public:
  using DataError::DataError;
};

/// NaN/Inf encountered in a loss or gradient.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gpr
