#pragma once

#include <stdexcept>
#include <string>

namespace vitslim {

// Error taxonomy. The CLI maps UsageError/ConfigError to exit code 1 and
// DataError/IoError to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// A checkpoint written by an incompatible format version.
class FormatVersionError : public DataError {
 public:
  using DataError::DataError;
};

// Raised when training produces a non-finite loss.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace vitslim
