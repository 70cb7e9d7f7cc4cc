#pragma once

#include <stdexcept>
#include <string>

namespace codemap {

// Base for every error the library raises on purpose.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Bad option values, unknown metric names, malformed config files.
class ConfigError : public Error {
public:
  using Error::Error;
};

// Filesystem failures that abort an operation.
class IoError : public Error {
public:
  using Error::Error;
};

// Structurally invalid input data (NaN distances, size mismatches, ...).
class InputError : public Error {
public:
  using Error::Error;
};

}  // namespace codemap
