#pragma once

#include <stdexcept>
#include <string>

namespace gerk {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad user input: malformed files, invalid configuration values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A request that refers to data that does not exist (unknown node, absent edge).
class LookupError : public Error {
 public:
  using Error::Error;
};

/// A broken structural invariant or a failed audit.
class InvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace gerk
