#pragma once

#include <stdexcept>
#include <string>

namespace ifim {

/// Base class for every error raised by the toolchain.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input violates an operation's precondition (bad argument, malformed record).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A remote backend could not be reached or returned an unusable answer.
class TransportError : public Error {
 public:
  using Error::Error;
};

}  // namespace ifim
