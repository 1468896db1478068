#pragma once

#include <stdexcept>
#include <string>

namespace bangbang {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Initial and target states are (numerically) the same, so the normalized
// distances are undefined.
class StatesCoincide : public Error {
 public:
  using Error::Error;
};

// Two inputs that must share a layout (grid axes, dimensions) do not.
class IncompatibleInputs : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace bangbang
