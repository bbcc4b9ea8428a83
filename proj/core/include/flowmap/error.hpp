#pragma once

#include <stdexcept>
#include <string>

namespace flowmap {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Malformed input file or stream (NPY, model, JSON descriptor).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Velocity requested outside the time span covered by a sampled field.
class TimeOutOfRange : public Error {
 public:
  TimeOutOfRange() : Error("time out of range") {}
};

/// Training diverged (non-finite loss).
class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace flowmap
