#pragma once

#include <stdexcept>
#include <string>

namespace facexai {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input or configuration violates a documented contract (bad file, bad
// argument, failed precondition). The CLI maps these to exit code 2.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A capability the caller asked for is not provided (e.g. activations on an
// embed-only model).
class UnsupportedOperation : public Error {
 public:
  using Error::Error;
};

// Model inference or I/O failure.
class ModelError : public Error {
 public:
  using Error::Error;
};

// Numerical failure (singular systems, zero-norm vectors).
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace facexai
