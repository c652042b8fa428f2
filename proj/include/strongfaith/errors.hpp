#pragma once

#include <stdexcept>
#include <string>

namespace strongfaith {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller passed something out of contract (bad lambda, c >= r, vertex out of
// range, malformed edge list, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A text input (DAG file, weights file, manifest) did not parse.
class ParseError : public Error {
 public:
  using Error::Error;
};

// A requested computation was refused because it exceeds an explicit size
// budget (triple enumeration, symbolic determinant dimension, ...). The
// message always names the offending count.
class BudgetError : public Error {
 public:
  using Error::Error;
};

// Numerical degeneracy: a matrix that must be positive definite was not.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace strongfaith
