#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace maasim {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Errors caused by the caller's data, files or arguments. The CLI maps these
// to exit code 1; anything else is an internal failure (exit code 2).
class InputError : public Error {
 public:
  using Error::Error;
};

class FormatError : public InputError {
 public:
  using InputError::InputError;
};

class ParseError : public InputError {
 public:
  ParseError(std::size_t row, std::size_t col, const std::string& what)
      : InputError("parse error at row " + std::to_string(row) + ", column " + std::to_string(col) + ": " +
                   what),
        row_(row),
        col_(col) {}
  std::size_t row() const noexcept { return row_; }
  std::size_t col() const noexcept { return col_; }

 private:
  std::size_t row_;
  std::size_t col_;
};

class RangeError : public InputError {
 public:
  using InputError::InputError;
};

class ConfigError : public InputError {
 public:
  using InputError::InputError;
};

class EmptyDatasetError : public InputError {
 public:
  using InputError::InputError;
};

class EmptyDataError : public InputError {
 public:
  using InputError::InputError;
};

class DegenerateColumnError : public InputError {
 public:
  using InputError::InputError;
};

class TooFewSamplesError : public InputError {
 public:
  using InputError::InputError;
};

class StratificationError : public InputError {
 public:
  using InputError::InputError;
};

class ShapeError : public InputError {
 public:
  using InputError::InputError;
};

class VersionError : public InputError {
 public:
  using InputError::InputError;
};

class ReferenceError : public InputError {
 public:
  using InputError::InputError;
};

class BaselineError : public InputError {
 public:
  using InputError::InputError;
};

class NothingToUndoError : public InputError {
 public:
  using InputError::InputError;
};

class TooLargeError : public InputError {
 public:
  using InputError::InputError;
};

class EmptyFrontError : public InputError {
 public:
  using InputError::InputError;
};

class EmptySampleError : public InputError {
 public:
  using InputError::InputError;
};

// A quantity with no defined value for the given input (e.g. 0/0).
class UndefinedError : public Error {
 public:
  using Error::Error;
};

// The all-zero genome violates t > 0; solvers repair before evaluating.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

}  // namespace maasim
