#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dpeval {

/// Base class for every error raised by the library. Data errors (bad input
/// values, undefined metrics) derive from it; the CLI maps them to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (x outside [0,100], alpha
/// outside (0,1), mismatched lengths, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A metric is mathematically undefined for the given input, e.g. PofB with
/// no defective entity or AUC on single-class data.
class UndefinedMetric : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. Carries the 1-based line and column of the problem;
/// column 0 means the whole line.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& what)
      : Error("line " + std::to_string(line) +
              (column ? ", column " + std::to_string(column) : std::string()) +
              ": " + what),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace dpeval
