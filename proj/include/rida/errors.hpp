#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rida {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input line.
class ParseError : public Error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Well-formed input that violates an invariant (range, duplicates, self-loops).
class ValidationError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// A vertex without neighbours where D^{-1/2} is required.
class DegenerateDegreeError : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& where, int epoch)
      : Error(where + ": non-finite loss at epoch " + std::to_string(epoch)), epoch_(epoch) {}
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

/// No admissible edge flip remains before the budget is spent.
class BudgetExhaustedError : public Error {
 public:
  using Error::Error;
};

/// Accuracy over an empty vertex set.
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

}  // namespace rida
