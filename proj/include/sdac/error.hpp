#pragma once

#include <stdexcept>
#include <string>

namespace sdac {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  enum class Kind {
    MalformedHeader,
    LiteralOutOfRange,
    UnterminatedClause,
    MalformedCubeLine,
    MalformedToken,
  };

  ParseError(Kind kind, std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), kind_(kind), line_(line) {}

  Kind kind() const noexcept { return kind_; }
  std::size_t line() const noexcept { return line_; }

 private:
  Kind kind_;
  std::size_t line_;
};

class InvalidCube : public Error {
 public:
  using Error::Error;
};

class TooManyVariables : public Error {
 public:
  using Error::Error;
};

class InvalidSpace : public Error {
 public:
  using Error::Error;
};

class SpaceTooLarge : public Error {
 public:
  using Error::Error;
};

class DecodeError : public Error {
 public:
  using Error::Error;
};

class NotYetSolved : public Error {
 public:
  using Error::Error;
};

class SpawnFailure : public Error {
 public:
  using Error::Error;
};

class Timeout : public Error {
 public:
  using Error::Error;
};

class UnparseableOutput : public Error {
 public:
  using Error::Error;
};

class BudgetOverflow : public Error {
 public:
  using Error::Error;
};

class StepLimitExceeded : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace sdac
