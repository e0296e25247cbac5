#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace debias {

// Base class for every error raised by the library.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input text. Carries the 1-based line number when known.
struct ParseError : Error {
  ParseError(const std::string& what, std::size_t line_no = 0)
      : Error(line_no ? "line " + std::to_string(line_no) + ": " + what : what),
        line(line_no) {}
  std::size_t line;
};

struct DimensionError : Error {
  using Error::Error;
};

struct EmptyInputError : Error {
  using Error::Error;
};

// Token (or phrase member) not present in a vector set or lexicon.
struct LookupError : Error {
  LookupError(const std::string& what, std::string missing_token)
      : Error(what), token(std::move(missing_token)) {}
  std::string token;
};

// Input has no usable variation (zero scatter, identical points, ...).
struct DegenerateInputError : Error {
  using Error::Error;
};

// Violated precondition, invalid parameter, or unusable configuration.
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace debias
