#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ovsg {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file or query text. `line` is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Features from different embedding spaces were compared.
class SpaceMismatch : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class UnknownNode : public Error {
 public:
  using Error::Error;
};

/// No provider could produce a vector for the text.
class UnencodableText : public Error {
 public:
  using Error::Error;
};

class UnknownSpatialRelation : public Error {
 public:
  using Error::Error;
};

/// Invalid parameters or configuration; raised before any work starts.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace ovsg
