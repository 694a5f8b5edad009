#pragma once

#include <stdexcept>
#include <string>

namespace oca {

// Base of every error the library throws on bad input.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Malformed machine, unknown name, missing parameter value.
class ConfigError : public Error {
public:
  using Error::Error;
};

// Operation called on a machine outside its class.
class ClassError : public Error {
public:
  using Error::Error;
};

class ArgumentError : public Error {
public:
  using Error::Error;
};

class SyntaxError : public Error {
public:
  SyntaxError(const std::string& msg, std::size_t pos)
      : Error(msg + " at offset " + std::to_string(pos)), position(pos) {}
  std::size_t position;
};

class FormatError : public Error {
public:
  using Error::Error;
};

class ExtractionError : public Error {
public:
  using Error::Error;
};

// A produced witness failed re-validation. Always a bug.
class InternalError : public Error {
public:
  using Error::Error;
};

} // namespace oca
