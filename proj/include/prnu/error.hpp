#pragma once

#include <stdexcept>
#include <string>

namespace prnu {

// Base of everything the toolkit throws. CLI maps UsageError/ConfigError to
// exit code 1 and the rest to exit code 2.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
public:
  using Error::Error;
};

// Malformed file contents: bad magic, truncation, corrupt bitstream.
class FormatError : public Error {
public:
  using Error::Error;
};

class DimensionError : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

class NotFoundError : public Error {
public:
  using Error::Error;
};

class DuplicateError : public Error {
public:
  using Error::Error;
};

} // namespace prnu
