/*
 * Copyright (C) 2026 The superyolo Authors
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include <stdexcept>
#include <string>

namespace superyolo {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor or raster dimensions that do not fit an operation.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration value, unknown key or inconsistent model layout.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Numeric input outside of the accepted domain.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Malformed text input. `line()` is 1-based, 0 when not applicable.
class ParseError : public Error {
 public:
  ParseError(const std::string& detail, int line, const std::string& source = "")
      : Error(format(detail, line, source)), detail_(detail), line_(line) {}
  int line() const noexcept { return line_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  static std::string format(const std::string& detail, int line, const std::string& source) {
    std::string prefix = source;
    if (line > 0) prefix += (prefix.empty() ? "line " : ":") + std::to_string(line);
    return prefix.empty() ? detail : prefix + ": " + detail;
  }

  std::string detail_;
  int line_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Raised when training produces a non-finite loss.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace superyolo
