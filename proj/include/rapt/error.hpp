#pragma once

#include <stdexcept>
#include <string>

namespace rapt {

/// Precondition violated by a caller-supplied argument.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed or inconsistent input data (files, records, vectors).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Error located at a specific line of an input file.
class ParseError : public DataError {
 public:
  ParseError(std::string path, std::size_t line, const std::string& what)
      : DataError(path + ":" + std::to_string(line) + ": " + what),
        path_(std::move(path)),
        line_(line) {}

  const std::string& path() const noexcept { return path_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string path_;
  std::size_t line_;
};

}  // namespace rapt
