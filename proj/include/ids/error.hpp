#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ids {

// Base for every error raised by the toolkit.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class parse_error : public error {
 public:
  parse_error(std::size_t line, const std::string& what)
      : error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class schema_error : public error {
 public:
  using error::error;
};

class invalid_argument : public error {
 public:
  using error::error;
};

class degenerate_data : public error {
 public:
  using error::error;
};

}  // namespace ids
