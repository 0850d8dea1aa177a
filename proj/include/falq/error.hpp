#pragma once

#include <stdexcept>
#include <string>

namespace falq {

// Categories double as the CLI exit codes.
enum class ErrorCategory : int {
  io = 2,
  format = 3,
  numeric = 4,
  param = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCategory::io, what) {}
};

class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what) : Error(ErrorCategory::format, what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(ErrorCategory::numeric, what) {}
};

class ParamError : public Error {
 public:
  explicit ParamError(const std::string& what) : Error(ErrorCategory::param, what) {}
};

}  // namespace falq
