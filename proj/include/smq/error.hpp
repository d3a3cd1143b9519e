#pragma once

#include <stdexcept>
#include <string>

namespace smq {

/// Base of every exception thrown by the library. `kind()` is a short,
/// machine-readable category used by the CLI error prefix.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& message) : Error("shape", message) {}
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& message)
      : Error("invalid_argument", message) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& message) : Error("numeric", message) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error("io", message) {}
};

class ParseError : public Error {
 public:
  enum class Code { bad_magic, truncated, version, format };

  ParseError(Code code, const std::string& message)
      : Error(kind_for(code), message), code_(code) {}

  Code code() const noexcept { return code_; }

 private:
  static std::string kind_for(Code code) {
    switch (code) {
      case Code::bad_magic: return "parse.magic";
      case Code::truncated: return "parse.truncated";
      case Code::version: return "parse.version";
      case Code::format: break;
    }
    return "parse.format";
  }

  Code code_;
};

}  // namespace smq
