#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace voluma {

enum class ErrorKind {
  EmptyInput,
  MalformedTrace,
  InsufficientData,
  UnsupportedFormat,
  TruncatedFile,
  ParseError,
  DomainError,
  DegenerateData,
  FitFailure,
  EvaluationError,
  ShapeError,
  IoError,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries one of the kinds above so
/// callers (and the CLI exit-code mapping) can branch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& message() const noexcept { return message_; }

  /// Same kind, message prefixed with `context` (typically a file path).
  Error with_context(const std::string& context) const;

 private:
  ErrorKind kind_;
  std::string message_;
};

[[noreturn]] void raise(ErrorKind kind, const std::string& message);

}  // namespace voluma
