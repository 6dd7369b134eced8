#include "voluma/error.hpp"

namespace voluma {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::MalformedTrace: return "MalformedTrace";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorKind::TruncatedFile: return "TruncatedFile";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::DegenerateData: return "DegenerateData";
    case ErrorKind::FitFailure: return "FitFailure";
    case ErrorKind::EvaluationError: return "EvaluationError";
    case ErrorKind::ShapeError: return "ShapeError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind), message_(message) {}

Error Error::with_context(const std::string& context) const { return Error(kind_, context + ": " + message_); }

void raise(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace voluma
