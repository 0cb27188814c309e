#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace epiclust {

enum class ErrorKind {
  DegenerateLine,
  SingularInput,
  DegenerateInput,
  DegenerateConfiguration,
  TooFewPoints,
  NoConsensus,
  TooFewClusterInliers,
  CoincidentCenters,
  FrustumEmpty,
  RetriesExhausted,
  InvalidArgument,
  Parse,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DegenerateLine: return "DegenerateLine";
    case ErrorKind::SingularInput: return "SingularInput";
    case ErrorKind::DegenerateInput: return "DegenerateInput";
    case ErrorKind::DegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorKind::TooFewPoints: return "TooFewPoints";
    case ErrorKind::NoConsensus: return "NoConsensus";
    case ErrorKind::TooFewClusterInliers: return "TooFewClusterInliers";
    case ErrorKind::CoincidentCenters: return "CoincidentCenters";
    case ErrorKind::FrustumEmpty: return "FrustumEmpty";
    case ErrorKind::RetriesExhausted: return "RetriesExhausted";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Parse: return "ParseError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the kinds above so
/// callers (the CLI, the benchmark runner) can map it to a status label.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised by the text readers; `line()` is 1-based.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(ErrorKind::Parse, "line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace epiclust
