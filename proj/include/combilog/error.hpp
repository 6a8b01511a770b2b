#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace combilog {

// Position of a token or construct in source text. 1-based.
struct SourceSpan {
  int line = 1;
  int column = 1;
  int length = 0;

  friend bool operator==(const SourceSpan&, const SourceSpan&) = default;
};

enum class ErrorKind {
  Syntax,
  UnknownPredicate,
  ArityMismatch,
  RecursiveDefinition,
  NameCollision,
  UnsafeQuery,
  SolutionLimitExceeded,
  FoldListTooLong,
  NotFinitelyDenotable,
  NotDiagrammable,
  UniverseLimitExceeded,
  Io,
};

inline const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Syntax: return "SyntaxError";
    case ErrorKind::UnknownPredicate: return "UnknownPredicate";
    case ErrorKind::ArityMismatch: return "ArityMismatch";
    case ErrorKind::RecursiveDefinition: return "RecursiveDefinition";
    case ErrorKind::NameCollision: return "NameCollision";
    case ErrorKind::UnsafeQuery: return "UnsafeQuery";
    case ErrorKind::SolutionLimitExceeded: return "SolutionLimitExceeded";
    case ErrorKind::FoldListTooLong: return "FoldListTooLong";
    case ErrorKind::NotFinitelyDenotable: return "NotFinitelyDenotable";
    case ErrorKind::NotDiagrammable: return "NotDiagrammable";
    case ErrorKind::UniverseLimitExceeded: return "UniverseLimitExceeded";
    case ErrorKind::Io: return "IoError";
  }
  return "Error";
}

// A problem found by static checks. check_program returns these instead of
// throwing so that every violation in a file is reported at once.
struct Diagnostic {
  ErrorKind kind = ErrorKind::Syntax;
  std::string message;
  SourceSpan span;

  std::string to_string() const {
    return std::to_string(span.line) + ":" + std::to_string(span.column) +
           ": " + error_kind_name(kind) + ": " + message;
  }
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message, SourceSpan span = {})
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message),
        kind_(kind),
        span_(span) {}

  ErrorKind kind() const { return kind_; }
  const SourceSpan& span() const { return span_; }

  Diagnostic to_diagnostic() const {
    std::string text = what();
    auto prefix = std::string(error_kind_name(kind_)) + ": ";
    if (text.rfind(prefix, 0) == 0) text = text.substr(prefix.size());
    return Diagnostic{kind_, text, span_};
  }

 private:
  ErrorKind kind_;
  SourceSpan span_;
};

}  // namespace combilog
