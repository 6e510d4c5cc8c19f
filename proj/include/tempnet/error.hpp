#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tempnet {

enum class ErrorKind {
  // model
  MultipleRoots,
  NoRoot,
  UnreachableVertex,
  InDegreeViolation,
  UnknownVertex,
  DuplicateCharacter,
  DuplicateLabel,
  MissingLeafLabel,
  LabelOnInternalVertex,
  UnknownState,
  UnknownCharacter,
  EmptyInterval,
  InvalidForbid,
  // network
  RootUpVertex,
  SelfContact,
  EmptySubset,
  InstanceTooLarge,
  LabelingMismatch,
  // temporal
  RootHasNoContactInterval,
  // io
  SyntaxError,
  UnknownFormat,
};

std::string_view to_string(ErrorKind kind);

// Every error names the offending entity in `subject`.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string subject, const std::string& message)
      : std::runtime_error(message), kind_(kind), subject_(std::move(subject)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& subject() const noexcept { return subject_; }

 private:
  ErrorKind kind_;
  std::string subject_;
};

// Raised by the problem-file reader; `line` is 1-based.
class ParseError : public Error {
 public:
  ParseError(ErrorKind kind, std::string source, std::size_t line, std::string subject,
             const std::string& message)
      : Error(kind, std::move(subject), format(source, line, message)),
        source_(std::move(source)),
        line_(line) {}

  const std::string& source() const noexcept { return source_; }
  std::size_t line() const noexcept { return line_; }

 private:
  static std::string format(const std::string& source, std::size_t line, const std::string& msg) {
    return (source.empty() ? std::string("<input>") : source) + ":" + std::to_string(line) + ": " +
           msg;
  }

  std::string source_;
  std::size_t line_;
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MultipleRoots: return "MultipleRoots";
    case ErrorKind::NoRoot: return "NoRoot";
    case ErrorKind::UnreachableVertex: return "UnreachableVertex";
    case ErrorKind::InDegreeViolation: return "InDegreeViolation";
    case ErrorKind::UnknownVertex: return "UnknownVertex";
    case ErrorKind::DuplicateCharacter: return "DuplicateCharacter";
    case ErrorKind::DuplicateLabel: return "DuplicateLabel";
    case ErrorKind::MissingLeafLabel: return "MissingLeafLabel";
    case ErrorKind::LabelOnInternalVertex: return "LabelOnInternalVertex";
    case ErrorKind::UnknownState: return "UnknownState";
    case ErrorKind::UnknownCharacter: return "UnknownCharacter";
    case ErrorKind::EmptyInterval: return "EmptyInterval";
    case ErrorKind::InvalidForbid: return "InvalidForbid";
    case ErrorKind::RootUpVertex: return "RootUpVertex";
    case ErrorKind::SelfContact: return "SelfContact";
    case ErrorKind::EmptySubset: return "EmptySubset";
    case ErrorKind::InstanceTooLarge: return "InstanceTooLarge";
    case ErrorKind::LabelingMismatch: return "LabelingMismatch";
    case ErrorKind::RootHasNoContactInterval: return "RootHasNoContactInterval";
    case ErrorKind::SyntaxError: return "SyntaxError";
    case ErrorKind::UnknownFormat: return "UnknownFormat";
  }
  return "Unknown";
}

}  // namespace tempnet
