#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace swexp {

enum class ErrorKind {
  InvalidInput,
  SupportMismatch,
  TooLarge,
  DegenerateRow,
  DegenerateColumn,
  Infeasible,
  NotConverged,
  BracketFailure,
};

inline std::string_view to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::SupportMismatch: return "SupportMismatch";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::DegenerateRow: return "DegenerateRow";
    case ErrorKind::DegenerateColumn: return "DegenerateColumn";
    case ErrorKind::Infeasible: return "Infeasible";
    case ErrorKind::NotConverged: return "NotConverged";
    case ErrorKind::BracketFailure: return "BracketFailure";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the kinds above so that
/// callers (the CLI in particular) can map it onto an exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace swexp
