#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ufpmp {

enum class ErrorKind {
  InvalidParameter,
  InvalidInput,
  InvalidState,
  UnpackableRegion,
  InsufficientVocabulary,
  InfeasibleSpec,
  Parse,
  Validation,
  Composition,
  Io,
};

inline std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidParameter: return "invalid-parameter";
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::InvalidState: return "invalid-state";
    case ErrorKind::UnpackableRegion: return "unpackable-region";
    case ErrorKind::InsufficientVocabulary: return "insufficient-vocabulary";
    case ErrorKind::InfeasibleSpec: return "infeasible-spec";
    case ErrorKind::Parse: return "parse-error";
    case ErrorKind::Validation: return "validation-error";
    case ErrorKind::Composition: return "composition-error";
    case ErrorKind::Io: return "io-error";
  }
  return "unknown";
}

// Every failure raised by the library carries a machine-checkable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace ufpmp
