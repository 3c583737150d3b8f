#ifndef GLMDOPT_ERRORS_HPP
#define GLMDOPT_ERRORS_HPP

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace glmdopt {

enum class ErrorKind {
  InvalidArgument,
  NonFiniteInput,
  GammaZeroEta,
  NonPositiveWeight,
  DimensionMismatch,
  TooManySubsets,
  SingularDesign,
  EmptyPair,
  SingularSupport,
  UnsupportedCombination,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NonFiniteInput: return "NonFiniteInput";
    case ErrorKind::GammaZeroEta: return "GammaZeroEta";
    case ErrorKind::NonPositiveWeight: return "NonPositiveWeight";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::TooManySubsets: return "TooManySubsets";
    case ErrorKind::SingularDesign: return "SingularDesign";
    case ErrorKind::EmptyPair: return "EmptyPair";
    case ErrorKind::SingularSupport: return "SingularSupport";
    case ErrorKind::UnsupportedCombination: return "UnsupportedCombination";
  }
  return "Unknown";
}

/// Every library failure is reported through this type; `kind()` says which
/// contract was violated and `row()` names the offending design point, if any.
class DesignError : public std::runtime_error {
 public:
  DesignError(ErrorKind kind, const std::string& message,
              std::optional<std::size_t> row = std::nullopt)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind),
        row_(row) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::optional<std::size_t> row() const noexcept { return row_; }

 private:
  ErrorKind kind_;
  std::optional<std::size_t> row_;
};

}  // namespace glmdopt

#endif  // GLMDOPT_ERRORS_HPP
