#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace defectspec {

enum class ErrorKind {
  domain,
  numerical,
  truncation,
  sampling,
  not_found,
  degenerate_design,
  incomplete_calibration,
  calibration,
  unreliable_correction,
  fit,
  parse,
  schema,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library. `diagnostics` carries free-form
/// numeric context (iteration counts, residuals) for machine-readable reports.
class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& message, std::string diagnostics = {})
      : std::runtime_error(message), kind_(kind), diagnostics_(std::move(diagnostics)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& diagnostics() const noexcept { return diagnostics_; }

private:
  ErrorKind kind_;
  std::string diagnostics_;
};

/// Parse failure pinned to a 1-based input line.
class ParseError : public Error {
public:
  ParseError(const std::string& message, std::size_t line)
      : Error(ErrorKind::parse, message), line_(line) {}
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

}  // namespace defectspec
