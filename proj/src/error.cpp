#include "defectspec/error.hpp"

namespace defectspec {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::domain: return "domain";
    case ErrorKind::numerical: return "numerical";
    case ErrorKind::truncation: return "truncation";
    case ErrorKind::sampling: return "sampling";
    case ErrorKind::not_found: return "not_found";
    case ErrorKind::degenerate_design: return "degenerate_design";
    case ErrorKind::incomplete_calibration: return "incomplete_calibration";
    case ErrorKind::calibration: return "calibration";
    case ErrorKind::unreliable_correction: return "unreliable_correction";
    case ErrorKind::fit: return "fit";
    case ErrorKind::parse: return "parse";
    case ErrorKind::schema: return "schema";
  }
  return "unknown";
}

}  // namespace defectspec
