#include "belcal/error.hpp"

#include <algorithm>

namespace belcal {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::DuplicateName: return "DuplicateName";
    case ErrorCode::UnknownIdentifier: return "UnknownIdentifier";
    case ErrorCode::ArityMismatch: return "ArityMismatch";
    case ErrorCode::DomainMismatch: return "DomainMismatch";
    case ErrorCode::TypeError: return "TypeError";
    case ErrorCode::DivisionByZero: return "DivisionByZero";
    case ErrorCode::NonPositiveVariance: return "NonPositiveVariance";
    case ErrorCode::UnboundReference: return "UnboundReference";
    case ErrorCode::HistoryIndexOutOfRange: return "HistoryIndexOutOfRange";
    case ErrorCode::NonFiniteResult: return "NonFiniteResult";
    case ErrorCode::DomainViolation: return "DomainViolation";
    case ErrorCode::NegativeLikelihood: return "NegativeLikelihood";
    case ErrorCode::NegativeWeight: return "NegativeWeight";
    case ErrorCode::DegenerateBelief: return "DegenerateBelief";
    case ErrorCode::DimensionLimit: return "DimensionLimit";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::UnrecognizedInitForm: return "UnrecognizedInitForm";
    case ErrorCode::UnrecognizedLikelihoodForm: return "UnrecognizedLikelihoodForm";
    case ErrorCode::UnboundedSupport: return "UnboundedSupport";
    case ErrorCode::ZeroEvidence: return "ZeroEvidence";
    case ErrorCode::InfiniteDomain: return "InfiniteDomain";
    case ErrorCode::FiniteFluentMarginal: return "FiniteFluentMarginal";
    case ErrorCode::ValidationFailed: return "ValidationFailed";
    case ErrorCode::OracleNotApplicable: return "OracleNotApplicable";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message, SourceSpan span)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      span_(span),
      detail_(message) {}

std::string format_diagnostic(std::string_view file, const Diagnostic& d) {
  std::string out(file);
  if (d.span.valid()) {
    out += ':' + std::to_string(d.span.line) + ':' + std::to_string(d.span.column);
  }
  switch (d.severity) {
    case Severity::Error: out += ": error: "; break;
    case Severity::Warning: out += ": warning: "; break;
    case Severity::Note: out += ": note: "; break;
  }
  out += d.message;
  out += " [";
  out += to_string(d.code);
  out += ']';
  return out;
}

bool has_errors(const std::vector<Diagnostic>& diags) {
  return std::any_of(diags.begin(), diags.end(),
                     [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

}  // namespace belcal
