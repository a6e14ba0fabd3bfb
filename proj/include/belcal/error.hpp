#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace belcal {

enum class ErrorCode : std::uint8_t {
  SyntaxError,
  DuplicateName,
  UnknownIdentifier,
  ArityMismatch,
  DomainMismatch,
  TypeError,
  DivisionByZero,
  NonPositiveVariance,
  UnboundReference,
  HistoryIndexOutOfRange,
  NonFiniteResult,
  DomainViolation,
  NegativeLikelihood,
  NegativeWeight,
  DegenerateBelief,
  DimensionLimit,
  ConfigError,
  UnrecognizedInitForm,
  UnrecognizedLikelihoodForm,
  UnboundedSupport,
  ZeroEvidence,
  InfiniteDomain,
  FiniteFluentMarginal,
  ValidationFailed,
  OracleNotApplicable,
  IoError,
};

std::string_view to_string(ErrorCode code);

// 1-based line/column; offset/length are byte positions into the source text.
struct SourceSpan {
  std::uint32_t line = 0;
  std::uint32_t column = 0;
  std::uint32_t offset = 0;
  std::uint32_t length = 0;

  bool valid() const { return line != 0; }
  friend bool operator==(const SourceSpan&, const SourceSpan&) = default;
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, SourceSpan span = {});

  ErrorCode code() const { return code_; }
  const SourceSpan& span() const { return span_; }
  // Message without the code prefix.
  const std::string& detail() const { return detail_; }

 private:
  ErrorCode code_;
  SourceSpan span_;
  std::string detail_;
};

enum class Severity : std::uint8_t { Error, Warning, Note };

struct Diagnostic {
  Severity severity = Severity::Error;
  ErrorCode code = ErrorCode::TypeError;
  SourceSpan span;
  std::string message;
};

std::string format_diagnostic(std::string_view file, const Diagnostic& d);
bool has_errors(const std::vector<Diagnostic>& diags);

}  // namespace belcal
