#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace opsyn {

struct SourceLoc {
  int line = 0;
  int column = 0;
};

enum class Severity { Error, Warning, Note };

struct Diagnostic {
  SourceLoc loc;
  Severity severity = Severity::Error;
  std::string rule;
  std::string message;
};

/// Renders "line:column: severity [rule] message".
std::string format_diagnostic(const Diagnostic& d);

/// Thrown when a compilation stage produces one or more errors.
class CompileError : public std::runtime_error {
 public:
  explicit CompileError(std::vector<Diagnostic> diagnostics);
  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

/// Raised when a node or state budget is exhausted.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline Diagnostic make_error(SourceLoc loc, std::string rule, std::string message) {
  return Diagnostic{loc, Severity::Error, std::move(rule), std::move(message)};
}

inline Diagnostic make_warning(SourceLoc loc, std::string rule, std::string message) {
  return Diagnostic{loc, Severity::Warning, std::move(rule), std::move(message)};
}

bool has_errors(const std::vector<Diagnostic>& diags);

}  // namespace opsyn
