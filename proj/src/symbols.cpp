#include "opsyn/symbols.hpp"

#include <sstream>

namespace opsyn {

std::string format_diagnostic(const Diagnostic& d) {
  std::ostringstream out;
  out << d.loc.line << ':' << d.loc.column << ": ";
  switch (d.severity) {
    case Severity::Error: out << "error"; break;
    case Severity::Warning: out << "warning"; break;
    case Severity::Note: out << "note"; break;
  }
  out << " [" << d.rule << "] " << d.message;
  return out.str();
}

namespace {

std::string summarize(const std::vector<Diagnostic>& diags) {
  std::ostringstream out;
  bool first = true;
  for (const auto& d : diags) {
    if (!first) out << '\n';
    out << format_diagnostic(d);
    first = false;
  }
  return out.str();
}

}  // namespace

CompileError::CompileError(std::vector<Diagnostic> diagnostics)
    : std::runtime_error(summarize(diagnostics)), diagnostics_(std::move(diagnostics)) {}

bool has_errors(const std::vector<Diagnostic>& diags) {
  for (const auto& d : diags)
    if (d.severity == Severity::Error) return true;
  return false;
}

int width_for_range(std::int64_t lo, std::int64_t hi) {
  if (lo >= 0) {
    int w = 1;
    while (w < 63 && (std::int64_t{1} << w) - 1 < hi) ++w;
    return w;
  }
  int w = 1;
  while (w < 63 && (-(std::int64_t{1} << (w - 1)) > lo || (std::int64_t{1} << (w - 1)) - 1 < hi)) ++w;
  return w;
}

Domain Domain::boolean() { return Domain{Kind::Bool, 0, 1, 1, false}; }
Domain Domain::bit() { return Domain{Kind::Bit, 0, 1, 1, false}; }
Domain Domain::byte() { return Domain{Kind::Byte, 0, 255, 8, false}; }

Domain Domain::ranged(std::int64_t lo, std::int64_t hi) {
  Domain d{Kind::Ranged, lo, hi, width_for_range(lo, hi), lo < 0};
  return d;
}

Domain Domain::bitfield(int width, bool is_signed) {
  Domain d{Kind::Bitfield, 0, 0, width, is_signed};
  if (is_signed) {
    d.min = -(std::int64_t{1} << (width - 1));
    d.max = (std::int64_t{1} << (width - 1)) - 1;
  } else {
    d.max = (std::int64_t{1} << width) - 1;
  }
  return d;
}

bool Domain::needs_range_constraint() const {
  if (kind != Kind::Ranged) return false;
  std::int64_t rep_lo = is_signed ? -(std::int64_t{1} << (width - 1)) : 0;
  std::int64_t rep_hi = is_signed ? (std::int64_t{1} << (width - 1)) - 1 : (std::int64_t{1} << width) - 1;
  return rep_lo != min || rep_hi != max;
}

std::string Domain::to_string() const {
  switch (kind) {
    case Kind::Bool: return "bool";
    case Kind::Bit: return "bit";
    case Kind::Byte: return "byte";
    case Kind::Ranged: return "int(" + std::to_string(min) + ", " + std::to_string(max) + ")";
    case Kind::Bitfield: return std::string(is_signed ? "signed" : "unsigned") + " : " + std::to_string(width);
  }
  return "?";
}

int SymbolTable::add(VarDecl decl) {
  vars_.push_back(std::move(decl));
  return static_cast<int>(vars_.size()) - 1;
}

std::optional<int> SymbolTable::lookup(const std::string& name, std::optional<int> process) const {
  std::optional<int> global;
  for (int i = 0; i < size(); ++i) {
    const auto& v = vars_[static_cast<std::size_t>(i)];
    if (v.name != name) continue;
    if (v.scope_process && process && *v.scope_process == *process) return i;
    if (!v.scope_process) global = i;
  }
  return global;
}

}  // namespace opsyn
