#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "opsyn/logic/formula.hpp"
#include "opsyn/symbols.hpp"

namespace opsyn::logic {

struct Gr1Split {
  Formula init;                     // no temporal operators, no primes
  std::vector<Formula> safety;      // bodies of [], X rewritten as primes
  std::vector<Formula> recurrence;  // bodies of []<>
};

class NotInGr1 : public std::runtime_error {
 public:
  NotInGr1(Formula offending, const std::string& why)
      : std::runtime_error("not in GR(1): " + why + ": " + to_string(offending)), offending_(std::move(offending)) {}
  const Formula& offending() const { return offending_; }

 private:
  Formula offending_;
};

/// Classifies the top-level conjuncts of a past-free formula.
Gr1Split split_gr1(const Formula& f);

/// init && [] s_0 && ... && []<> r_0 && ...
Formula reassemble(const Gr1Split& split);

/// Allocates boolean tester variables owned by one player.
class TesterFactory {
 public:
  TesterFactory(SymbolTable& symbols, Player owner, std::string prefix = "__past")
      : symbols_(symbols), owner_(owner), prefix_(std::move(prefix)) {}
  Formula fresh(SourceLoc loc);
  const std::vector<int>& created() const { return created_; }

 private:
  SymbolTable& symbols_;
  Player owner_;
  std::string prefix_;
  std::vector<int> created_;
};

struct PastElimination {
  Formula formula;
  std::vector<int> testers;  // variable ids
  Formula init;              // conjunction of tester initial values
  Formula trans;             // conjunction of tester transitions (primes on testers)
};

/// Replaces past subformulas by tester variables:
///   --X p  becomes t with init !t and t' <-> p
///   -X p   becomes t with init t and t' <-> p
///   p S q  becomes q || (p && t) with init !t and t' <-> (q || (p && t))
/// Once and historically go through S. Identical subformulas share a tester.
/// Throws CompileError when a past operator is applied to a primed operand.
PastElimination eliminate_past(const Formula& f, TesterFactory& fresh);

}  // namespace opsyn::logic
