#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "opsyn/diagnostics.hpp"
#include "opsyn/symbols.hpp"

namespace opsyn::logic {

/// Operators of the formula IR: LTL with past over bounded integer
/// arithmetic. `Prime` only survives until semantic checking, which pushes
/// primes down onto variable references.
enum class Op : std::uint8_t {
  BoolConst,
  IntConst,
  Var,     // variable reference, optionally primed; args[0] is the array index
  Bit,     // single bit of a variable (var, value = bit index, element in `element`)
  Prime,
  Not,
  Neg,
  And,
  Or,
  Implies,
  Iff,
  Ite,
  Add,
  Sub,
  Eq,
  Ne,
  Lt,
  Le,
  Gt,
  Ge,
  Assign,  // args[0] is the (primed) target, args[1] the value
  Next,
  Always,
  Eventually,
  Until,
  Prev,      // strong previous, --X
  WeakPrev,  // weak previous, -X
  Since,
  Once,
  Historically,
};

struct Node;
using Formula = std::shared_ptr<const Node>;

struct Node {
  Op op = Op::BoolConst;
  std::int64_t value = 0;
  int var = -1;
  int element = 0;
  bool primed = false;
  std::string name;
  std::vector<Formula> args;
  SourceLoc loc;
};

// Construction. The helpers fold boolean constants but otherwise keep the
// tree exactly as written.
Formula make_bool(bool v);
Formula make_int(std::int64_t v);
Formula make_var(std::string name, int id, bool primed = false, Formula index = nullptr, SourceLoc loc = {});
Formula make_bit(std::string name, int var, int element, int bit, bool primed);
Formula make_unary(Op op, Formula a, SourceLoc loc = {});
Formula make_binary(Op op, Formula a, Formula b, SourceLoc loc = {});
Formula make_ite(Formula c, Formula t, Formula e);
Formula make_assign(Formula target, Formula value, SourceLoc loc = {});

Formula land(Formula a, Formula b);
Formula lor(Formula a, Formula b);
Formula lnot(Formula a);
Formula implies(Formula a, Formula b);
Formula iff(Formula a, Formula b);
Formula eq(Formula a, Formula b);
Formula eq_const(int var, const std::string& name, std::int64_t value, bool primed);
Formula conj(const std::vector<Formula>& parts);
Formula disj(const std::vector<Formula>& parts);

bool is_true(const Formula& f);
bool is_false(const Formula& f);

bool is_temporal(Op op);
bool is_past(Op op);
bool is_future(Op op);
bool is_comparison(Op op);
bool is_arithmetic(Op op);

bool contains(const Formula& f, const std::function<bool(const Node&)>& pred);
bool has_temporal(const Formula& f);
bool has_past(const Formula& f);
bool has_future(const Formula& f);
bool has_prime(const Formula& f);

/// Depth-first visit of every node (shared nodes visited once per path).
void visit(const Formula& f, const std::function<void(const Node&)>& fn);

/// Rebuilds `f` bottom-up; `fn` may return nullptr to keep the rebuilt node.
Formula rewrite(const Formula& f, const std::function<Formula(const Formula&)>& fn);

/// Primes every variable reference (TLA-style priming of an expression).
/// Returns nullptr if some reference is already primed.
Formula prime_all(const Formula& f);

/// Replaces primed references of variables for which `pred` holds by their
/// unprimed counterparts.
Formula unprime_if(const Formula& f, const std::function<bool(int var)>& pred);

bool structurally_equal(const Formula& a, const Formula& b);

/// Infix rendering using the source syntax (`'`, `-X`, `--X`, `[]`, `<>`).
std::string to_string(const Formula& f);

}  // namespace opsyn::logic
