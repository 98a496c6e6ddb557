#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "opsyn/logic/formula.hpp"
#include "opsyn/symbols.hpp"

namespace opsyn::frontend {

using logic::Formula;

struct Stmt;
using StmtPtr = std::shared_ptr<Stmt>;
using Sequence = std::vector<StmtPtr>;

enum class StmtKind { Expr, Assign, If, Do, Else, Break, Goto, Atomic };

struct Stmt {
  StmtKind kind = StmtKind::Expr;
  Formula expr;                   // Expr: the predicate/action; Assign: Op::Assign node
  std::vector<Sequence> options;  // If, Do
  Sequence body;                  // Atomic
  std::string target;             // Goto
  std::vector<std::string> labels;
  SourceLoc loc;
  int id = -1;  // unique per process, assigned in parse order
};

enum class Flavor { Assume, Assert };

inline Player constrained_player(Flavor f) { return f == Flavor::Assume ? Player::Env : Player::Sys; }
inline const char* flavor_name(Flavor f) { return f == Flavor::Assume ? "assume" : "assert"; }

struct Process {
  Flavor flavor = Flavor::Assert;
  Player pc_owner = Player::Sys;
  bool pc_owner_explicit = false;
  bool active = false;
  std::string name;
  std::vector<VarDecl> locals;
  Sequence body;
  SourceLoc loc;
  int pid = -1;  // index into SpecAst::processes
};

struct LtlBlock {
  Flavor flavor = Flavor::Assert;
  Formula formula;
  SourceLoc loc;
};

struct Product;

// A unit at top level or inside a product.
struct Unit {
  enum class Kind { Process, Product, Ltl } kind = Kind::Process;
  int index = -1;  // into processes / products / ltl
};

struct Product {
  bool sync = false;
  std::vector<Unit> members;  // processes or products only
  SourceLoc loc;
};

struct SpecAst {
  std::vector<VarDecl> globals;
  std::vector<Process> processes;
  std::vector<Product> products;
  std::vector<LtlBlock> ltl;
  std::vector<Unit> units;  // top-level, source order
};

/// Parse open-Promela text. Throws CompileError on syntax errors.
/// `defines` override `#define` lines of the same name in the source.
SpecAst parse(const std::string& source, const std::map<std::string, std::string>& defines = {});

struct CheckedSpec {
  SpecAst ast;
  SymbolTable symbols;
  std::vector<Diagnostic> warnings;
  bool has_atomic = false;
};

/// Resolves names, pushes primes onto variables and enforces the
/// ownership and priming rules. Throws CompileError listing every violation.
CheckedSpec check_semantics(SpecAst ast);

/// Source text that parses back to the same AST.
std::string print(const SpecAst& ast);

bool structurally_equal(const SpecAst& a, const SpecAst& b);

}  // namespace opsyn::frontend
