#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "opsyn/bdd/bdd.hpp"
#include "opsyn/bitblast/bitblast.hpp"
#include "opsyn/frontend/ast.hpp"
#include "opsyn/game/game_spec.hpp"
#include "opsyn/graph/program_graph.hpp"

namespace opsyn::translate {

using logic::Formula;

struct Options {
  bool syntactic_guards = false;
  bool atomic_visible_ltl = false;
};

/// Exact and syntactic statement guards. The exact guard existentially
/// quantifies the primed bits of the data-flow player, using a private BDD
/// manager over the bits of `symbols`.
class GuardEngine {
 public:
  explicit GuardEngine(const SymbolTable& symbols);

  /// Exact guard, as a readable formula when the syntactic approximation
  /// happens to be exact, otherwise as a formula over bits.
  Formula exact(const Formula& stmt, Player dataflow);
  /// Replaces maximal subexpressions that mention primed variables of
  /// `dataflow` by true (positive positions only; negated ones whole).
  Formula syntactic(const Formula& stmt, Player dataflow) const;

  bdd::Bdd to_bdd(const Formula& f);
  bdd::Bdd exact_bdd(const Formula& stmt, Player dataflow);
  bool equivalent(const Formula& a, const Formula& b) { return to_bdd(a) == to_bdd(b); }
  Formula from_bdd(const bdd::Bdd& f);
  bdd::Manager& manager() { return mgr_; }
  const bits::BitLayout& layout() const { return layout_; }
  /// Domain constraints of every variable, current and next.
  bdd::Bdd care();

 private:
  Formula as_range(const bdd::Bdd& f);

  SymbolTable symbols_;
  bits::BitStore store_;
  bits::BitLayout layout_;
  bits::Blaster blaster_;
  bdd::Manager mgr_;
  std::vector<int> unprimed_, primed_;
  std::unique_ptr<bits::BddBuilder> builder_;
  bdd::Bdd care_;
};

/// Per-process translation data, indexed like Translation::processes.
struct ProcessInfo {
  int pid = -1;
  std::string name;
  frontend::Flavor flavor = frontend::Flavor::Assert;
  Player constrained = Player::Sys;
  Player pc_owner = Player::Sys;
  int roster = -1;
  int pc_var = -1, key_var = -1, pchat_var = -1;
  graph::ProgramGraph graph;     // with terminal self-loops added
  std::vector<Formula> stmt;     // per edge, past operators eliminated
  std::vector<Formula> guard;    // per edge
  bool assume_sys() const { return flavor == frontend::Flavor::Assume && pc_owner == Player::Sys; }
};

struct Translation {
  game::GameSpec game;
  std::vector<ProcessInfo> processes;
  std::vector<Diagnostic> warnings;
};

Translation translate(const frontend::CheckedSpec& spec, const Options& options = {});

/// parse + check + translate, collecting warnings.
Translation compile_source(const std::string& source, const Options& options = {},
                           const std::map<std::string, std::string>& defines = {});

}  // namespace opsyn::translate
