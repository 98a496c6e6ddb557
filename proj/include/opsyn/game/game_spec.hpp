#pragma once

#include <string>
#include <vector>

#include "opsyn/diagnostics.hpp"
#include "opsyn/logic/formula.hpp"
#include "opsyn/symbols.hpp"

namespace opsyn::game {

/// One conjunct of a player's specification, tagged with where it came from
/// (for dumps and tests), e.g. "dataflow(fox)".
struct Constraint {
  std::string tag;
  logic::Formula formula;
};

struct PlayerSpec {
  std::vector<Constraint> init;
  std::vector<Constraint> safety;  // may contain primes
  std::vector<Constraint> recurrence;
};

/// Scheduling element: a process or a product. Elements of the two top
/// asynchronous products (env, sys) have parent -1.
struct RosterEntry {
  enum class Kind { Process, Sync, Async } kind = Kind::Process;
  std::string name;
  int pid = -1;             // process index, -1 for products
  Player side = Player::Env;  // which top product it belongs to
  int parent = -1;          // roster index of the containing product
  int local_id = 0;         // m(.) inside the containing product
  int ps_var = -1;          // async products: their selector variable
  int reserved = 0;         // async products: n_k
  int pc_var = -1, key_var = -1, pchat_var = -1;
  std::vector<int> members;  // products: roster indices
};

struct GameSpec {
  SymbolTable symbols;
  PlayerSpec env, sys;
  std::vector<RosterEntry> roster;
  int ps_env_top = -1, ps_sys_top = -1;  // selector variables of the top products
  int n_env_top = 0, n_sys_top = 0;
  int ex_var = -1, pm_var = -1;
  std::vector<Diagnostic> warnings;

  const PlayerSpec& side(Player p) const { return p == Player::Env ? env : sys; }
  PlayerSpec& side(Player p) { return p == Player::Env ? env : sys; }
};

/// Structured JSON rendering: variable tables, formula strings, roster.
std::string dump_json(const GameSpec& game);

}  // namespace opsyn::game
