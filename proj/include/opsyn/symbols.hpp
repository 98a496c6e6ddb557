#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "opsyn/diagnostics.hpp"

namespace opsyn {

enum class Player : std::uint8_t { Env, Sys };

inline Player opponent(Player p) { return p == Player::Env ? Player::Sys : Player::Env; }
inline const char* player_name(Player p) { return p == Player::Env ? "env" : "sys"; }

enum class VarKind : std::uint8_t { Declarative, Imperative };

/// Scalar value domain. Ranged integers saturate (out-of-range values are
/// made unsatisfiable by domain constraints); every other kind wraps.
struct Domain {
  enum class Kind : std::uint8_t { Bool, Bit, Byte, Ranged, Bitfield };
  Kind kind = Kind::Bool;
  std::int64_t min = 0;
  std::int64_t max = 1;
  int width = 1;
  bool is_signed = false;

  static Domain boolean();
  static Domain bit();
  static Domain byte();
  static Domain ranged(std::int64_t lo, std::int64_t hi);
  static Domain bitfield(int width, bool is_signed);

  bool wraps() const { return kind != Kind::Ranged; }
  bool is_boolean() const { return kind == Kind::Bool || kind == Kind::Bit; }
  /// True when the bit encoding admits values outside [min, max].
  bool needs_range_constraint() const;
  std::string to_string() const;
};

/// Smallest two's-complement (or unsigned) width holding [lo, hi].
int width_for_range(std::int64_t lo, std::int64_t hi);

struct VarDecl {
  std::string name;
  Player owner = Player::Env;
  VarKind kind = VarKind::Imperative;
  Domain domain;
  int array_length = 0;                 // 0 for scalars
  std::optional<int> scope_process;     // nullopt: global
  std::optional<std::int64_t> initial;
  bool auxiliary = false;               // introduced by the compiler
  SourceLoc loc;

  bool is_array() const { return array_length > 0; }
  bool is_free() const { return kind == VarKind::Declarative; }
  int element_count() const { return is_array() ? array_length : 1; }
};

/// Flat table of every variable in a compilation, user and auxiliary.
class SymbolTable {
 public:
  int add(VarDecl decl);
  const VarDecl& at(int id) const { return vars_.at(static_cast<std::size_t>(id)); }
  VarDecl& at(int id) { return vars_.at(static_cast<std::size_t>(id)); }
  int size() const { return static_cast<int>(vars_.size()); }
  const std::vector<VarDecl>& all() const { return vars_; }

  /// Resolves a name as seen from inside `process` (locals shadow globals).
  std::optional<int> lookup(const std::string& name, std::optional<int> process) const;

 private:
  std::vector<VarDecl> vars_;
};

/// Identifiers with this prefix are reserved for compiler-generated variables.
inline constexpr const char* kReservedPrefix = "__";

}  // namespace opsyn
