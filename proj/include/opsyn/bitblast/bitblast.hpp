#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "opsyn/bdd/bdd.hpp"
#include "opsyn/game/game_spec.hpp"
#include "opsyn/logic/formula.hpp"
#include "opsyn/symbols.hpp"

namespace opsyn::bits {

using NodeId = std::uint32_t;
inline constexpr NodeId kFalse = 0;
inline constexpr NodeId kTrue = 1;

/// Hash-consed boolean DAG over bit literals. Identical subterms get the
/// same id, which is what the emitter uses to find shared buffers.
class BitStore {
 public:
  enum class Kind : std::uint8_t { Const, Lit, Not, And, Or };
  struct Node {
    Kind kind;
    std::uint32_t a;  // Const: value, Lit: bit index, Not/And/Or: operand
    std::uint32_t b;  // Lit: primed flag, And/Or: operand
  };

  BitStore();
  NodeId constant(bool v) const { return v ? kTrue : kFalse; }
  NodeId lit(int bit, bool primed);
  NodeId lnot(NodeId a);
  NodeId land(NodeId a, NodeId b);
  NodeId lor(NodeId a, NodeId b);
  NodeId lxor(NodeId a, NodeId b);
  NodeId iff(NodeId a, NodeId b) { return lnot(lxor(a, b)); }
  NodeId implies(NodeId a, NodeId b) { return lor(lnot(a), b); }
  NodeId ite(NodeId c, NodeId t, NodeId e);
  NodeId conj(const std::vector<NodeId>& xs);
  NodeId disj(const std::vector<NodeId>& xs);

  const Node& node(NodeId n) const { return nodes_[n]; }
  std::size_t size() const { return nodes_.size(); }
  bool is_lit_or_const(NodeId n) const;

  /// Evaluates under unprimed values `cur` and primed values `next`
  /// (indexed by bit).
  bool eval(NodeId n, const std::vector<char>& cur, const std::vector<char>& next) const;
  /// Bit literals occurring in n.
  std::vector<std::pair<int, bool>> literals(NodeId n) const;
  bool has_primed(NodeId n) const;

 private:
  NodeId make(Kind k, std::uint32_t a, std::uint32_t b);
  struct Key {
    Kind k;
    std::uint32_t a, b;
    bool operator==(const Key& o) const { return k == o.k && a == o.a && b == o.b; }
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      return (static_cast<std::size_t>(k.a) * 0x9E3779B97F4A7C15ull) ^ (static_cast<std::size_t>(k.b) << 7) ^
             static_cast<std::size_t>(k.k);
    }
  };
  std::vector<Node> nodes_;
  std::unordered_map<Key, NodeId, KeyHash> table_;
};

/// One program bit.
struct BitVar {
  std::string name;  // `x@i`, `arr.k@i`; booleans drop the `@i`
  int var = -1;
  int element = 0;
  int bit = 0;
  Player owner = Player::Env;
};

/// Bit assignment for every variable of a symbol table, LSB first.
class BitLayout {
 public:
  BitLayout() = default;
  explicit BitLayout(const SymbolTable& symbols);
  int bit_count() const { return static_cast<int>(bits_.size()); }
  const BitVar& bit(int i) const { return bits_[static_cast<std::size_t>(i)]; }
  int base(int var, int element) const;
  int width(int var) const { return widths_[static_cast<std::size_t>(var)]; }
  std::vector<int> bits_of(Player p) const;
  std::vector<int> bits_of_var(int var) const;
  int find(const std::string& name) const;  // -1 if absent

 private:
  std::vector<BitVar> bits_;
  std::vector<int> first_;   // per variable
  std::vector<int> widths_;  // per variable
  std::map<std::string, int> by_name_;
};

/// Two's-complement bit vector, LSB first, always read as signed.
struct BitVec {
  std::vector<NodeId> bits;
  int width() const { return static_cast<int>(bits.size()); }
};

/// Encodes formulas over bounded integers into bit-level formulas.
/// Arithmetic widens by one bit per addition or subtraction; assignments
/// to wrapping variables truncate, assignments to ranged variables do not.
class Blaster {
 public:
  Blaster(BitStore& store, const BitLayout& layout, const SymbolTable& symbols)
      : store_(store), layout_(layout), symbols_(symbols) {}

  NodeId blast(const logic::Formula& f);           // boolean context
  BitVec blast_int(const logic::Formula& f);       // integer context
  /// MIN <= x <= MAX for each element of a ranged variable; true otherwise.
  NodeId domain_constraint(int var, bool primed);

  // circuit helpers, exposed for tests
  BitVec constant(std::int64_t v);
  BitVec extend(const BitVec& v, int width);
  BitVec add(const BitVec& a, const BitVec& b);
  BitVec sub(const BitVec& a, const BitVec& b);
  NodeId equal(const BitVec& a, const BitVec& b);
  NodeId less(const BitVec& a, const BitVec& b);

 private:
  NodeId go_bool(const logic::Formula& f, bool primed);
  BitVec go_int(const logic::Formula& f, bool primed);
  BitVec var_bits(int var, int element, bool primed);
  NodeId assign(const logic::Formula& target, const logic::Formula& value, bool primed);
  bool is_bool(const logic::Formula& f) const;
  std::int64_t const_value(const logic::Formula& f, bool& ok) const;

  BitStore& store_;
  const BitLayout& layout_;
  const SymbolTable& symbols_;
  std::unordered_map<const logic::Node*, NodeId> bool_memo_[2];
  std::unordered_map<const logic::Node*, BitVec> int_memo_[2];
  std::vector<logic::Formula> pins_;  // keeps memo keys alive
};

/// Bit-level GR(1) game.
struct BitGame {
  BitStore store;
  BitLayout layout;
  std::vector<int> env_bits, sys_bits;
  std::vector<NodeId> env_init, sys_init, env_safety, sys_safety, env_live, sys_live;
  std::vector<std::string> env_safety_tags, sys_safety_tags;
};

/// Bitblasts a game, adding domain constraints for ranged variables to the
/// owner's initial condition and safety.
BitGame blast_game(const game::GameSpec& game);

/// Slugs prefix format. With `buffers`, compound subformulas used more than
/// once inside a formula become `$ n` memory buffers referenced by `?i`.
std::string emit_slugs(const BitGame& game, bool buffers = true);
std::string emit_formula(const BitStore& store, const BitLayout& layout, NodeId root, bool buffers = true);

struct SlugsFile {
  std::vector<std::string> inputs, outputs;
  std::map<std::string, std::vector<NodeId>> sections;
};
/// Parses Slugs prefix text; bit names are resolved by `names` (name to bit
/// index; unknown names are appended). Buffers are inlined on the fly.
SlugsFile parse_slugs(const std::string& text, BitStore& store, std::map<std::string, int>& names);
NodeId parse_formula(const std::string& line, BitStore& store, std::map<std::string, int>& names);

/// Translates store nodes into BDDs; bit i maps to manager variables
/// unprimed[i] and primed[i].
class BddBuilder {
 public:
  BddBuilder(const BitStore& store, bdd::Manager& mgr, std::vector<int> unprimed, std::vector<int> primed)
      : store_(store), mgr_(mgr), unprimed_(std::move(unprimed)), primed_(std::move(primed)) {}
  bdd::Bdd build(NodeId n);

 private:
  const BitStore& store_;
  bdd::Manager& mgr_;
  std::vector<int> unprimed_, primed_;
  std::unordered_map<NodeId, bdd::Bdd> memo_;
};

}  // namespace opsyn::bits
