#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

namespace opsyn::bdd {

class Manager;

/// Reference-counted handle to a BDD node. Handles keep their node alive
/// across garbage collection and reordering.
class Bdd {
 public:
  Bdd() = default;
  Bdd(Manager* m, std::uint32_t node);
  Bdd(const Bdd& o);
  Bdd(Bdd&& o) noexcept;
  Bdd& operator=(const Bdd& o);
  Bdd& operator=(Bdd&& o) noexcept;
  ~Bdd();

  Manager* manager() const { return mgr_; }
  std::uint32_t node() const { return node_; }
  bool valid() const { return mgr_ != nullptr; }
  bool is_true() const { return node_ == 1; }
  bool is_false() const { return node_ == 0; }
  bool is_const() const { return node_ <= 1; }

  Bdd operator!() const;
  Bdd operator&(const Bdd& o) const;
  Bdd operator|(const Bdd& o) const;
  Bdd operator^(const Bdd& o) const;
  Bdd& operator&=(const Bdd& o) { return *this = *this & o; }
  Bdd& operator|=(const Bdd& o) { return *this = *this | o; }
  Bdd implies(const Bdd& o) const;
  Bdd iff(const Bdd& o) const;
  bool operator==(const Bdd& o) const { return node_ == o.node_ && mgr_ == o.mgr_; }
  bool operator!=(const Bdd& o) const { return !(*this == o); }
  /// this => o
  bool leq(const Bdd& o) const;

 private:
  Manager* mgr_ = nullptr;
  std::uint32_t node_ = 0;
};

struct ManagerStats {
  std::size_t live_nodes = 0;
  std::size_t peak_live_nodes = 0;
  std::size_t allocated_nodes = 0;
  std::size_t gc_runs = 0;
  std::size_t reorder_runs = 0;
  std::size_t reorder_swaps = 0;
  std::size_t cache_lookups = 0;
  std::size_t cache_hits = 0;
};

struct ReorderResult {
  std::size_t nodes_before = 0;
  std::size_t nodes_after = 0;
  std::size_t moves = 0;
};

enum class ReorderPolicy { Off, Auto };

class Manager {
 public:
  explicit Manager(std::size_t node_limit = 0);
  Manager(const Manager&) = delete;
  Manager& operator=(const Manager&) = delete;
  ~Manager();

  /// Adds a variable at the bottom of the order. With `same_group`, the
  /// variable is kept adjacent to the previous one during reordering.
  int add_var(const std::string& name, bool same_group = false);
  int var_count() const { return static_cast<int>(names_.size()); }
  const std::string& var_name(int v) const { return names_[static_cast<std::size_t>(v)]; }
  int level_of(int v) const { return static_cast<int>(var2level_[static_cast<std::size_t>(v)]); }
  int var_at_level(int l) const { return static_cast<int>(level2var_[static_cast<std::size_t>(l)]); }
  std::vector<int> order() const;

  Bdd bdd_true();
  Bdd bdd_false();
  Bdd var(int v);
  Bdd nvar(int v);
  Bdd constant(bool b) { return b ? bdd_true() : bdd_false(); }

  Bdd ite(const Bdd& f, const Bdd& g, const Bdd& h);
  Bdd cube(const std::vector<int>& vars);
  Bdd exists(const std::vector<int>& vars, const Bdd& f);
  Bdd forall(const std::vector<int>& vars, const Bdd& f);
  /// exists vars. (f & g), without building f & g
  Bdd and_exists(const Bdd& f, const Bdd& g, const std::vector<int>& vars);
  /// Simultaneous substitution of variables: map[v] is the replacement of v
  /// (or -1 to keep v).
  Bdd rename(const Bdd& f, const std::vector<int>& map);
  Bdd cofactor(const Bdd& f, int v, bool value);

  /// Decision variable of the root node, -1 for constants.
  int top_var(const Bdd& f) const;
  Bdd then_branch(const Bdd& f) { return Bdd(this, nodes_[f.node()].high); }
  Bdd else_branch(const Bdd& f) { return Bdd(this, nodes_[f.node()].low); }
  /// Cofactor by a partial assignment (vars[i] := values[i]).
  Bdd restrict(const Bdd& f, const std::vector<int>& vars, const std::vector<char>& values);

  bool eval(const Bdd& f, const std::vector<char>& assignment) const;
  std::vector<int> support(const Bdd& f) const;
  std::size_t node_count(const Bdd& f) const;
  std::size_t node_count(const std::vector<Bdd>& fs) const;
  double sat_count(const Bdd& f, int nvars) const;

  /// Calls fn for every assignment of `vars` that satisfies f; f must not
  /// depend on variables outside `vars`. Enumeration follows the current
  /// variable order, false before true. fn returns false to stop.
  void for_each_sat(const Bdd& f, const std::vector<int>& vars,
                    const std::function<bool(const std::vector<char>&)>& fn) const;
  /// Lexicographically smallest satisfying assignment of vars (f must be
  /// satisfiable and depend only on vars).
  std::vector<char> pick_min(const Bdd& f, const std::vector<int>& vars) const;

  std::string to_dot(const std::vector<Bdd>& roots, const std::vector<std::string>& names = {}) const;

  // Garbage collection and reordering.
  void gc();
  ReorderResult reorder();
  void set_reorder_policy(ReorderPolicy p) { policy_ = p; }
  ReorderPolicy reorder_policy() const { return policy_; }
  void set_reorder_threshold(std::size_t min_nodes) { reorder_min_ = next_reorder_ = min_nodes; }
  void set_reorder_factor(double f) { reorder_factor_ = f; }
  /// Permutes the order to the given list of variables (top first).
  void shuffle_to(const std::vector<int>& order);

  std::size_t live_nodes() const { return live_; }
  const ManagerStats& stats() const { return stats_; }
  void reset_peak() { stats_.peak_live_nodes = live_; }
  std::size_t node_limit() const { return node_limit_; }

  // used by Bdd handles
  void ref(std::uint32_t n) {
    if (n > 1) ++nodes_[n].ext;
  }
  void deref(std::uint32_t n) {
    if (n > 1) --nodes_[n].ext;
  }

 private:
  friend class Bdd;
  static constexpr std::uint32_t kTerminalVar = 0xFFFFFFFFu;
  static constexpr std::uint32_t kNil = 0xFFFFFFFFu;

  struct Node {
    std::uint32_t var;
    std::uint32_t low;
    std::uint32_t high;
    std::uint32_t next;
    std::uint32_t ext;
  };

  struct Subtable {
    std::vector<std::uint32_t> buckets;
    std::size_t count = 0;
  };

  struct CacheEntry {
    std::uint32_t op = 0, a = 0, b = 0, c = 0, result = 0, gen = 0;
  };

  enum Op : std::uint32_t { kAnd = 1, kOr, kXor, kNot, kIte, kExists, kAndExists, kCofactor0, kCofactor1 };

  std::uint32_t level(std::uint32_t n) const {
    std::uint32_t v = nodes_[n].var;
    return v == kTerminalVar ? kTerminalVar : var2level_[v];
  }
  std::uint32_t make_node(std::uint32_t var, std::uint32_t low, std::uint32_t high);
  std::uint32_t alloc_node();
  void insert_unique(std::uint32_t n);
  void remove_unique(std::uint32_t n);
  void resize_subtable(Subtable& t);
  static std::size_t hash_pair(std::uint32_t low, std::uint32_t high, std::size_t mask) {
    std::uint64_t h = (static_cast<std::uint64_t>(low) * 0x9E3779B97F4A7C15ull) ^
                      (static_cast<std::uint64_t>(high) * 0xC2B2AE3D27D4EB4Full);
    return static_cast<std::size_t>((h ^ (h >> 29)) & mask);
  }

  bool cache_get(std::uint32_t op, std::uint32_t a, std::uint32_t b, std::uint32_t c, std::uint32_t& r);
  void cache_put(std::uint32_t op, std::uint32_t a, std::uint32_t b, std::uint32_t c, std::uint32_t r);

  std::uint32_t apply_rec(std::uint32_t op, std::uint32_t a, std::uint32_t b);
  std::uint32_t not_rec(std::uint32_t a);
  std::uint32_t ite_rec(std::uint32_t f, std::uint32_t g, std::uint32_t h);
  std::uint32_t exists_rec(std::uint32_t f, std::uint32_t cube);
  std::uint32_t and_exists_rec(std::uint32_t f, std::uint32_t g, std::uint32_t cube);
  std::uint32_t cofactor_rec(std::uint32_t f, std::uint32_t var, bool value);
  std::uint32_t cube_node(const std::vector<int>& vars);

  void safe_point();
  void collect();
  // reordering
  void reorder_begin();
  void reorder_end();
  void swap_levels(std::uint32_t l);
  void ref_internal(std::uint32_t n) {
    if (n > 1) ++iref_[n];
  }
  void deref_internal(std::uint32_t n);
  std::size_t sift_groups();

  std::vector<Node> nodes_;
  std::vector<std::uint32_t> free_;
  std::vector<Subtable> tables_;  // per variable
  std::vector<std::string> names_;
  std::vector<std::uint32_t> var2level_;
  std::vector<std::uint32_t> level2var_;
  std::vector<std::uint32_t> group_;  // group id per variable
  std::vector<CacheEntry> cache_;
  std::uint32_t gen_ = 1;
  std::size_t live_ = 0;
  std::size_t node_limit_;
  std::size_t gc_threshold_ = 1 << 18;
  ReorderPolicy policy_ = ReorderPolicy::Off;
  std::size_t reorder_min_ = 4000;
  double reorder_factor_ = 4.0;
  std::size_t next_reorder_ = 4000;
  bool in_reorder_ = false;
  std::vector<std::uint32_t> iref_;
  ManagerStats stats_;
};

}  // namespace opsyn::bdd
