#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "opsyn/bdd/bdd.hpp"
#include "opsyn/bitblast/bitblast.hpp"

namespace opsyn::gr1 {

struct SolverOptions {
  bdd::ReorderPolicy reorder = bdd::ReorderPolicy::Auto;
  bool reorder_phase3 = true;
  std::size_t node_limit = 0;  // 0: unlimited
};

struct PhaseStats {
  std::string phase;
  double seconds = 0;
  std::size_t peak_nodes = 0;
  std::size_t live_nodes = 0;
  std::size_t reorders = 0;
  std::size_t iterations = 0;
};

/// Symbolic GR(1) solver over a bitblasted game. Program bits are
/// interleaved with their primed copies; the memory bits used by the
/// combined strategy are allocated up front at the bottom of the order.
class Solver {
 public:
  explicit Solver(const bits::BitGame& game, SolverOptions options = {});

  /// Phase 1: winning region. Returns realizability.
  bool solve();
  /// Phase 2: one sub-strategy relation per system goal.
  void build_strategies();
  /// Phase 3: combined relation over (x, y, mem, x', y', mem').
  void combine();

  bool realizable() const { return realizable_; }
  const bdd::Bdd& winning() const { return z_; }
  const bdd::Bdd& strategy() const { return strategy_; }
  const std::vector<bdd::Bdd>& goal_strategies() const { return sub_; }
  const std::vector<PhaseStats>& stats() const { return stats_; }
  std::string stats_csv() const;

  bdd::Manager& manager() { return mgr_; }
  const bits::BitGame& game() const { return game_; }

  int goal_count() const { return static_cast<int>(sys_goals_.size()); }
  int mem_width() const { return static_cast<int>(mem_.size()); }

  // manager variables
  int cur(int bit) const { return cur_[static_cast<std::size_t>(bit)]; }
  int next(int bit) const { return next_[static_cast<std::size_t>(bit)]; }
  const std::vector<int>& mem_vars() const { return mem_; }
  const std::vector<int>& mem_next_vars() const { return mem_next_; }
  const std::vector<int>& x() const { return x_; }
  const std::vector<int>& y() const { return y_; }
  const std::vector<int>& x_next() const { return xp_; }
  const std::vector<int>& y_next() const { return yp_; }

  const bdd::Bdd& env_init() const { return env_init_; }
  const bdd::Bdd& sys_init() const { return sys_init_; }
  const bdd::Bdd& env_trans() const { return env_trans_; }
  const bdd::Bdd& sys_trans() const { return sys_trans_; }
  const std::vector<bdd::Bdd>& env_goals() const { return env_goals_; }
  const std::vector<bdd::Bdd>& sys_goals() const { return sys_goals_; }
  /// Y iterates of goal j (index 0 is false) and X iterates [rank][env goal].
  const std::vector<bdd::Bdd>& y_iterates(int j) const { return yit_[static_cast<std::size_t>(j)]; }
  const std::vector<std::vector<bdd::Bdd>>& x_iterates(int j) const { return xit_[static_cast<std::size_t>(j)]; }

  bdd::Bdd prime(const bdd::Bdd& f);
  bdd::Bdd unprime(const bdd::Bdd& f);
  /// States from which the system can force the next state into s.
  bdd::Bdd cpre(const bdd::Bdd& s);
  /// mem = j (or mem' = j)
  bdd::Bdd mem_is(int j, bool primed);

 private:
  void begin_phase(const std::string& name);
  void end_phase(std::size_t iterations);

  const bits::BitGame& game_;
  SolverOptions options_;
  bdd::Manager mgr_;
  std::vector<int> cur_, next_, x_, y_, xp_, yp_, mem_, mem_next_;
  std::vector<int> prime_map_, unprime_map_;
  bdd::Bdd env_init_, sys_init_, env_trans_, sys_trans_;
  std::vector<bdd::Bdd> env_goals_, sys_goals_;
  bdd::Bdd z_, strategy_;
  std::vector<std::vector<bdd::Bdd>> yit_;
  std::vector<std::vector<std::vector<bdd::Bdd>>> xit_;
  std::vector<bdd::Bdd> sub_;
  bool realizable_ = false;
  bool solved_ = false;
  std::vector<PhaseStats> stats_;
  double phase_start_ = 0;
  std::size_t phase_reorders_ = 0;
};

}  // namespace opsyn::gr1
