#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "opsyn/gr1/solver.hpp"
#include "opsyn/symbols.hpp"

namespace opsyn::gr1 {

/// Values of all program bits, indexed like the bit layout.
using Valuation = std::vector<char>;

struct TransducerState {
  int goal = 0;  // memory: index of the system goal pursued
  Valuation bits;
};

/// Explicit Mealy transducer reachable from the initial states. Each
/// transition corresponds to one environment move and the system's reply.
struct Transducer {
  std::vector<TransducerState> states;
  std::vector<int> initial;
  std::vector<std::pair<int, int>> transitions;
  bool complete = true;             // false when the state cap was reached
  std::size_t strategy_nodes = 0;   // size of the symbolic relation
};

/// Enumerates the combined strategy, visiting at most `max_states` states.
Transducer enumerate(Solver& solver, std::size_t max_states);

/// Decodes bits into variable values (arrays as name[k]).
std::map<std::string, std::int64_t> decode(const bits::BitLayout& layout, const SymbolTable& symbols,
                                           const Valuation& bits);

std::string transducer_json(const Transducer& t, const bits::BitGame& game, const SymbolTable& symbols);
std::string transducer_dot(const Transducer& t, const bits::BitGame& game, const SymbolTable& symbols);
/// Used instead of the explicit form when the cap is exceeded.
std::string symbolic_summary(Solver& solver, const Transducer& partial);

/// Proposes the next environment bits (indexed like game.env_bits).
using EnvDriver = std::function<std::vector<char>(const Valuation& state, int step)>;

struct SimulationResult {
  std::vector<TransducerState> trace;
  int sys_safety_violations = 0;
  bool driver_error = false;  // the driver broke the environment safety
  bool env_deadlock = false;  // no environment move satisfies its safety
  std::vector<int> sys_goal_hits, env_goal_hits;
  std::string message;
};

/// Closed-loop run of the combined strategy. Without a driver, environment
/// moves are drawn uniformly bit by bit among safety-compliant ones.
SimulationResult simulate(Solver& solver, std::uint64_t seed, int steps, const EnvDriver& driver = nullptr);

}  // namespace opsyn::gr1
