#include "opsyn/gr1/transducer.hpp"

#include <deque>
#include <random>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace opsyn::gr1 {

using bdd::Bdd;

namespace {

struct Context {
  Solver& s;
  bdd::Manager& mgr;
  std::vector<int> state_vars;  // x, y, mem
  explicit Context(Solver& solver) : s(solver), mgr(solver.manager()) {
    int n = s.game().layout.bit_count();
    for (int b = 0; b < n; ++b) state_vars.push_back(s.cur(b));
    for (int v : s.mem_vars()) state_vars.push_back(v);
  }

  std::vector<char> state_values(const TransducerState& st) const {
    std::vector<char> vals(st.bits.begin(), st.bits.end());
    for (int i = 0; i < s.mem_width(); ++i) vals.push_back(static_cast<char>((st.goal >> i) & 1));
    return vals;
  }

  std::vector<int> program_vars() const {
    return std::vector<int>(state_vars.begin(), state_vars.begin() + s.game().layout.bit_count());
  }

  // environment moves allowed from st, as a function of x'
  Bdd env_moves(const TransducerState& st) {
    return mgr.restrict(s.env_trans(), program_vars(), st.bits);
  }

  // system reply: successor state, or nullopt when the strategy has none
  std::optional<TransducerState> reply(const TransducerState& st, const std::vector<char>& xnext) {
    std::vector<int> vars = state_vars;
    std::vector<char> vals = state_values(st);
    for (std::size_t i = 0; i < s.x_next().size(); ++i) {
      vars.push_back(s.x_next()[i]);
      vals.push_back(xnext[i]);
    }
    Bdd f = mgr.restrict(s.strategy(), vars, vals);
    if (f.is_false()) return std::nullopt;
    std::vector<int> out = s.y_next();
    for (int v : s.mem_next_vars()) out.push_back(v);
    std::vector<char> pick = mgr.pick_min(f, out);
    TransducerState next;
    next.bits.assign(static_cast<std::size_t>(s.game().layout.bit_count()), 0);
    const auto& g = s.game();
    for (std::size_t i = 0; i < g.env_bits.size(); ++i) next.bits[static_cast<std::size_t>(g.env_bits[i])] = xnext[i];
    for (std::size_t i = 0; i < g.sys_bits.size(); ++i) next.bits[static_cast<std::size_t>(g.sys_bits[i])] = pick[i];
    for (int i = 0; i < s.mem_width(); ++i)
      if (pick[g.sys_bits.size() + static_cast<std::size_t>(i)]) next.goal |= 1 << i;
    return next;
  }

  std::vector<TransducerState> initial_states(std::size_t cap) {
    std::vector<TransducerState> out;
    Bdd env_ok = mgr.exists(s.y(), s.env_init());
    Bdd target = s.env_init() & s.sys_init() & s.winning();
    const auto& g = s.game();
    mgr.for_each_sat(env_ok, s.x(), [&](const std::vector<char>& xv) {
      Bdd f = mgr.restrict(target, s.x(), xv);
      if (f.is_false()) return true;
      std::vector<char> yv = mgr.pick_min(mgr.exists(mem_and_primes(), f), s.y());
      TransducerState st;
      st.bits.assign(static_cast<std::size_t>(g.layout.bit_count()), 0);
      for (std::size_t i = 0; i < g.env_bits.size(); ++i) st.bits[static_cast<std::size_t>(g.env_bits[i])] = xv[i];
      for (std::size_t i = 0; i < g.sys_bits.size(); ++i) st.bits[static_cast<std::size_t>(g.sys_bits[i])] = yv[i];
      out.push_back(st);
      return out.size() < cap;
    });
    return out;
  }

  std::vector<int> mem_and_primes() const {
    std::vector<int> v = s.mem_vars();
    for (int b = 0; b < s.game().layout.bit_count(); ++b) v.push_back(s.next(b));
    return v;
  }
};

std::string key_of(const TransducerState& st) {
  std::string k(st.bits.begin(), st.bits.end());
  k += std::to_string(st.goal);
  return k;
}

std::string label(const bits::BitLayout& layout, const SymbolTable& symbols, const Valuation& v, bool hide_aux) {
  std::ostringstream out;
  bool first = true;
  for (const auto& [name, value] : decode(layout, symbols, v)) {
    if (hide_aux && name.rfind("__", 0) == 0) continue;
    if (!first) out << ' ';
    first = false;
    out << name << '=' << value;
  }
  return out.str();
}

}  // namespace

std::map<std::string, std::int64_t> decode(const bits::BitLayout& layout, const SymbolTable& symbols,
                                           const Valuation& bits) {
  std::map<std::string, std::int64_t> out;
  for (int v = 0; v < symbols.size(); ++v) {
    const VarDecl& d = symbols.at(v);
    int w = layout.width(v);
    for (int k = 0; k < d.element_count(); ++k) {
      int base = layout.base(v, k);
      std::uint64_t raw = 0;
      for (int i = 0; i < w; ++i)
        if (bits[static_cast<std::size_t>(base + i)]) raw |= std::uint64_t{1} << i;
      std::int64_t value = static_cast<std::int64_t>(raw);
      bool is_signed = d.domain.is_signed || (d.domain.kind == Domain::Kind::Ranged && d.domain.min < 0);
      if (is_signed && w < 64 && (raw >> (w - 1)) & 1) value -= std::int64_t{1} << w;
      out[d.is_array() ? d.name + "[" + std::to_string(k) + "]" : d.name] = value;
    }
  }
  return out;
}

Transducer enumerate(Solver& solver, std::size_t max_states) {
  if (!solver.strategy().valid()) solver.combine();
  Context ctx(solver);
  Transducer t;
  t.strategy_nodes = ctx.mgr.node_count(solver.strategy());
  std::map<std::string, int> ids;
  std::deque<int> queue;
  auto intern = [&](const TransducerState& st) -> int {
    std::string k = key_of(st);
    auto it = ids.find(k);
    if (it != ids.end()) return it->second;
    if (t.states.size() >= max_states) {
      t.complete = false;
      return -1;
    }
    int id = static_cast<int>(t.states.size());
    ids.emplace(k, id);
    t.states.push_back(st);
    queue.push_back(id);
    return id;
  };
  for (const auto& st : ctx.initial_states(max_states)) {
    int id = intern(st);
    if (id >= 0) t.initial.push_back(id);
  }
  while (!queue.empty()) {
    int id = queue.front();
    queue.pop_front();
    TransducerState cur = t.states[static_cast<std::size_t>(id)];
    Bdd moves = ctx.env_moves(cur);
    ctx.mgr.for_each_sat(moves, solver.x_next(), [&](const std::vector<char>& xn) {
      auto next = ctx.reply(cur, xn);
      if (!next) throw std::logic_error("strategy has no reply to a legal environment move");
      int to = intern(*next);
      if (to < 0) return false;
      t.transitions.emplace_back(id, to);
      return true;
    });
    if (!t.complete) break;
  }
  return t;
}

std::string transducer_json(const Transducer& t, const bits::BitGame& game, const SymbolTable& symbols) {
  nlohmann::json states = nlohmann::json::array();
  for (std::size_t i = 0; i < t.states.size(); ++i) {
    nlohmann::json vals = nlohmann::json::object();
    for (const auto& [name, value] : decode(game.layout, symbols, t.states[i].bits)) vals[name] = value;
    states.push_back({{"id", i}, {"goal", t.states[i].goal}, {"values", vals}});
  }
  nlohmann::json trans = nlohmann::json::array();
  for (const auto& [a, b] : t.transitions) trans.push_back({a, b});
  nlohmann::json out = {{"complete", t.complete},
                        {"initial", t.initial},
                        {"states", states},
                        {"transitions", trans},
                        {"strategy_nodes", t.strategy_nodes}};
  return out.dump(2) + "\n";
}

std::string transducer_dot(const Transducer& t, const bits::BitGame& game, const SymbolTable& symbols) {
  std::ostringstream out;
  out << "digraph transducer {\n";
  for (std::size_t i = 0; i < t.states.size(); ++i) {
    out << "  s" << i << " [label=\"" << i << " (goal " << t.states[i].goal << ")\\n"
        << label(game.layout, symbols, t.states[i].bits, true) << "\"";
    for (int init : t.initial)
      if (static_cast<std::size_t>(init) == i) out << ", shape=box";
    out << "];\n";
  }
  for (const auto& [a, b] : t.transitions) out << "  s" << a << " -> s" << b << ";\n";
  out << "}\n";
  return out.str();
}

std::string symbolic_summary(Solver& solver, const Transducer& partial) {
  nlohmann::json out = {{"complete", false},
                        {"explored_states", partial.states.size()},
                        {"strategy_nodes", solver.manager().node_count(solver.strategy())},
                        {"memory_bits", solver.mem_width()},
                        {"goals", solver.goal_count()}};
  return out.dump(2) + "\n";
}

SimulationResult simulate(Solver& solver, std::uint64_t seed, int steps, const EnvDriver& driver) {
  if (!solver.strategy().valid()) solver.combine();
  Context ctx(solver);
  SimulationResult r;
  r.sys_goal_hits.assign(solver.sys_goals().size(), 0);
  r.env_goal_hits.assign(solver.env_goals().size(), 0);
  std::mt19937_64 rng(seed);
  auto inits = ctx.initial_states(1 << 16);
  if (inits.empty()) {
    r.message = "no initial state";
    return r;
  }
  TransducerState cur = inits[std::uniform_int_distribution<std::size_t>(0, inits.size() - 1)(rng)];
  auto tally = [&](const TransducerState& st) {
    auto vals = ctx.program_vars();
    for (std::size_t j = 0; j < solver.sys_goals().size(); ++j)
      if (ctx.mgr.restrict(solver.sys_goals()[j], vals, st.bits).is_true()) ++r.sys_goal_hits[j];
    for (std::size_t i = 0; i < solver.env_goals().size(); ++i)
      if (ctx.mgr.restrict(solver.env_goals()[i], vals, st.bits).is_true()) ++r.env_goal_hits[i];
  };
  r.trace.push_back(cur);
  tally(cur);
  for (int step = 0; step < steps; ++step) {
    Bdd moves = ctx.env_moves(cur);
    if (moves.is_false()) {
      r.env_deadlock = true;
      r.message = "environment has no legal move";
      break;
    }
    std::vector<char> xn;
    if (driver) {
      xn = driver(cur.bits, step);
      if (ctx.mgr.restrict(moves, solver.x_next(), xn).is_false()) {
        r.driver_error = true;
        r.message = "driver move violates the environment safety";
        break;
      }
    } else {
      Bdd f = moves;
      for (int v : solver.x_next()) {
        Bdd hi = ctx.mgr.cofactor(f, v, true), lo = ctx.mgr.cofactor(f, v, false);
        bool bit;
        if (hi.is_false())
          bit = false;
        else if (lo.is_false())
          bit = true;
        else
          bit = (rng() & 1) != 0;
        xn.push_back(static_cast<char>(bit));
        f = bit ? hi : lo;
      }
    }
    auto next = ctx.reply(cur, xn);
    if (!next) {
      ++r.sys_safety_violations;
      r.message = "strategy has no reply";
      break;
    }
    // the reply must satisfy the system safety
    std::vector<int> vars = ctx.program_vars();
    std::vector<char> vals = cur.bits;
    for (int b = 0; b < solver.game().layout.bit_count(); ++b) {
      vars.push_back(solver.next(b));
      vals.push_back(next->bits[static_cast<std::size_t>(b)]);
    }
    if (ctx.mgr.restrict(solver.sys_trans(), vars, vals).is_false()) ++r.sys_safety_violations;
    cur = *next;
    r.trace.push_back(cur);
    tally(cur);
  }
  return r;
}

}  // namespace opsyn::gr1
