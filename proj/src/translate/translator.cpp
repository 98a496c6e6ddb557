#include "opsyn/translate/translator.hpp"

#include <functional>
#include <set>
#include <stdexcept>

#include "opsyn/logic/temporal.hpp"

namespace opsyn::translate {

using namespace logic;
using frontend::Flavor;
using game::Constraint;
using game::RosterEntry;
using graph::EdgeKind;

// ---------------------------------------------------------------- guards

GuardEngine::GuardEngine(const SymbolTable& symbols)
    : symbols_(symbols), layout_(symbols_), blaster_(store_, layout_, symbols_) {
  for (int b = 0; b < layout_.bit_count(); ++b) {
    unprimed_.push_back(mgr_.add_var(layout_.bit(b).name, false));
    primed_.push_back(mgr_.add_var(layout_.bit(b).name + "'", true));
  }
  builder_ = std::make_unique<bits::BddBuilder>(store_, mgr_, unprimed_, primed_);
}

bdd::Bdd GuardEngine::to_bdd(const Formula& f) { return builder_->build(blaster_.blast(f)); }

bdd::Bdd GuardEngine::care() {
  if (!care_.valid()) {
    care_ = mgr_.bdd_true();
    for (int v = 0; v < symbols_.size(); ++v) {
      care_ &= builder_->build(blaster_.domain_constraint(v, false));
      care_ &= builder_->build(blaster_.domain_constraint(v, true));
    }
  }
  return care_;
}

bdd::Bdd GuardEngine::exact_bdd(const Formula& stmt, Player dataflow) {
  bdd::Bdd f = to_bdd(stmt);
  std::vector<int> quantified;
  for (int v = 0; v < symbols_.size(); ++v) {
    if (symbols_.at(v).owner != dataflow) continue;
    f &= builder_->build(blaster_.domain_constraint(v, true));
    for (int b : layout_.bits_of_var(v)) quantified.push_back(primed_[static_cast<std::size_t>(b)]);
  }
  return mgr_.exists(quantified, f);
}

Formula GuardEngine::syntactic(const Formula& stmt, Player dataflow) const {
  auto controlled = [&](const Formula& f) {
    return contains(f, [&](const Node& n) {
      return (n.op == Op::Var || n.op == Op::Bit) && n.primed && symbols_.at(n.var).owner == dataflow;
    });
  };
  std::function<Formula(const Formula&)> go = [&](const Formula& f) -> Formula {
    if (!controlled(f)) return f;
    switch (f->op) {
      case Op::And: return land(go(f->args[0]), go(f->args[1]));
      case Op::Or: return lor(go(f->args[0]), go(f->args[1]));
      case Op::Implies:
        if (controlled(f->args[0])) return make_bool(true);
        return implies(f->args[0], go(f->args[1]));
      case Op::Ite:
        if (controlled(f->args[0])) return make_bool(true);
        return land(implies(f->args[0], go(f->args[1])), implies(lnot(f->args[0]), go(f->args[2])));
      default: return make_bool(true);
    }
  };
  return go(stmt);
}

Formula GuardEngine::from_bdd(const bdd::Bdd& root) {
  std::unordered_map<std::uint32_t, Formula> memo;
  std::function<Formula(const bdd::Bdd&)> go = [&](const bdd::Bdd& f) -> Formula {
    if (f.is_true()) return make_bool(true);
    if (f.is_false()) return make_bool(false);
    auto it = memo.find(f.node());
    if (it != memo.end()) return it->second;
    int mv = mgr_.top_var(f);
    int bit = mv / 2;
    bool primed = mv % 2 == 1;
    const bits::BitVar& bv = layout_.bit(bit);
    const VarDecl& d = symbols_.at(bv.var);
    Formula x;
    if (d.domain.is_boolean())
      x = make_var(d.name, bv.var, primed, d.is_array() ? make_int(bv.element) : nullptr);
    else
      x = make_bit(d.is_array() ? d.name + "[" + std::to_string(bv.element) + "]" : d.name, bv.var, bv.element,
                   bv.bit, primed);
    Formula hi = go(mgr_.then_branch(f));
    Formula lo = go(mgr_.else_branch(f));
    Formula r;
    if (is_false(lo))
      r = land(x, hi);
    else if (is_false(hi))
      r = land(lnot(x), lo);
    else if (is_true(hi))
      r = lor(x, lo);
    else if (is_true(lo))
      r = lor(lnot(x), hi);
    else
      r = lor(land(x, hi), land(lnot(x), lo));
    memo[f.node()] = r;
    return r;
  };
  return go(root);
}

// A guard over a single scalar integer whose values form an interval, as
// bounds on that variable. Null otherwise.
Formula GuardEngine::as_range(const bdd::Bdd& f) {
  std::vector<int> support = mgr_.support(f);
  if (support.empty()) return nullptr;
  int var = -1;
  bool primed = false;
  for (int mv : support) {
    const bits::BitVar& bv = layout_.bit(mv / 2);
    if (var >= 0 && (bv.var != var || primed != (mv % 2 == 1))) return nullptr;
    var = bv.var;
    primed = mv % 2 == 1;
  }
  const VarDecl& d = symbols_.at(var);
  if (d.is_array() || d.domain.is_boolean()) return nullptr;
  std::vector<int> bits = layout_.bits_of_var(var);
  std::vector<int> mvars;
  for (int b : bits) mvars.push_back(primed ? primed_[static_cast<std::size_t>(b)] : unprimed_[static_cast<std::size_t>(b)]);
  std::int64_t lo = 0, hi = -1;
  bool gap = false;
  for (std::int64_t v = d.domain.min; v <= d.domain.max; ++v) {
    std::vector<char> vals;
    for (std::size_t i = 0; i < bits.size(); ++i) vals.push_back(static_cast<char>((static_cast<std::uint64_t>(v) >> i) & 1));
    bool in = mgr_.restrict(f, mvars, vals).is_true();
    if (in && hi >= lo && hi != v - 1) gap = true;
    if (in) {
      if (hi < lo) lo = v;
      hi = v;
    }
  }
  if (gap || hi < lo) return nullptr;
  // the interval must also account for values outside the domain
  Formula x = make_var(d.name, var, primed);
  Formula r = land(lo > d.domain.min ? make_binary(Op::Ge, x, make_int(lo)) : make_bool(true),
                   hi < d.domain.max ? make_binary(Op::Le, x, make_int(hi)) : make_bool(true));
  bdd::Bdd c = care();
  if ((to_bdd(r) & c) != (f & c)) return nullptr;
  return r;
}

Formula GuardEngine::exact(const Formula& stmt, Player dataflow) {
  bdd::Bdd g = exact_bdd(stmt, dataflow);
  Formula syn = syntactic(stmt, dataflow);
  bdd::Bdd c = care();
  if ((to_bdd(syn) & c) == (g & c)) return syn;
  if (Formula r = as_range(g)) return r;
  return from_bdd(g);
}

// ---------------------------------------------------------------- translation

namespace {

Formula ite_f(const Formula& c, const Formula& t, const Formula& e) {
  if (is_true(c)) return t;
  if (is_false(c)) return e;
  return land(implies(c, t), implies(lnot(c), e));
}

Formula var_ref(const SymbolTable& s, int var, int element, bool primed) {
  const VarDecl& d = s.at(var);
  return make_var(d.name, var, primed, d.is_array() ? make_int(element) : nullptr);
}

// x' = x, element-wise for arrays
Formula inv(const SymbolTable& s, int var) {
  std::vector<Formula> parts;
  const VarDecl& d = s.at(var);
  for (int k = 0; k < d.element_count(); ++k) {
    if (d.domain.is_boolean())
      parts.push_back(iff(var_ref(s, var, k, true), var_ref(s, var, k, false)));
    else
      parts.push_back(eq(var_ref(s, var, k, true), var_ref(s, var, k, false)));
  }
  return conj(parts);
}

Formula value_eq(const SymbolTable& s, int var, int element, std::int64_t value, bool primed) {
  Formula x = var_ref(s, var, element, primed);
  if (s.at(var).domain.is_boolean()) return value ? x : lnot(x);
  return eq(x, make_int(value));
}

class Translator {
 public:
  Translator(const frontend::CheckedSpec& spec, const Options& opt) : spec_(spec), opt_(opt) {}

  Translation run() {
    g().symbols = spec_.symbols;
    out_.warnings = spec_.warnings;
    build_roster();
    build_graphs();
    eliminate_pasts();
    guards_ = std::make_unique<GuardEngine>(g().symbols);
    compute_guards();
    add_aux_vars();
    for (auto& info : out_.processes) process_formulas(info);
    imperative_invariance();
    scheduler();
    if (spec_.has_atomic) atomic();
    ltl_blocks();
    initial_values();
    for (Player p : {Player::Env, Player::Sys}) {
      auto& side = g().side(p);
      if (side.recurrence.empty()) side.recurrence.push_back({"padding", make_bool(true)});
    }
    g().warnings = out_.warnings;
    return std::move(out_);
  }

 private:
  game::GameSpec& g() { return out_.game; }
  const SymbolTable& sym() { return out_.game.symbols; }

  void add(Player p, std::vector<Constraint> game::PlayerSpec::*list, const std::string& tag, Formula f) {
    if (is_true(f)) return;
    (g().side(p).*list).push_back({tag, std::move(f)});
  }
  void safety(Player p, const std::string& tag, Formula f) { add(p, &game::PlayerSpec::safety, tag, std::move(f)); }
  void init(Player p, const std::string& tag, Formula f) { add(p, &game::PlayerSpec::init, tag, std::move(f)); }

  int new_var(const std::string& name, Player owner, Domain d) {
    VarDecl v;
    v.name = name;
    v.owner = owner;
    v.kind = VarKind::Declarative;
    v.domain = d;
    v.auxiliary = true;
    return g().symbols.add(v);
  }

  // ---- roster

  int add_element(RosterEntry e) {
    g().roster.push_back(std::move(e));
    return static_cast<int>(g().roster.size()) - 1;
  }

  // Returns the roster index, or -1 when nothing active remains inside.
  int add_unit(const frontend::Unit& u, int parent, Player side) {
    const auto& ast = spec_.ast;
    if (u.kind == frontend::Unit::Kind::Process) {
      const auto& p = ast.processes[static_cast<std::size_t>(u.index)];
      if (!p.active) return -1;
      RosterEntry e;
      e.kind = RosterEntry::Kind::Process;
      e.name = p.name;
      e.pid = p.pid;
      e.side = side;
      e.parent = parent;
      return add_element(e);
    }
    const auto& k = ast.products[static_cast<std::size_t>(u.index)];
    RosterEntry e;
    e.kind = k.sync ? RosterEntry::Kind::Sync : RosterEntry::Kind::Async;
    e.name = std::string(k.sync ? "sync" : "async") + "#" + std::to_string(u.index);
    e.side = side;
    e.parent = parent;
    int id = add_element(e);
    std::vector<int> members;
    for (const auto& m : k.members) {
      int c = add_unit(m, id, side);
      if (c >= 0) members.push_back(c);
    }
    if (members.empty()) {
      g().roster.resize(static_cast<std::size_t>(id));
      return -1;
    }
    for (std::size_t i = 0; i < members.size(); ++i) g().roster[static_cast<std::size_t>(members[i])].local_id = static_cast<int>(i);
    g().roster[static_cast<std::size_t>(id)].members = members;
    return id;
  }

  Player unit_side(const frontend::Unit& u) {
    const auto& ast = spec_.ast;
    if (u.kind == frontend::Unit::Kind::Process)
      return constrained_player(ast.processes[static_cast<std::size_t>(u.index)].flavor);
    const auto& k = ast.products[static_cast<std::size_t>(u.index)];
    return unit_side(k.members.front());
  }

  void build_roster() {
    for (Player p : {Player::Env, Player::Sys}) {
      RosterEntry top;
      top.kind = RosterEntry::Kind::Async;
      top.name = player_name(p);
      top.side = p;
      add_element(top);
    }
    for (const auto& u : spec_.ast.units) {
      if (u.kind == frontend::Unit::Kind::Ltl) continue;
      Player side = unit_side(u);
      int top = side == Player::Env ? 0 : 1;
      int id = add_unit(u, top, side);
      if (id < 0) continue;
      auto& t = g().roster[static_cast<std::size_t>(top)];
      g().roster[static_cast<std::size_t>(id)].local_id = static_cast<int>(t.members.size());
      t.members.push_back(id);
    }
    int nested = 0;
    for (std::size_t i = 0; i < g().roster.size(); ++i) {
      auto& e = g().roster[i];
      if (e.kind != RosterEntry::Kind::Async) continue;
      int n = static_cast<int>(e.members.size());
      std::string name = i == 0 ? "__ps_env" : i == 1 ? "__ps_sys" : "__ps_" + std::to_string(nested++);
      int v = new_var(name, Player::Env, Domain::ranged(0, n));
      auto& e2 = g().roster[i];
      e2.ps_var = v;
      e2.reserved = n;
    }
    g().ps_env_top = g().roster[0].ps_var;
    g().ps_sys_top = g().roster[1].ps_var;
    g().n_env_top = g().roster[0].reserved;
    g().n_sys_top = g().roster[1].reserved;
  }

  // ---- graphs

  void build_graphs() {
    for (std::size_t r = 0; r < g().roster.size(); ++r) {
      const auto& e = g().roster[r];
      if (e.kind != RosterEntry::Kind::Process) continue;
      const auto& p = spec_.ast.processes[static_cast<std::size_t>(e.pid)];
      ProcessInfo info;
      info.pid = p.pid;
      info.name = p.name;
      info.flavor = p.flavor;
      info.constrained = constrained_player(p.flavor);
      info.pc_owner = p.pc_owner;
      info.roster = static_cast<int>(r);
      info.graph = graph::build_graph(p);
      for (const auto& w : info.graph.warnings) out_.warnings.push_back(w);
      int n = static_cast<int>(info.graph.nodes.size());
      for (int v = 0; v < n; ++v) {
        if (!info.graph.out_edges(v).empty()) continue;
        graph::Edge loop;
        loop.from = loop.to = v;
        loop.kind = EdgeKind::Jump;
        loop.formula = make_bool(true);
        info.graph.edges.push_back(loop);
      }
      out_.processes.push_back(std::move(info));
    }
  }

  void eliminate_pasts() {
    TesterFactory env(g().symbols, Player::Env), sys(g().symbols, Player::Sys);
    for (auto& info : out_.processes) {
      TesterFactory& f = info.constrained == Player::Env ? env : sys;
      for (const auto& e : info.graph.edges) {
        if (e.kind != EdgeKind::Statement || !has_past(e.formula)) {
          info.stmt.push_back(e.formula);
          continue;
        }
        PastElimination pe = eliminate_past(e.formula, f);
        info.stmt.push_back(pe.formula);
        init(info.constrained, "past", pe.init);
        safety(info.constrained, "past", pe.trans);
      }
    }
    for (const auto& b : spec_.ast.ltl) {
      Player p = constrained_player(b.flavor);
      TesterFactory& f = p == Player::Env ? env : sys;
      PastElimination pe = eliminate_past(b.formula, f);
      init(p, "past", pe.init);
      safety(p, "past", pe.trans);
      ltl_.push_back({b.flavor, pe.formula, b.loc});
    }
  }

  // ---- guards

  void compute_guards() {
    for (auto& info : out_.processes) {
      const auto& edges = info.graph.edges;
      info.guard.assign(edges.size(), nullptr);
      for (std::size_t e = 0; e < edges.size(); ++e) {
        if (edges[e].kind == EdgeKind::Else) continue;
        if (edges[e].kind == EdgeKind::Jump) {
          info.guard[e] = make_bool(true);
          continue;
        }
        const Formula& s = info.stmt[e];
        info.guard[e] = opt_.syntactic_guards ? guards_->syntactic(s, info.constrained) : guards_->exact(s, info.constrained);
        if (guards_->exact_bdd(s, info.constrained).is_false()) {
          SourceLoc loc = edges[e].stmt ? edges[e].stmt->loc : SourceLoc{};
          out_.warnings.push_back(make_warning(loc, "unsatisfiable-guard",
                                               "statement '" + to_string(s) + "' in '" + info.name + "' can never execute"));
        }
      }
      for (std::size_t e = 0; e < edges.size(); ++e) {
        if (edges[e].kind != EdgeKind::Else) continue;
        std::vector<Formula> neg;
        for (int o : info.graph.out_edges(edges[e].from))
          if (edges[static_cast<std::size_t>(o)].kind != EdgeKind::Else)
            neg.push_back(lnot(info.guard[static_cast<std::size_t>(o)]));
        info.guard[e] = conj(neg);
        info.stmt[e] = info.guard[e];
      }
    }
  }

  // ---- auxiliary variables

  void add_aux_vars() {
    for (auto& info : out_.processes) {
      int n = static_cast<int>(info.graph.nodes.size());
      int m = info.graph.max_multiplicity();
      if (n > 1) info.pc_var = new_var("__pc_" + info.name, info.pc_owner, Domain::ranged(0, n - 1));
      if (m > 1) info.key_var = new_var("__key_" + info.name, info.pc_owner, Domain::ranged(0, m - 1));
      if (info.assume_sys() && n > 1) info.pchat_var = new_var("__pchat_" + info.name, Player::Sys, Domain::ranged(0, n - 1));
      auto& r = g().roster[static_cast<std::size_t>(info.roster)];
      r.pc_var = info.pc_var;
      r.key_var = info.key_var;
      r.pchat_var = info.pchat_var;
    }
    if (spec_.has_atomic) {
      g().ex_var = new_var("__ex", Player::Sys, Domain::ranged(0, g().n_sys_top));
      g().pm_var = new_var("__pm", Player::Sys, Domain::boolean());
    }
  }

  // ---- helpers over the roster

  Formula eqv(int var, std::int64_t value, bool primed) {
    if (var < 0) return make_bool(true);
    return eq_const(var, sym().at(var).name, value, primed);
  }

  Formula sel(int r) {
    const auto& e = g().roster[static_cast<std::size_t>(r)];
    const auto& parent = g().roster[static_cast<std::size_t>(e.parent)];
    if (parent.kind == RosterEntry::Kind::Sync) return sel(e.parent);
    return eqv(parent.ps_var, e.local_id, true);
  }

  Formula pc_is(const ProcessInfo& r, int i, bool primed = false) { return eqv(r.pc_var, i, primed); }

  // p~c = j and key~ = k
  Formula tilde(const ProcessInfo& r, const graph::Edge& e) {
    if (r.assume_sys()) return land(eqv(r.pchat_var, e.to, false), eqv(r.key_var, e.key, false));
    return land(eqv(r.pc_var, e.to, true), eqv(r.key_var, e.key, true));
  }

  bool top_sys_process(const ProcessInfo& r) {
    return g().roster[static_cast<std::size_t>(r.roster)].parent == 1;
  }

  Formula exclusive(const ProcessInfo& r, const graph::Edge& e) {
    if (!spec_.has_atomic || !top_sys_process(r)) return make_bool(true);
    Formula pm = make_var("__pm", g().pm_var, true);
    if (r.graph.nodes[static_cast<std::size_t>(e.to)].atomic) {
      int m = g().roster[static_cast<std::size_t>(r.roster)].local_id;
      return land(eqv(g().ex_var, m, true), pm);
    }
    return lnot(pm);
  }

  Formula blocked(const ProcessInfo& r) {
    std::vector<Formula> parts;
    for (int i = 0; i < static_cast<int>(r.graph.nodes.size()); ++i) {
      std::vector<Formula> neg;
      for (int e : r.graph.out_edges(i)) neg.push_back(lnot(r.guard[static_cast<std::size_t>(e)]));
      parts.push_back(land(pc_is(r, i), conj(neg)));
    }
    return disj(parts);
  }

  Formula element_blocked(int id) {
    const auto& e = g().roster[static_cast<std::size_t>(id)];
    if (e.kind == RosterEntry::Kind::Process) return blocked(info_of(id));
    std::vector<Formula> parts;
    for (int m : e.members) parts.push_back(element_blocked(m));
    return e.kind == RosterEntry::Kind::Sync ? disj(parts) : conj(parts);
  }

  const ProcessInfo& info_of(int roster) {
    for (const auto& p : out_.processes)
      if (p.roster == roster) return p;
    throw std::logic_error("roster entry without process");
  }

  // ---- per-process formulas

  void process_formulas(const ProcessInfo& r) {
    const auto& gr = r.graph;
    Player p = r.constrained, q = r.pc_owner;
    int n = static_cast<int>(gr.nodes.size());
    Formula s = sel(r.roster);

    std::vector<Formula> trans, guards;
    for (int i = 0; i < n; ++i) {
      std::vector<Formula> moves, follow;
      for (int ei : gr.out_edges(i)) {
        const auto& e = gr.edges[static_cast<std::size_t>(ei)];
        const Formula& phi = r.stmt[static_cast<std::size_t>(ei)];
        const Formula& guard = r.guard[static_cast<std::size_t>(ei)];
        moves.push_back(conj({phi, tilde(r, e), exclusive(r, e)}));
        follow.push_back(conj({guard, eqv(r.pc_var, e.to, true), eqv(r.key_var, e.key, true)}));
      }
      trans.push_back(implies(pc_is(r, i), disj(moves)));
      guards.push_back(implies(pc_is(r, i), disj(follow)));
    }
    safety(p, "dataflow(" + r.name + ")", implies(s, conj(trans)));

    Formula stay = eqv(r.pc_var, 0, true);
    if (r.pc_var >= 0) stay = eq(make_var(sym().at(r.pc_var).name, r.pc_var, true), make_var(sym().at(r.pc_var).name, r.pc_var));
    if (!r.assume_sys() && r.key_var >= 0)
      stay = land(stay, eq(make_var(sym().at(r.key_var).name, r.key_var, true), make_var(sym().at(r.key_var).name, r.key_var)));
    Formula pc_trans;
    if (r.assume_sys()) {
      pc_trans = r.pc_var >= 0 ? eq(make_var(sym().at(r.pc_var).name, r.pc_var, true),
                                    make_var(sym().at(r.pchat_var).name, r.pchat_var))
                               : make_bool(true);
    } else {
      pc_trans = conj(guards);
    }
    safety(q, "control_flow(" + r.name + ")", ite_f(s, pc_trans, stay));

    if (r.assume_sys()) hat_constraints(r);

    // free locals stutter while the process is not scheduled
    for (int v = 0; v < sym().size(); ++v) {
      const VarDecl& d = sym().at(v);
      if (d.auxiliary || !d.is_free() || d.scope_process != r.pid) continue;
      safety(d.owner, "local_free(" + r.name + ")", implies(lnot(s), inv(sym(), v)));
    }

    std::vector<Formula> progress;
    for (int i = 0; i < n; ++i)
      if (gr.nodes[static_cast<std::size_t>(i)].progress) progress.push_back(pc_is(r, i));
    if (!progress.empty()) g().side(p).recurrence.push_back({"progress(" + r.name + ")", disj(progress)});

    init(q, "pc_init(" + r.name + ")", pc_is(r, gr.root));
  }

  // The system picks the next edge of an assume sys process one step ahead.
  void hat_constraints(const ProcessInfo& r) {
    const auto& gr = r.graph;
    auto choose = [&](int i, bool primed) {
      std::vector<Formula> picks, neg;
      for (int ei : gr.out_edges(i)) {
        const auto& e = gr.edges[static_cast<std::size_t>(ei)];
        Formula guard = r.guard[static_cast<std::size_t>(ei)];
        if (primed) {
          guard = prime_all(guard);
          if (!guard) throw std::logic_error("primed guard in assumption");
        }
        picks.push_back(conj({guard, eqv(r.pchat_var, e.to, primed), eqv(r.key_var, e.key, primed)}));
        neg.push_back(lnot(guard));
      }
      return lor(disj(picks), conj(neg));
    };
    std::vector<Formula> parts;
    for (int i = 0; i < static_cast<int>(gr.nodes.size()); ++i) parts.push_back(implies(pc_is(r, i, true), choose(i, true)));
    safety(Player::Sys, "pc_hat(" + r.name + ")", conj(parts));
    init(Player::Sys, "pc_hat(" + r.name + ")", choose(gr.root, false));
  }

  // edge(r, i, j, k)
  Formula edge_taken(const ProcessInfo& r, const graph::Edge& e) {
    return conj({sel(r.roster), pc_is(r, e.from), tilde(r, e)});
  }

  void imperative_invariance() {
    // per variable and element, the edges allowed to change it
    std::map<int, std::vector<std::vector<Formula>>> changers;
    for (const auto& r : out_.processes) {
      for (std::size_t ei = 0; ei < r.graph.edges.size(); ++ei) {
        const auto& e = r.graph.edges[ei];
        if (e.kind != EdgeKind::Statement) continue;
        Formula taken;
        visit(r.stmt[ei], [&](const Node& n) {
          if (n.op != Op::Var || !n.primed || n.var < 0) return;
          const VarDecl& d = sym().at(n.var);
          if (d.is_free() || d.auxiliary || d.owner != r.constrained) return;
          auto& slots = changers[n.var];
          slots.resize(static_cast<std::size_t>(d.element_count()));
          if (!taken) taken = edge_taken(r, e);
          if (!d.is_array()) {
            slots[0].push_back(taken);
          } else if (n.args[0]->op == Op::IntConst) {
            std::int64_t k = n.args[0]->value;
            if (k >= 0 && k < d.array_length) slots[static_cast<std::size_t>(k)].push_back(taken);
          } else {
            for (int k = 0; k < d.array_length; ++k)
              slots[static_cast<std::size_t>(k)].push_back(land(taken, eq(n.args[0], make_int(k))));
          }
        });
      }
    }
    for (int v = 0; v < sym().size(); ++v) {
      const VarDecl& d = sym().at(v);
      if (d.is_free() || d.auxiliary) continue;
      std::vector<Formula> parts;
      auto it = changers.find(v);
      for (int k = 0; k < d.element_count(); ++k) {
        Formula stays = d.domain.is_boolean() ? iff(var_ref(sym(), v, k, true), var_ref(sym(), v, k, false))
                                              : eq(var_ref(sym(), v, k, true), var_ref(sym(), v, k, false));
        std::vector<Formula> alts{stays};
        if (it != changers.end())
          for (const auto& f : it->second[static_cast<std::size_t>(k)]) alts.push_back(f);
        parts.push_back(disj(alts));
      }
      safety(d.owner, "inv(" + d.name + ")", conj(parts));
    }
  }

  // ---- scheduler

  Formula preempt() {
    if (!spec_.has_atomic) return make_bool(false);
    const auto& ps = sym().at(g().ps_sys_top);
    const auto& ex = sym().at(g().ex_var);
    Formula exv = make_var(ex.name, g().ex_var);
    return conj({make_var("__pm", g().pm_var), eq(make_var(ps.name, g().ps_sys_top, true), exv),
                 make_binary(Op::Lt, exv, make_int(g().n_sys_top))});
  }

  void scheduler() {
    for (std::size_t id = 2; id < g().roster.size(); ++id) {
      const auto& e = g().roster[id];
      safety(Player::Env, "selectable(" + e.name + ")", implies(element_blocked(static_cast<int>(id)), lnot(sel(static_cast<int>(id)))));
      if (e.kind == RosterEntry::Kind::Async)
        safety(Player::Env, "product_selected(" + e.name + ")",
               iff(lnot(sel(static_cast<int>(id))), eqv(e.ps_var, e.reserved, true)));
    }
    if (g().n_env_top > 0) {
      Formula paused = eqv(g().ps_env_top, g().n_env_top, true);
      safety(Player::Env, "pause_env", spec_.has_atomic ? iff(paused, preempt()) : lnot(paused));
    }
    if (g().n_sys_top > 0) {
      Formula none = eqv(g().ps_sys_top, g().n_sys_top, true);
      safety(Player::Env, "schedule_sys", iff(none, element_blocked(1)));
      safety(Player::Sys, "schedule_sys", lnot(none));
    }
  }

  // ---- exclusive execution

  void atomic() {
    Formula pm = make_var("__pm", g().pm_var);
    Formula pm_next = make_var("__pm", g().pm_var, true);
    init(Player::Sys, "atomic", lnot(pm));
    safety(Player::Sys, "atomic", implies(eqv(g().ps_sys_top, g().n_sys_top, true), lnot(pm_next)));
    for (int m : g().roster[1].members) {
      const auto& e = g().roster[static_cast<std::size_t>(m)];
      if (e.kind != RosterEntry::Kind::Process) safety(Player::Sys, "atomic", implies(sel(m), lnot(pm_next)));
    }
    for (const auto& r : out_.processes) {
      if (!top_sys_process(r)) continue;
      bool any = false;
      for (const auto& nd : r.graph.nodes) any = any || nd.atomic;
      if (!any) continue;
      std::vector<Formula> frozen;
      for (int i = 0; i < static_cast<int>(r.graph.nodes.size()); ++i) {
        std::vector<Formula> tests;
        for (int ei : r.graph.out_edges(i)) {
          Formula guard = r.guard[static_cast<std::size_t>(ei)];
          if (r.graph.nodes[static_cast<std::size_t>(i)].atomic)
            guard = unprime_if(guard, [&](int v) { return sym().at(v).owner == Player::Env; });
          tests.push_back(guard);
        }
        frozen.push_back(land(pc_is(r, i), disj(tests)));
      }
      int mid = g().roster[static_cast<std::size_t>(r.roster)].local_id;
      safety(Player::Env, "grant(" + r.name + ")",
             implies(conj({pm, eqv(g().ex_var, mid, false), disj(frozen)}), sel(r.roster)));
    }
    std::vector<Formula> frozen_vars;
    for (int v = 0; v < sym().size(); ++v) {
      const VarDecl& d = sym().at(v);
      if (d.auxiliary || !d.is_free() || d.owner != Player::Env) continue;
      if (d.scope_process) {
        const auto& p = spec_.ast.processes[static_cast<std::size_t>(*d.scope_process)];
        if (constrained_player(p.flavor) != Player::Sys) continue;
      }
      frozen_vars.push_back(inv(sym(), v));
    }
    safety(Player::Env, "freeze_env_free", implies(preempt(), conj(frozen_vars)));
  }

  // ---- ltl blocks

  void ltl_blocks() {
    for (const auto& b : ltl_) {
      Player p = constrained_player(b.flavor);
      Gr1Split split;
      try {
        split = split_gr1(b.formula);
      } catch (const NotInGr1& e) {
        throw CompileError({make_error(b.loc, "not-gr1", e.what())});
      }
      init(p, "ltl", split.init);
      bool masked = spec_.has_atomic && (p == Player::Env || !opt_.atomic_visible_ltl);
      for (const auto& s : split.safety) safety(p, "ltl", masked ? lor(preempt(), s) : s);
      for (const auto& r : split.recurrence) g().side(p).recurrence.push_back({"ltl", r});
    }
  }

  void initial_values() {
    for (int v = 0; v < sym().size(); ++v) {
      const VarDecl& d = sym().at(v);
      if (d.auxiliary) continue;
      if (d.is_free() && !d.initial) continue;
      std::int64_t value = d.initial ? *d.initial : d.domain.min;
      std::vector<Formula> parts;
      for (int k = 0; k < d.element_count(); ++k) parts.push_back(value_eq(sym(), v, k, value, false));
      init(d.owner, "init(" + d.name + ")", conj(parts));
    }
  }

  const frontend::CheckedSpec& spec_;
  Options opt_;
  Translation out_;
  std::unique_ptr<GuardEngine> guards_;
  std::vector<frontend::LtlBlock> ltl_;
};

}  // namespace

Translation translate(const frontend::CheckedSpec& spec, const Options& options) {
  return Translator(spec, options).run();
}

Translation compile_source(const std::string& source, const Options& options,
                           const std::map<std::string, std::string>& defines) {
  frontend::CheckedSpec spec = frontend::check_semantics(frontend::parse(source, defines));
  return translate(spec, options);
}

}  // namespace opsyn::translate
