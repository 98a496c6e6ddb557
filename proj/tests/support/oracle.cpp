#include "oracle.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "opsyn/bdd/bdd.hpp"
#include "opsyn/logic/temporal.hpp"

namespace oracle {

using namespace opsyn;
using logic::Op;

std::int64_t from_bits(std::uint64_t raw, int width, bool is_signed) {
  if (width < 64) raw &= (std::uint64_t{1} << width) - 1;
  auto v = static_cast<std::int64_t>(raw);
  if (is_signed && width < 64 && ((raw >> (width - 1)) & 1)) v -= std::int64_t{1} << width;
  return v;
}

namespace {

std::int64_t wrap_to(const Domain& d, std::int64_t v) {
  return from_bits(static_cast<std::uint64_t>(v), d.width, d.is_signed);
}

int element_of(const logic::Node& n, const SymbolTable& symbols, const Lookup& v, bool primed) {
  const VarDecl& d = symbols.at(n.var);
  if (!d.is_array()) return 0;
  std::int64_t k = n.args.empty() ? n.element : eval_int(n.args[0], symbols, v, primed);
  // reads past the end see the last element
  if (k < 0 || k >= d.array_length) k = d.array_length - 1;
  return static_cast<int>(k);
}

}  // namespace

std::int64_t eval_int(const Formula& f, const SymbolTable& symbols, const Lookup& v, bool primed) {
  const auto& a = f->args;
  auto I = [&](int i) { return eval_int(a[static_cast<std::size_t>(i)], symbols, v, primed); };
  switch (f->op) {
    case Op::BoolConst:
    case Op::IntConst: return f->value;
    case Op::Var: return v(f->var, element_of(*f, symbols, v, primed), primed || f->primed);
    case Op::Bit: {
      std::int64_t x = v(f->var, f->element, primed || f->primed);
      return (static_cast<std::uint64_t>(x) >> f->value) & 1;
    }
    case Op::Prime: return eval_int(a[0], symbols, v, true);
    case Op::Not: return !I(0);
    case Op::Neg: return -I(0);
    case Op::And: return I(0) && I(1);
    case Op::Or: return I(0) || I(1);
    case Op::Implies: return !I(0) || I(1);
    case Op::Iff: return (I(0) != 0) == (I(1) != 0);
    case Op::Ite: return I(0) ? I(1) : I(2);
    case Op::Add: return I(0) + I(1);
    case Op::Sub: return I(0) - I(1);
    case Op::Eq: return I(0) == I(1);
    case Op::Ne: return I(0) != I(1);
    case Op::Lt: return I(0) < I(1);
    case Op::Le: return I(0) <= I(1);
    case Op::Gt: return I(0) > I(1);
    case Op::Ge: return I(0) >= I(1);
    case Op::Assign: {
      const auto& t = *a[0];
      const VarDecl& d = symbols.at(t.var);
      std::int64_t value = I(1);
      if (d.domain.is_boolean())
        value = value != 0;
      else if (d.domain.wraps())
        value = wrap_to(d.domain, value);
      return v(t.var, element_of(t, symbols, v, primed), true) == value;
    }
    default: throw std::invalid_argument("eval_int: temporal operator");
  }
}

bool eval_bool(const Formula& f, const SymbolTable& symbols, const Lookup& v) { return eval_int(f, symbols, v) != 0; }

// ---- past LTL

Lanes all_words(int nprops, int len, int p) {
  std::size_t words = std::size_t{1} << (nprops * len);
  std::size_t blocks = std::max<std::size_t>(1, words / 64);
  Lanes out(static_cast<std::size_t>(len), std::vector<std::uint64_t>(blocks, 0));
  for (std::size_t w = 0; w < words; ++w)
    for (int pos = 0; pos < len; ++pos)
      if ((w >> (pos * nprops + p)) & 1) out[static_cast<std::size_t>(pos)][w / 64] |= std::uint64_t{1} << (w % 64);
  return out;
}

namespace {

using Vec = std::vector<std::uint64_t>;

Vec vnot(const Vec& a) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = ~a[i];
  return r;
}
Vec vand(const Vec& a, const Vec& b) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] & b[i];
  return r;
}
Vec vor(const Vec& a, const Vec& b) {
  Vec r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] | b[i];
  return r;
}
Vec vconst(std::size_t n, bool b) { return Vec(n, b ? ~std::uint64_t{0} : 0); }

// position-wise combination of two lane sets
template <class F>
Lanes zip(const Lanes& a, const Lanes& b, F fn) {
  Lanes r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = fn(a[i], b[i]);
  return r;
}

}  // namespace

Lanes eval_past(const Formula& f, const std::vector<int>& ids, const std::vector<Lanes>& props) {
  std::size_t len = props.at(0).size(), blocks = props[0][0].size();
  const auto& a = f->args;
  auto sub = [&](int i) { return eval_past(a[static_cast<std::size_t>(i)], ids, props); };
  switch (f->op) {
    case Op::BoolConst: return Lanes(len, vconst(blocks, f->value != 0));
    case Op::Var: {
      auto it = std::find(ids.begin(), ids.end(), f->var);
      if (it == ids.end()) throw std::invalid_argument("eval_past: unknown proposition");
      return props[static_cast<std::size_t>(it - ids.begin())];
    }
    case Op::Not: {
      Lanes x = sub(0);
      for (auto& v : x) v = vnot(v);
      return x;
    }
    case Op::And: return zip(sub(0), sub(1), vand);
    case Op::Or: return zip(sub(0), sub(1), vor);
    case Op::Implies: return zip(sub(0), sub(1), [](const Vec& p, const Vec& q) { return vor(vnot(p), q); });
    case Op::Iff:
      return zip(sub(0), sub(1), [](const Vec& p, const Vec& q) { return vor(vand(p, q), vand(vnot(p), vnot(q))); });
    // i > 0 and phi at i-1
    case Op::Prev:
    case Op::WeakPrev: {
      Lanes x = sub(0), r(len);
      r[0] = vconst(blocks, f->op == Op::WeakPrev);
      for (std::size_t i = 1; i < len; ++i) r[i] = x[i - 1];
      return r;
    }
    // exists k <= i: psi at k and phi at every j in (k, i]
    case Op::Since:
    case Op::Once:
    case Op::Historically: {
      Lanes p, q;
      if (f->op == Op::Since) {
        p = sub(0);
        q = sub(1);
      } else {
        p = Lanes(len, vconst(blocks, true));
        q = sub(0);
        if (f->op == Op::Historically)
          for (auto& v : q) v = vnot(v);
      }
      Lanes r(len);
      for (std::size_t i = 0; i < len; ++i) {
        Vec acc = vconst(blocks, false);
        for (std::size_t k = 0; k <= i; ++k) {
          Vec term = q[k];
          for (std::size_t j = k + 1; j <= i; ++j) term = vand(term, p[j]);
          acc = vor(acc, term);
        }
        r[i] = f->op == Op::Historically ? vnot(acc) : acc;
      }
      return r;
    }
    default: throw std::invalid_argument("eval_past: unsupported operator " + logic::to_string(f));
  }
}

namespace {

// evaluates a propositional formula at one position given lanes per variable id
Vec eval_state(const Formula& f, const std::map<int, Vec>& cur, const std::map<int, Vec>& next, std::size_t blocks) {
  const auto& a = f->args;
  auto sub = [&](int i) { return eval_state(a[static_cast<std::size_t>(i)], cur, next, blocks); };
  switch (f->op) {
    case Op::BoolConst: return vconst(blocks, f->value != 0);
    case Op::Var: return (f->primed ? next : cur).at(f->var);
    case Op::Not: return vnot(sub(0));
    case Op::And: return vand(sub(0), sub(1));
    case Op::Or: return vor(sub(0), sub(1));
    case Op::Implies: return vor(vnot(sub(0)), sub(1));
    case Op::Iff: {
      Vec p = sub(0), q = sub(1);
      return vor(vand(p, q), vand(vnot(p), vnot(q)));
    }
    default: throw std::invalid_argument("eval_state: unsupported operator " + logic::to_string(f));
  }
}

void flatten_and(const Formula& f, std::vector<Formula>& out) {
  if (f->op == Op::And) {
    flatten_and(f->args[0], out);
    flatten_and(f->args[1], out);
  } else if (!logic::is_true(f)) {
    out.push_back(f);
  }
}

}  // namespace

Lanes eval_testers(const Formula& f, SymbolTable symbols, const std::vector<int>& ids, const std::vector<Lanes>& props) {
  std::size_t len = props.at(0).size(), blocks = props[0][0].size();
  logic::TesterFactory factory(symbols, Player::Sys);
  auto pe = logic::eliminate_past(f, factory);

  // t' <-> e, in creation order (inner testers first)
  std::vector<std::pair<int, Formula>> updates;
  std::vector<Formula> parts;
  flatten_and(pe.trans, parts);
  for (const auto& p : parts) {
    if (p->op != Op::Iff || p->args[0]->op != Op::Var || !p->args[0]->primed)
      throw std::invalid_argument("unexpected tester transition " + logic::to_string(p));
    updates.emplace_back(p->args[0]->var, p->args[1]);
  }
  std::map<int, Vec> state;
  parts.clear();
  flatten_and(pe.init, parts);
  for (const auto& p : parts) {
    if (p->op == Op::Var)
      state[p->var] = vconst(blocks, true);
    else if (p->op == Op::Not && p->args[0]->op == Op::Var)
      state[p->args[0]->var] = vconst(blocks, false);
    else
      throw std::invalid_argument("unexpected tester init " + logic::to_string(p));
  }
  Lanes out(len);
  for (std::size_t i = 0; i < len; ++i) {
    for (std::size_t k = 0; k < ids.size(); ++k) state[ids[k]] = props[k][i];
    out[i] = eval_state(pe.formula, state, {}, blocks);
    std::map<int, Vec> next;
    for (const auto& [t, e] : updates) next[t] = eval_state(e, state, {}, blocks);
    for (auto& [t, v] : next) state[t] = v;
  }
  return out;
}

// ---- explicit GR(1)

bool explicit_realizable(const bits::BitGame& g) {
  int n = g.layout.bit_count();
  if (n > 12) throw std::invalid_argument("explicit_realizable: too many bits");
  std::size_t states = std::size_t{1} << n;
  auto bits_of = [&](std::size_t s) {
    std::vector<char> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = static_cast<char>((s >> i) & 1);
    return v;
  };
  auto join = [&](std::size_t xs, std::size_t ys) {
    std::size_t s = 0;
    for (std::size_t i = 0; i < g.env_bits.size(); ++i)
      if ((xs >> i) & 1) s |= std::size_t{1} << g.env_bits[i];
    for (std::size_t i = 0; i < g.sys_bits.size(); ++i)
      if ((ys >> i) & 1) s |= std::size_t{1} << g.sys_bits[i];
    return s;
  };
  std::size_t nx = std::size_t{1} << g.env_bits.size(), ny = std::size_t{1} << g.sys_bits.size();

  // per state: for each legal env move, the successors the system may pick
  std::vector<std::vector<std::vector<std::size_t>>> moves(states);
  for (std::size_t s = 0; s < states; ++s) {
    auto cur = bits_of(s);
    for (std::size_t xs = 0; xs < nx; ++xs) {
      bool env_ok = false;
      for (std::size_t ys = 0; ys < ny && !env_ok; ++ys) env_ok = holds(g, g.env_safety, cur, bits_of(join(xs, ys)));
      if (!env_ok) continue;
      std::vector<std::size_t> succ;
      for (std::size_t ys = 0; ys < ny; ++ys) {
        std::size_t t = join(xs, ys);
        if (holds(g, g.sys_safety, cur, bits_of(t))) succ.push_back(t);
      }
      moves[s].push_back(std::move(succ));
    }
  }
  using Set = std::vector<char>;
  auto cpre = [&](const Set& target) {
    Set r(states, 0);
    for (std::size_t s = 0; s < states; ++s) {
      bool ok = true;
      for (const auto& succ : moves[s]) {
        bool any = false;
        for (std::size_t t : succ) any = any || target[t];
        if (!any) {
          ok = false;
          break;
        }
      }
      r[s] = ok;
    }
    return r;
  };
  auto goal_set = [&](const std::vector<bits::NodeId>& gs, std::size_t i) {
    Set r(states, 1);
    if (gs.empty()) return r;
    for (std::size_t s = 0; s < states; ++s) {
      auto b = bits_of(s);
      r[s] = g.store.eval(gs[i], b, b);
    }
    return r;
  };
  std::size_t m = std::max<std::size_t>(1, g.sys_live.size()), k = std::max<std::size_t>(1, g.env_live.size());

  Set z(states, 1);
  while (true) {
    Set znew(states, 1);
    Set cz = cpre(z);
    for (std::size_t j = 0; j < m; ++j) {
      Set gj = goal_set(g.sys_live, j);
      Set y(states, 0);
      while (true) {
        Set cy = cpre(y);
        Set ynew(states, 0);
        for (std::size_t i = 0; i < k; ++i) {
          Set ai = goal_set(g.env_live, i);
          Set x = z;
          while (true) {
            Set cx = cpre(x);
            Set xn(states, 0);
            for (std::size_t s = 0; s < states; ++s) xn[s] = (gj[s] && cz[s]) || cy[s] || (!ai[s] && cx[s]);
            if (xn == x) break;
            x = xn;
          }
          for (std::size_t s = 0; s < states; ++s) ynew[s] = ynew[s] || x[s];
        }
        if (ynew == y) break;
        y = ynew;
      }
      for (std::size_t s = 0; s < states; ++s) znew[s] = znew[s] && y[s];
    }
    if (znew == z) break;
    z = znew;
  }
  for (std::size_t xs = 0; xs < nx; ++xs) {
    bool env_can_start = false, sys_can_start = false;
    for (std::size_t ys = 0; ys < ny; ++ys) {
      std::size_t s = join(xs, ys);
      auto b = bits_of(s);
      bool ei = holds(g, g.env_init, b, b);
      env_can_start = env_can_start || ei;
      sys_can_start = sys_can_start || (ei && holds(g, g.sys_init, b, b) && z[s]);
    }
    if (env_can_start && !sys_can_start) return false;
  }
  return true;
}

namespace {

bits::NodeId random_formula(std::mt19937_64& rng, bits::BitStore& st, const std::vector<std::pair<int, bool>>& lits,
                            int depth) {
  std::uniform_int_distribution<int> pick(0, static_cast<int>(lits.size()) - 1);
  auto leaf = [&] {
    auto [b, primed] = lits[static_cast<std::size_t>(pick(rng))];
    bits::NodeId l = st.lit(b, primed);
    return (rng() & 1) ? st.lnot(l) : l;
  };
  if (depth == 0 || rng() % 4 == 0) return leaf();
  bits::NodeId a = random_formula(rng, st, lits, depth - 1), b = random_formula(rng, st, lits, depth - 1);
  switch (rng() % 4) {
    case 0: return st.land(a, b);
    case 1: return st.lor(a, b);
    case 2: return st.iff(a, b);
    default: return st.implies(a, b);
  }
}

}  // namespace

bits::BitGame random_game(std::mt19937_64& rng, int nx, int ny) {
  SymbolTable symbols;
  for (int i = 0; i < nx; ++i) {
    VarDecl d;
    d.name = "e" + std::to_string(i);
    d.owner = Player::Env;
    d.kind = VarKind::Declarative;
    symbols.add(d);
  }
  for (int i = 0; i < ny; ++i) {
    VarDecl d;
    d.name = "s" + std::to_string(i);
    d.owner = Player::Sys;
    d.kind = VarKind::Declarative;
    symbols.add(d);
  }
  bits::BitGame g;
  g.layout = bits::BitLayout(symbols);
  g.env_bits = g.layout.bits_of(Player::Env);
  g.sys_bits = g.layout.bits_of(Player::Sys);
  std::vector<std::pair<int, bool>> state, env_step, sys_step;
  for (int b = 0; b < nx + ny; ++b) state.emplace_back(b, false);
  env_step = state;
  for (int b : g.env_bits) env_step.emplace_back(b, true);
  sys_step = env_step;
  for (int b : g.sys_bits) sys_step.emplace_back(b, true);
  auto& st = g.store;
  auto some = [&](const std::vector<std::pair<int, bool>>& lits, int count, int depth) {
    std::vector<bits::NodeId> out;
    for (int i = 0; i < count; ++i) out.push_back(random_formula(rng, st, lits, depth));
    return out;
  };
  g.env_init = some(state, static_cast<int>(rng() % 2), 2);
  g.sys_init = some(state, static_cast<int>(rng() % 2), 2);
  // disjunctions keep the safety parts from being mostly unsatisfiable
  for (int i = 0, n = 1 + static_cast<int>(rng() % 2); i < n; ++i)
    g.env_safety.push_back(st.lor(random_formula(rng, st, env_step, 2), random_formula(rng, st, env_step, 2)));
  for (int i = 0, n = 1 + static_cast<int>(rng() % 3); i < n; ++i)
    g.sys_safety.push_back(st.lor(random_formula(rng, st, sys_step, 3), random_formula(rng, st, sys_step, 2)));
  g.env_live = some(state, 1 + static_cast<int>(rng() % 2), 2);
  g.sys_live = some(state, 1 + static_cast<int>(rng() % 2), 2);
  for (std::size_t i = 0; i < g.env_safety.size(); ++i) g.env_safety_tags.push_back("random");
  for (std::size_t i = 0; i < g.sys_safety.size(); ++i) g.sys_safety_tags.push_back("random");
  return g;
}

// ---- translation helpers

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Compiled compile(const std::string& source, const translate::Options& options,
                 const std::map<std::string, std::string>& defines) {
  Compiled c{translate::compile_source(source, options, defines), {}};
  c.game = bits::blast_game(c.tr.game);
  return c;
}

bool holds(const bits::BitGame& game, const std::vector<bits::NodeId>& fs, const std::vector<char>& cur,
           const std::vector<char>& next) {
  for (auto f : fs)
    if (!game.store.eval(f, cur, next)) return false;
  return true;
}

std::vector<char> encode(const bits::BitLayout& layout, const SymbolTable& symbols, const Values& v) {
  std::vector<char> out(static_cast<std::size_t>(layout.bit_count()), 0);
  for (int var = 0; var < symbols.size(); ++var) {
    const VarDecl& d = symbols.at(var);
    for (int k = 0; k < d.element_count(); ++k) {
      auto it = v.find(d.is_array() ? d.name + "[" + std::to_string(k) + "]" : d.name);
      if (it == v.end()) continue;
      auto raw = static_cast<std::uint64_t>(it->second);
      int base = layout.base(var, k);
      for (int i = 0; i < layout.width(var); ++i) out[static_cast<std::size_t>(base + i)] = static_cast<char>((raw >> i) & 1);
    }
  }
  return out;
}

void for_each_transition(const bits::BitGame& game, const SymbolTable& symbols,
                         const std::function<void(const Values&, const Values&)>& fn) {
  bdd::Manager mgr;
  int n = game.layout.bit_count();
  std::vector<int> cur, next, all;
  for (int b = 0; b < n; ++b) {
    cur.push_back(mgr.add_var("b" + std::to_string(b)));
    next.push_back(mgr.add_var("b" + std::to_string(b) + "'", true));
    all.push_back(cur.back());
    all.push_back(next.back());
  }
  bits::BddBuilder builder(game.store, mgr, cur, next);
  bdd::Bdd rel = mgr.bdd_true();
  for (auto f : game.env_safety) rel &= builder.build(f);
  for (auto f : game.sys_safety) rel &= builder.build(f);
  // pre-states inside every domain
  bits::BitStore scratch = game.store;
  bits::Blaster blaster(scratch, game.layout, symbols);
  for (int v = 0; v < symbols.size(); ++v) {
    bits::NodeId d = blaster.domain_constraint(v, false);
    bits::BddBuilder b2(scratch, mgr, cur, next);
    rel &= b2.build(d);
  }
  mgr.for_each_sat(rel, all, [&](const std::vector<char>& vals) {
    std::vector<char> c(static_cast<std::size_t>(n)), x(static_cast<std::size_t>(n));
    for (int b = 0; b < n; ++b) {
      c[static_cast<std::size_t>(b)] = vals[static_cast<std::size_t>(2 * b)];
      x[static_cast<std::size_t>(b)] = vals[static_cast<std::size_t>(2 * b + 1)];
    }
    fn(gr1::decode(game.layout, symbols, c), gr1::decode(game.layout, symbols, x));
    return true;
  });
}

// ---- transducer checks

CheckResult check_transducer(const gr1::Transducer& t, const bits::BitGame& game, const SymbolTable& symbols,
                             const std::function<bool(const Values&, const Values&)>& step,
                             const std::vector<std::function<bool(const Values&)>>& fair,
                             const std::function<bool(const Values&)>& goal) {
  CheckResult r;
  std::size_t n = t.states.size();
  std::vector<Values> vals;
  for (const auto& s : t.states) vals.push_back(gr1::decode(game.layout, symbols, s.bits));
  std::vector<std::vector<int>> succ(n);
  for (const auto& [a, b] : t.transitions) {
    succ[static_cast<std::size_t>(a)].push_back(b);
    if (r.safe && !step(vals[static_cast<std::size_t>(a)], vals[static_cast<std::size_t>(b)])) {
      r.safe = false;
      r.why = "unsafe transition " + std::to_string(a) + " -> " + std::to_string(b);
    }
  }
  for (const auto& s : succ) r.dead_ends += s.empty();

  // Tarjan over the states that avoid the goal
  std::vector<char> keep(n);
  for (std::size_t i = 0; i < n; ++i) keep[i] = !goal(vals[i]);
  std::vector<int> index(n, -1), low(n, 0), stack;
  std::vector<char> on(n, 0);
  int counter = 0;
  std::function<void(int)> visit = [&](int v) {
    auto uv = static_cast<std::size_t>(v);
    index[uv] = low[uv] = counter++;
    stack.push_back(v);
    on[uv] = 1;
    for (int w : succ[uv]) {
      auto uw = static_cast<std::size_t>(w);
      if (!keep[uw]) continue;
      if (index[uw] < 0) {
        visit(w);
        low[uv] = std::min(low[uv], low[uw]);
      } else if (on[uw]) {
        low[uv] = std::min(low[uv], index[uw]);
      }
    }
    if (low[uv] != index[uv]) return;
    std::vector<int> scc;
    int w;
    do {
      w = stack.back();
      stack.pop_back();
      on[static_cast<std::size_t>(w)] = 0;
      scc.push_back(w);
    } while (w != v);
    bool cyclic = scc.size() > 1;
    if (!cyclic)
      for (int x : succ[uv]) cyclic = cyclic || x == v;
    if (!cyclic || !r.live) return;
    for (const auto& p : fair) {
      bool seen = false;
      for (int x : scc) seen = seen || p(vals[static_cast<std::size_t>(x)]);
      if (!seen) return;
    }
    r.live = false;
    r.why = "fair cycle avoiding the goal through state " + std::to_string(v);
  };
  for (std::size_t i = 0; i < n; ++i)
    if (keep[i] && index[i] < 0) visit(static_cast<int>(i));
  return r;
}

}  // namespace oracle
