#include "opsyn/logic/temporal.hpp"

#include <map>

namespace opsyn::logic {

namespace {

void flatten_and(const Formula& f, std::vector<Formula>& out) {
  if (f->op == Op::And) {
    flatten_and(f->args[0], out);
    flatten_and(f->args[1], out);
  } else {
    out.push_back(f);
  }
}

bool has_future_or_prime(const Formula& f) { return has_future(f) || has_prime(f); }

// Rewrite X p as p' inside a safety body.
Formula next_to_prime(const Formula& f, const Formula& whole) {
  return rewrite(f, [&](const Formula& g) -> Formula {
    if (g->op == Op::Next) {
      if (has_future(g->args[0])) throw NotInGr1(whole, "nested temporal operator under X");
      Formula p = prime_all(g->args[0]);
      if (!p) throw NotInGr1(whole, "X applied to a primed expression");
      return p;
    }
    if (is_future(g->op)) throw NotInGr1(whole, "temporal operator inside a safety formula");
    return nullptr;
  });
}

}  // namespace

Gr1Split split_gr1(const Formula& f) {
  if (has_past(f)) throw NotInGr1(f, "past operators must be eliminated first");
  std::vector<Formula> parts;
  flatten_and(f, parts);
  Gr1Split out;
  out.init = make_bool(true);
  for (const auto& c : parts) {
    if (is_true(c)) continue;
    if (!has_future_or_prime(c)) {
      out.init = land(out.init, c);
      continue;
    }
    if (c->op == Op::Always) {
      const Formula& body = c->args[0];
      if (body->op == Op::Eventually) {
        const Formula& goal = body->args[0];
        if (has_future_or_prime(goal)) throw NotInGr1(c, "recurrence body must be a state predicate");
        out.recurrence.push_back(goal);
        continue;
      }
      std::vector<Formula> inner;
      flatten_and(body, inner);
      for (const auto& s : inner) {
        if (s->op == Op::Always) {
          // [] [] p is [] p
          Gr1Split nested = split_gr1(s);
          if (!is_true(nested.init)) out.safety.push_back(next_to_prime(nested.init, c));
          for (auto& x : nested.safety) out.safety.push_back(x);
          for (auto& x : nested.recurrence) out.recurrence.push_back(x);
          continue;
        }
        if (s->op == Op::Eventually && !has_future_or_prime(s->args[0])) {
          out.recurrence.push_back(s->args[0]);
          continue;
        }
        out.safety.push_back(next_to_prime(s, c));
      }
      continue;
    }
    if (c->op == Op::Eventually && c->args[0]->op == Op::Always) throw NotInGr1(c, "persistence is not in GR(1)");
    throw NotInGr1(c, "conjunct is neither initial, safety, nor recurrence");
  }
  return out;
}

Formula reassemble(const Gr1Split& split) {
  Formula f = split.init ? split.init : make_bool(true);
  for (const auto& s : split.safety) f = land(f, make_unary(Op::Always, s));
  for (const auto& r : split.recurrence) f = land(f, make_unary(Op::Always, make_unary(Op::Eventually, r)));
  return f;
}

Formula TesterFactory::fresh(SourceLoc loc) {
  VarDecl d;
  d.name = prefix_ + std::to_string(symbols_.size());
  d.owner = owner_;
  d.kind = VarKind::Declarative;
  d.domain = Domain::boolean();
  d.auxiliary = true;
  d.loc = loc;
  int id = symbols_.add(d);
  created_.push_back(id);
  return make_var(d.name, id);
}

PastElimination eliminate_past(const Formula& f, TesterFactory& fresh) {
  PastElimination out;
  out.init = make_bool(true);
  out.trans = make_bool(true);
  std::map<std::string, Formula> shared;
  auto tester = [&](const std::string& key, bool initial, SourceLoc loc, bool& created) -> Formula {
    auto it = shared.find(key);
    if (it != shared.end()) {
      created = false;
      return it->second;
    }
    created = true;
    Formula t = fresh.fresh(loc);
    out.testers.push_back(t->var);
    shared.emplace(key, t);
    out.init = land(out.init, initial ? t : lnot(t));
    return t;
  };
  out.formula = rewrite(f, [&](const Formula& g) -> Formula {
    if (!is_past(g->op)) return nullptr;
    for (const auto& a : g->args)
      if (has_prime(a) || has_future(a))
        throw CompileError({make_error(g->loc, "past-of-primed",
                                       "past operators cannot be applied to primed or future expressions")});
    std::string key = to_string(g);
    bool created = false;
    switch (g->op) {
      case Op::Prev:
      case Op::WeakPrev: {
        Formula t = tester(key, g->op == Op::WeakPrev, g->loc, created);
        if (created) out.trans = land(out.trans, iff(prime_all(t), g->args[0]));
        return t;
      }
      case Op::Since:
      case Op::Once:
      case Op::Historically: {
        Formula p, q;
        bool negate = false;
        if (g->op == Op::Since) {
          p = g->args[0];
          q = g->args[1];
        } else if (g->op == Op::Once) {
          p = make_bool(true);
          q = g->args[0];
        } else {
          p = make_bool(true);
          q = lnot(g->args[0]);
          negate = true;
        }
        Formula t = tester(key, false, g->loc, created);
        Formula now = lor(q, land(p, t));
        if (created) out.trans = land(out.trans, iff(prime_all(t), now));
        return negate ? lnot(now) : now;
      }
      default: return nullptr;
    }
  });
  return out;
}

}  // namespace opsyn::logic
