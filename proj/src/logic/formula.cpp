#include "opsyn/logic/formula.hpp"

#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace opsyn::logic {

namespace {

std::shared_ptr<Node> node(Op op) {
  auto n = std::make_shared<Node>();
  n->op = op;
  return n;
}

const Formula& true_node() {
  static const Formula t = [] {
    auto n = node(Op::BoolConst);
    n->value = 1;
    return Formula(n);
  }();
  return t;
}

const Formula& false_node() {
  static const Formula f = [] {
    auto n = node(Op::BoolConst);
    n->value = 0;
    return Formula(n);
  }();
  return f;
}

}  // namespace

Formula make_bool(bool v) { return v ? true_node() : false_node(); }

Formula make_int(std::int64_t v) {
  auto n = node(Op::IntConst);
  n->value = v;
  return n;
}

Formula make_var(std::string name, int id, bool primed, Formula index, SourceLoc loc) {
  auto n = node(Op::Var);
  n->name = std::move(name);
  n->var = id;
  n->primed = primed;
  n->loc = loc;
  if (index) n->args.push_back(std::move(index));
  return n;
}

Formula make_bit(std::string name, int var, int element, int bit, bool primed) {
  auto n = node(Op::Bit);
  n->name = std::move(name);
  n->var = var;
  n->element = element;
  n->value = bit;
  n->primed = primed;
  return n;
}

Formula make_unary(Op op, Formula a, SourceLoc loc) {
  auto n = node(op);
  n->args.push_back(std::move(a));
  n->loc = loc;
  return n;
}

Formula make_binary(Op op, Formula a, Formula b, SourceLoc loc) {
  auto n = node(op);
  n->args.push_back(std::move(a));
  n->args.push_back(std::move(b));
  n->loc = loc;
  return n;
}

Formula make_ite(Formula c, Formula t, Formula e) {
  auto n = node(Op::Ite);
  n->args = {std::move(c), std::move(t), std::move(e)};
  return n;
}

Formula make_assign(Formula target, Formula value, SourceLoc loc) {
  return make_binary(Op::Assign, std::move(target), std::move(value), loc);
}

bool is_true(const Formula& f) { return f && f->op == Op::BoolConst && f->value != 0; }
bool is_false(const Formula& f) { return f && f->op == Op::BoolConst && f->value == 0; }

Formula land(Formula a, Formula b) {
  if (is_false(a) || is_false(b)) return make_bool(false);
  if (is_true(a)) return b;
  if (is_true(b)) return a;
  return make_binary(Op::And, std::move(a), std::move(b));
}

Formula lor(Formula a, Formula b) {
  if (is_true(a) || is_true(b)) return make_bool(true);
  if (is_false(a)) return b;
  if (is_false(b)) return a;
  return make_binary(Op::Or, std::move(a), std::move(b));
}

Formula lnot(Formula a) {
  if (is_true(a)) return make_bool(false);
  if (is_false(a)) return make_bool(true);
  if (a->op == Op::Not) return a->args[0];
  return make_unary(Op::Not, std::move(a));
}

Formula implies(Formula a, Formula b) {
  if (is_false(a) || is_true(b)) return make_bool(true);
  if (is_true(a)) return b;
  if (is_false(b)) return lnot(std::move(a));
  return make_binary(Op::Implies, std::move(a), std::move(b));
}

Formula iff(Formula a, Formula b) {
  if (is_true(a)) return b;
  if (is_true(b)) return a;
  if (is_false(a)) return lnot(std::move(b));
  if (is_false(b)) return lnot(std::move(a));
  return make_binary(Op::Iff, std::move(a), std::move(b));
}

Formula eq(Formula a, Formula b) { return make_binary(Op::Eq, std::move(a), std::move(b)); }

Formula eq_const(int var, const std::string& name, std::int64_t value, bool primed) {
  return eq(make_var(name, var, primed), make_int(value));
}

Formula conj(const std::vector<Formula>& parts) {
  Formula acc = make_bool(true);
  for (const auto& p : parts) {
    acc = land(acc, p);
    if (is_false(acc)) break;
  }
  return acc;
}

Formula disj(const std::vector<Formula>& parts) {
  Formula acc = make_bool(false);
  for (const auto& p : parts) {
    acc = lor(acc, p);
    if (is_true(acc)) break;
  }
  return acc;
}

bool is_temporal(Op op) { return is_past(op) || is_future(op); }

bool is_past(Op op) {
  return op == Op::Prev || op == Op::WeakPrev || op == Op::Since || op == Op::Once || op == Op::Historically;
}

bool is_future(Op op) {
  return op == Op::Next || op == Op::Always || op == Op::Eventually || op == Op::Until;
}

bool is_comparison(Op op) {
  return op == Op::Eq || op == Op::Ne || op == Op::Lt || op == Op::Le || op == Op::Gt || op == Op::Ge;
}

bool is_arithmetic(Op op) { return op == Op::Add || op == Op::Sub || op == Op::Neg; }

bool contains(const Formula& f, const std::function<bool(const Node&)>& pred) {
  if (!f) return false;
  std::unordered_set<const Node*> seen;
  std::vector<const Node*> stack{f.get()};
  while (!stack.empty()) {
    const Node* n = stack.back();
    stack.pop_back();
    if (!seen.insert(n).second) continue;
    if (pred(*n)) return true;
    for (const auto& a : n->args) stack.push_back(a.get());
  }
  return false;
}

bool has_temporal(const Formula& f) {
  return contains(f, [](const Node& n) { return is_temporal(n.op); });
}
bool has_past(const Formula& f) {
  return contains(f, [](const Node& n) { return is_past(n.op); });
}
bool has_future(const Formula& f) {
  return contains(f, [](const Node& n) { return is_future(n.op); });
}
bool has_prime(const Formula& f) {
  return contains(f, [](const Node& n) {
    return ((n.op == Op::Var || n.op == Op::Bit) && n.primed) || n.op == Op::Prime || n.op == Op::Next ||
           n.op == Op::Assign;
  });
}

void visit(const Formula& f, const std::function<void(const Node&)>& fn) {
  if (!f) return;
  std::unordered_set<const Node*> seen;
  std::function<void(const Node*)> go = [&](const Node* n) {
    if (!seen.insert(n).second) return;
    fn(*n);
    for (const auto& a : n->args) go(a.get());
  };
  go(f.get());
}

Formula rewrite(const Formula& f, const std::function<Formula(const Formula&)>& fn) {
  std::unordered_map<const Node*, Formula> memo;
  std::function<Formula(const Formula&)> go = [&](const Formula& g) -> Formula {
    if (!g) return g;
    auto it = memo.find(g.get());
    if (it != memo.end()) return it->second;
    Formula rebuilt = g;
    if (!g->args.empty()) {
      std::vector<Formula> args;
      args.reserve(g->args.size());
      bool changed = false;
      for (const auto& a : g->args) {
        args.push_back(go(a));
        changed = changed || args.back() != a;
      }
      if (changed) {
        auto copy = std::make_shared<Node>(*g);
        copy->args = std::move(args);
        rebuilt = copy;
      }
    }
    Formula replaced = fn(rebuilt);
    Formula result = replaced ? replaced : rebuilt;
    memo.emplace(g.get(), result);
    return result;
  };
  return go(f);
}

Formula prime_all(const Formula& f) {
  bool clash = false;
  Formula out = rewrite(f, [&](const Formula& g) -> Formula {
    if (g->op != Op::Var && g->op != Op::Bit) return nullptr;
    if (g->primed) {
      clash = true;
      return nullptr;
    }
    auto copy = std::make_shared<Node>(*g);
    copy->primed = true;
    return copy;
  });
  return clash ? nullptr : out;
}

Formula unprime_if(const Formula& f, const std::function<bool(int var)>& pred) {
  return rewrite(f, [&](const Formula& g) -> Formula {
    if ((g->op != Op::Var && g->op != Op::Bit) || !g->primed || !pred(g->var)) return nullptr;
    auto copy = std::make_shared<Node>(*g);
    copy->primed = false;
    return copy;
  });
}

bool structurally_equal(const Formula& a, const Formula& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->op != b->op || a->value != b->value || a->primed != b->primed || a->element != b->element ||
      a->args.size() != b->args.size())
    return false;
  if (a->op == Op::Var || a->op == Op::Bit) {
    if (a->name != b->name) return false;
    if (a->var >= 0 && b->var >= 0 && a->var != b->var) return false;
  }
  for (std::size_t i = 0; i < a->args.size(); ++i)
    if (!structurally_equal(a->args[i], b->args[i])) return false;
  return true;
}

namespace {

const char* binary_token(Op op) {
  switch (op) {
    case Op::And: return "&&";
    case Op::Or: return "||";
    case Op::Implies: return "->";
    case Op::Iff: return "<->";
    case Op::Add: return "+";
    case Op::Sub: return "-";
    case Op::Eq: return "==";
    case Op::Ne: return "!=";
    case Op::Lt: return "<";
    case Op::Le: return "<=";
    case Op::Gt: return ">";
    case Op::Ge: return ">=";
    case Op::Until: return "U";
    case Op::Since: return "S";
    case Op::Assign: return "=";
    default: return "?";
  }
}

const char* unary_token(Op op) {
  switch (op) {
    case Op::Not: return "!";
    case Op::Neg: return "-";
    case Op::Next: return "X ";
    case Op::Always: return "[] ";
    case Op::Eventually: return "<> ";
    case Op::Prev: return "--X ";
    case Op::WeakPrev: return "-X ";
    case Op::Once: return "O ";
    case Op::Historically: return "H ";
    default: return "?";
  }
}

void print(std::ostream& out, const Node& n) {
  switch (n.op) {
    case Op::BoolConst: out << (n.value ? "true" : "false"); return;
    case Op::IntConst: out << n.value; return;
    case Op::Var:
      out << n.name;
      if (!n.args.empty()) {
        if (n.primed) out << '\'';
        out << '[';
        print(out, *n.args[0]);
        out << ']';
      } else if (n.primed) {
        out << '\'';
      }
      return;
    case Op::Bit:
      out << n.name << '@' << n.value;
      if (n.primed) out << '\'';
      return;
    case Op::Prime:
      out << '(';
      print(out, *n.args[0]);
      out << ")'";
      return;
    case Op::Ite:
      out << '(';
      print(out, *n.args[0]);
      out << " -> ";
      print(out, *n.args[1]);
      out << " : ";
      print(out, *n.args[2]);
      out << ')';
      return;
    default: break;
  }
  if (n.args.size() == 1) {
    out << unary_token(n.op) << '(';
    print(out, *n.args[0]);
    out << ')';
    return;
  }
  if (n.op == Op::Assign) {
    // The target is stored primed; the source syntax writes it unprimed.
    const Node& t = *n.args[0];
    out << t.name;
    if (!t.args.empty()) {
      out << '[';
      print(out, *t.args[0]);
      out << ']';
    }
    out << " = ";
    print(out, *n.args[1]);
    return;
  }
  out << '(';
  print(out, *n.args[0]);
  out << ' ' << binary_token(n.op) << ' ';
  print(out, *n.args[1]);
  out << ')';
}

}  // namespace

std::string to_string(const Formula& f) {
  if (!f) return "<null>";
  std::ostringstream out;
  print(out, *f);
  return out.str();
}

}  // namespace opsyn::logic
