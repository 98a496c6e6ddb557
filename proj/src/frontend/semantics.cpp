#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "opsyn/frontend/ast.hpp"

namespace opsyn::frontend {

using namespace logic;

namespace {

struct Checker {
  CheckedSpec out;
  std::vector<Diagnostic> errors;

  void error(SourceLoc loc, const std::string& rule, const std::string& msg) {
    errors.push_back(make_error(loc, rule, msg));
  }

  void declare(VarDecl d) {
    if (d.name.rfind(kReservedPrefix, 0) == 0) {
      error(d.loc, "reserved-name", "identifiers starting with '__' are reserved");
      return;
    }
    for (const auto& v : out.symbols.all()) {
      if (v.name == d.name && v.scope_process == d.scope_process) {
        error(d.loc, "redeclaration", "'" + d.name + "' is already declared in this scope");
        return;
      }
    }
    if (d.initial) {
      std::int64_t v = *d.initial;
      if (v < d.domain.min || v > d.domain.max)
        error(d.loc, "domain", "initial value of '" + d.name + "' is outside " + d.domain.to_string());
    }
    out.symbols.add(std::move(d));
  }

  // Resolve names and push primes onto variable references.
  Formula resolve(const Formula& f, std::optional<int> pid) {
    if (!f) return f;
    bool bad = false;
    Formula r = rewrite(f, [&](const Formula& g) -> Formula {
      if (g->op == Op::Var && g->var < 0) {
        auto id = out.symbols.lookup(g->name, pid);
        if (!id) {
          error(g->loc, "undeclared", "undeclared identifier '" + g->name + "'");
          bad = true;
          return nullptr;
        }
        const VarDecl& d = out.symbols.at(*id);
        if (d.is_array() && g->args.empty()) {
          error(g->loc, "array", "array '" + g->name + "' used without an index");
          bad = true;
        } else if (!d.is_array() && !g->args.empty()) {
          error(g->loc, "array", "'" + g->name + "' is not an array");
          bad = true;
        } else if (d.is_array() && g->args[0]->op == Op::IntConst &&
                   (g->args[0]->value < 0 || g->args[0]->value >= d.array_length)) {
          error(g->loc, "array", "index out of bounds for '" + g->name + "'");
          bad = true;
        }
        auto copy = std::make_shared<Node>(*g);
        copy->var = *id;
        return copy;
      }
      if (g->op == Op::Prime) {
        Formula p = prime_all(g->args[0]);
        if (!p) {
          error(g->loc, "multiple-priming", "multiple priming is not allowed");
          bad = true;
          return g->args[0];
        }
        return p;
      }
      return nullptr;
    });
    return bad ? r : r;
  }

  // Variables referenced with a next-step meaning (primed or under X).
  void next_refs(const Formula& f, bool under_next, const std::function<void(const Node&)>& fn) {
    if (!f) return;
    if ((f->op == Op::Var) && (f->primed || under_next)) fn(*f);
    bool next = under_next || f->op == Op::Next;
    for (const auto& a : f->args) next_refs(a, next, fn);
  }

  void check_assumption_primes(const Formula& f, SourceLoc loc) {
    next_refs(f, false, [&](const Node& n) {
      if (n.var >= 0 && out.symbols.at(n.var).owner == Player::Sys)
        error(n.loc.line ? n.loc : loc, "primed-sys-in-assumption",
              "primed system variable in assumption: '" + n.name + "'");
    });
  }

  bool has_temporal_future(const Formula& f) {
    return contains(f, [](const Node& n) { return is_future(n.op); });
  }

  struct ProcCtx {
    Process* proc;
    std::set<std::string> labels;
    std::vector<std::pair<std::string, SourceLoc>> gotos;
    bool has_do_in_atomic = false;
    bool has_atomic = false;
    bool has_progress = false;
  };

  void check_sequence(Sequence& seq, ProcCtx& ctx, int loop_depth, bool in_atomic, bool option_start,
                      bool has_siblings) {
    for (std::size_t i = 0; i < seq.size(); ++i) {
      Stmt& s = *seq[i];
      for (const auto& l : s.labels) {
        if (!ctx.labels.insert(l).second) error(s.loc, "label", "duplicate label '" + l + "'");
        if (l.find("progress") != std::string::npos) ctx.has_progress = true;
      }
      switch (s.kind) {
        case StmtKind::Expr:
        case StmtKind::Assign: check_statement(s, ctx); break;
        case StmtKind::Else:
          if (!(option_start && i == 0)) error(s.loc, "else", "'else' must start an option");
          else if (!has_siblings) error(s.loc, "else", "'else' without sibling options");
          break;
        case StmtKind::Break:
          if (loop_depth == 0) error(s.loc, "break", "'break' outside a loop");
          break;
        case StmtKind::Goto: ctx.gotos.push_back({s.target, s.loc}); break;
        case StmtKind::If:
        case StmtKind::Do: {
          if (s.kind == StmtKind::Do && in_atomic) ctx.has_do_in_atomic = true;
          int elses = 0;
          for (auto& opt : s.options)
            if (!opt.empty() && opt[0]->kind == StmtKind::Else) ++elses;
          if (elses > 1) error(s.loc, "else", "more than one 'else' option");
          for (auto& opt : s.options) {
            if (opt.empty()) {
              error(s.loc, "syntax", "empty option");
              continue;
            }
            check_sequence(opt, ctx, loop_depth + (s.kind == StmtKind::Do ? 1 : 0), in_atomic, true,
                           s.options.size() > 1);
          }
          break;
        }
        case StmtKind::Atomic:
          ctx.has_atomic = true;
          if (in_atomic) error(s.loc, "atomic", "nested atomic blocks are not allowed");
          if (ctx.proc->flavor != Flavor::Assert || ctx.proc->pc_owner != Player::Sys)
            error(s.loc, "atomic", "atomic blocks are allowed only in 'assert sys' processes");
          check_sequence(s.body, ctx, loop_depth, true, false, false);
          break;
      }
    }
  }

  void check_statement(Stmt& s, ProcCtx& ctx) {
    Process& p = *ctx.proc;
    s.expr = resolve(s.expr, p.pid);
    if (contains(s.expr, [](const Node& n) { return is_future(n.op) || n.op == Op::Since || n.op == Op::Once ||
                                                     n.op == Op::Historically; }))
      error(s.loc, "temporal-in-statement", "only -X and --X may appear in statements");
    if (p.flavor == Flavor::Assume) check_assumption_primes(s.expr, s.loc);
    if (s.kind == StmtKind::Assign) {
      const Node& t = *s.expr->args[0];
      if (t.var >= 0 && out.symbols.at(t.var).owner != constrained_player(p.flavor))
        error(s.loc, "ownership",
              "assignment to '" + t.name + "' which is not owned by the " +
                  player_name(constrained_player(p.flavor)) + " player");
      if (has_prime(s.expr->args[1]))
        error(s.loc, "assignment", "the assigned expression must not contain primed variables");
    }
    if (contains(s.expr, [](const Node& n) { return is_past(n.op); }) && has_prime(s.expr)) {
      // past operators over primed operands are rejected later precisely; catch the obvious case here
      visit(s.expr, [&](const Node& n) {
        if (is_past(n.op) && has_prime(n.args[0]))
          error(s.loc, "past-of-primed", "past operators cannot be applied to primed expressions");
      });
    }
  }

  bool env_liveness = false;

  void run(SpecAst ast) {
    for (auto& d : ast.globals) declare(d);
    for (auto& p : ast.processes)
      for (auto& d : p.locals) declare(d);
    std::vector<ProcCtx> ctxs;
    for (auto& p : ast.processes) {
      ProcCtx ctx{&p, {}, {}, false, false, false};
      check_sequence(p.body, ctx, 0, false, false, false);
      for (const auto& [target, loc] : ctx.gotos)
        if (!ctx.labels.count(target)) error(loc, "goto", "goto to unknown label '" + target + "'");
      if (!p.active) {
        out.warnings.push_back(make_warning(p.loc, "inactive", "proctype '" + p.name +
                                                                 "' is not active and is ignored"));
      } else {
        if (ctx.has_atomic) out.has_atomic = true;
        if (ctx.has_progress && p.flavor == Flavor::Assume) env_liveness = true;
      }
      ctxs.push_back(ctx);
    }
    // atomic only for processes directly at top level
    std::set<int> nested;
    std::function<void(const Product&)> walk = [&](const Product& k) {
      std::optional<Flavor> flavor;
      for (const auto& m : k.members) {
        Flavor f;
        if (m.kind == Unit::Kind::Process) {
          nested.insert(m.index);
          f = ast.processes[static_cast<std::size_t>(m.index)].flavor;
        } else {
          walk(ast.products[static_cast<std::size_t>(m.index)]);
          f = product_flavor(ast, ast.products[static_cast<std::size_t>(m.index)]);
        }
        if (flavor && *flavor != f)
          error(k.loc, "product", "a product cannot mix assume and assert processes");
        flavor = f;
      }
    };
    for (const auto& u : ast.units)
      if (u.kind == Unit::Kind::Product) walk(ast.products[static_cast<std::size_t>(u.index)]);
    for (std::size_t i = 0; i < ctxs.size(); ++i)
      if (ctxs[i].has_atomic && nested.count(static_cast<int>(i)))
        error(ast.processes[i].loc, "atomic", "atomic blocks are allowed only in top-level processes");

    for (auto& b : ast.ltl) {
      b.formula = resolve(b.formula, std::nullopt);
      if (b.flavor == Flavor::Assume) {
        check_assumption_primes(b.formula, b.loc);
        if (contains(b.formula, [](const Node& n) { return n.op == Op::Eventually || n.op == Op::Until; }))
          env_liveness = true;
      }
    }
    if (out.has_atomic) {
      for (const auto& b : ast.ltl)
        if (contains(b.formula, [](const Node& n) { return (n.op == Op::Var && n.primed) || n.op == Op::Next; }))
          error(b.loc, "primed-ltl-with-atomic",
                "ltl blocks must not contain primed variables when atomic blocks are present");
      if (env_liveness) {
        for (std::size_t i = 0; i < ctxs.size(); ++i)
          if (ctxs[i].has_do_in_atomic && ast.processes[i].active)
            error(ast.processes[i].loc, "liveness-with-atomic-loop",
                  "loops inside atomic blocks are not allowed when there are liveness assumptions");
      }
    }
    out.ast = std::move(ast);
  }

  static Flavor product_flavor(const SpecAst& ast, const Product& k) {
    const Unit& m = k.members.front();
    if (m.kind == Unit::Kind::Process) return ast.processes[static_cast<std::size_t>(m.index)].flavor;
    return product_flavor(ast, ast.products[static_cast<std::size_t>(m.index)]);
  }
};

}  // namespace

CheckedSpec check_semantics(SpecAst ast) {
  Checker c;
  c.run(std::move(ast));
  if (!c.errors.empty()) throw CompileError(c.errors);
  return std::move(c.out);
}

namespace {

void print_decl(std::ostream& out, const VarDecl& d, bool local) {
  if (d.is_free()) out << "free ";
  out << player_name(d.owner) << ' ';
  const Domain& dom = d.domain;
  switch (dom.kind) {
    case Domain::Kind::Bool: out << "bool "; break;
    case Domain::Kind::Bit: out << "bit "; break;
    case Domain::Kind::Byte: out << "byte "; break;
    case Domain::Kind::Ranged: out << "int(" << dom.min << ", " << dom.max << ") "; break;
    case Domain::Kind::Bitfield: out << (dom.is_signed ? "signed " : "unsigned "); break;
  }
  out << d.name;
  if (d.is_array()) out << '[' << d.array_length << ']';
  if (dom.kind == Domain::Kind::Bitfield) out << " : " << dom.width;
  if (d.initial) out << " = " << *d.initial;
  out << ';';
  (void)local;
}

void indent(std::ostream& out, int depth) {
  for (int i = 0; i < depth; ++i) out << "    ";
}

void print_sequence(std::ostream& out, const Sequence& seq, int depth);

void print_stmt(std::ostream& out, const Stmt& s, int depth) {
  for (const auto& l : s.labels) out << l << ": ";
  switch (s.kind) {
    case StmtKind::Expr:
    case StmtKind::Assign: out << to_string(s.expr); break;
    case StmtKind::Else: out << "else"; break;
    case StmtKind::Break: out << "break"; break;
    case StmtKind::Goto: out << "goto " << s.target; break;
    case StmtKind::If:
    case StmtKind::Do:
      out << (s.kind == StmtKind::If ? "if" : "do") << '\n';
      for (const auto& opt : s.options) {
        indent(out, depth);
        out << ":: ";
        print_sequence(out, opt, depth + 1);
        out << '\n';
      }
      indent(out, depth);
      out << (s.kind == StmtKind::If ? "fi" : "od");
      break;
    case StmtKind::Atomic:
      out << "atomic {\n";
      indent(out, depth + 1);
      print_sequence(out, s.body, depth + 1);
      out << '\n';
      indent(out, depth);
      out << '}';
      break;
  }
}

void print_sequence(std::ostream& out, const Sequence& seq, int depth) {
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (i > 0) {
      out << ";\n";
      indent(out, depth);
    }
    print_stmt(out, *seq[i], depth);
  }
}

void print_unit(std::ostream& out, const SpecAst& ast, const Unit& u, int depth) {
  indent(out, depth);
  switch (u.kind) {
    case Unit::Kind::Ltl: {
      const LtlBlock& b = ast.ltl[static_cast<std::size_t>(u.index)];
      out << flavor_name(b.flavor) << " ltl { " << to_string(b.formula) << " }\n";
      break;
    }
    case Unit::Kind::Product: {
      const Product& k = ast.products[static_cast<std::size_t>(u.index)];
      out << (k.sync ? "sync" : "async") << " {\n";
      for (const auto& m : k.members) print_unit(out, ast, m, depth + 1);
      indent(out, depth);
      out << "}\n";
      break;
    }
    case Unit::Kind::Process: {
      const Process& p = ast.processes[static_cast<std::size_t>(u.index)];
      out << flavor_name(p.flavor) << (p.active ? " active " : " ") << player_name(p.pc_owner) << " proctype "
          << p.name << "() {\n";
      for (const auto& d : p.locals) {
        indent(out, depth + 1);
        print_decl(out, d, true);
        out << '\n';
      }
      indent(out, depth + 1);
      print_sequence(out, p.body, depth + 1);
      out << '\n';
      indent(out, depth);
      out << "}\n";
      break;
    }
  }
}

bool same_decl(const VarDecl& a, const VarDecl& b) {
  return a.name == b.name && a.owner == b.owner && a.kind == b.kind && a.domain.kind == b.domain.kind &&
         a.domain.min == b.domain.min && a.domain.max == b.domain.max && a.domain.width == b.domain.width &&
         a.domain.is_signed == b.domain.is_signed && a.array_length == b.array_length && a.initial == b.initial &&
         a.scope_process == b.scope_process;
}

bool same_seq(const Sequence& a, const Sequence& b);

bool same_stmt(const Stmt& a, const Stmt& b) {
  if (a.kind != b.kind || a.target != b.target || a.labels != b.labels || a.id != b.id) return false;
  if (!logic::structurally_equal(a.expr, b.expr)) return false;
  if (a.options.size() != b.options.size()) return false;
  for (std::size_t i = 0; i < a.options.size(); ++i)
    if (!same_seq(a.options[i], b.options[i])) return false;
  return same_seq(a.body, b.body);
}

bool same_seq(const Sequence& a, const Sequence& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!same_stmt(*a[i], *b[i])) return false;
  return true;
}

}  // namespace

std::string print(const SpecAst& ast) {
  std::ostringstream out;
  for (const auto& d : ast.globals) {
    print_decl(out, d, false);
    out << '\n';
  }
  for (const auto& u : ast.units) print_unit(out, ast, u, 0);
  return out.str();
}

bool structurally_equal(const SpecAst& a, const SpecAst& b) {
  if (a.globals.size() != b.globals.size() || a.processes.size() != b.processes.size() ||
      a.products.size() != b.products.size() || a.ltl.size() != b.ltl.size() || a.units.size() != b.units.size())
    return false;
  for (std::size_t i = 0; i < a.globals.size(); ++i)
    if (!same_decl(a.globals[i], b.globals[i])) return false;
  for (std::size_t i = 0; i < a.processes.size(); ++i) {
    const Process& p = a.processes[i];
    const Process& q = b.processes[i];
    if (p.flavor != q.flavor || p.pc_owner != q.pc_owner || p.active != q.active || p.name != q.name ||
        p.locals.size() != q.locals.size() || !same_seq(p.body, q.body))
      return false;
    for (std::size_t j = 0; j < p.locals.size(); ++j)
      if (!same_decl(p.locals[j], q.locals[j])) return false;
  }
  for (std::size_t i = 0; i < a.products.size(); ++i) {
    const Product& p = a.products[i];
    const Product& q = b.products[i];
    if (p.sync != q.sync || p.members.size() != q.members.size()) return false;
    for (std::size_t j = 0; j < p.members.size(); ++j)
      if (p.members[j].kind != q.members[j].kind || p.members[j].index != q.members[j].index) return false;
  }
  for (std::size_t i = 0; i < a.ltl.size(); ++i)
    if (a.ltl[i].flavor != b.ltl[i].flavor || !logic::structurally_equal(a.ltl[i].formula, b.ltl[i].formula))
      return false;
  for (std::size_t i = 0; i < a.units.size(); ++i)
    if (a.units[i].kind != b.units[i].kind || a.units[i].index != b.units[i].index) return false;
  return true;
}

}  // namespace opsyn::frontend
