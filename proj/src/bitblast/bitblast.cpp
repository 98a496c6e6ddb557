#include "opsyn/bitblast/bitblast.hpp"

#include <algorithm>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace opsyn::bits {

using logic::Formula;
using logic::Op;

// ---- store ----

BitStore::BitStore() {
  nodes_.push_back({Kind::Const, 0, 0});
  nodes_.push_back({Kind::Const, 1, 0});
}

NodeId BitStore::make(Kind k, std::uint32_t a, std::uint32_t b) {
  Key key{k, a, b};
  auto it = table_.find(key);
  if (it != table_.end()) return it->second;
  auto id = static_cast<NodeId>(nodes_.size());
  nodes_.push_back({k, a, b});
  table_.emplace(key, id);
  return id;
}

NodeId BitStore::lit(int bit, bool primed) { return make(Kind::Lit, static_cast<std::uint32_t>(bit), primed ? 1 : 0); }

NodeId BitStore::lnot(NodeId a) {
  if (a <= 1) return a ^ 1u;
  if (nodes_[a].kind == Kind::Not) return nodes_[a].a;
  return make(Kind::Not, a, 0);
}

namespace {
bool complementary(const BitStore& s, NodeId a, NodeId b) {
  return (s.node(a).kind == BitStore::Kind::Not && s.node(a).a == b) ||
         (s.node(b).kind == BitStore::Kind::Not && s.node(b).a == a);
}
}  // namespace

NodeId BitStore::land(NodeId a, NodeId b) {
  if (a == kFalse || b == kFalse) return kFalse;
  if (a == kTrue) return b;
  if (b == kTrue || a == b) return a;
  if (complementary(*this, a, b)) return kFalse;
  if (a > b) std::swap(a, b);
  return make(Kind::And, a, b);
}

NodeId BitStore::lor(NodeId a, NodeId b) {
  if (a == kTrue || b == kTrue) return kTrue;
  if (a == kFalse) return b;
  if (b == kFalse || a == b) return a;
  if (complementary(*this, a, b)) return kTrue;
  if (a > b) std::swap(a, b);
  return make(Kind::Or, a, b);
}

NodeId BitStore::lxor(NodeId a, NodeId b) {
  if (a == kFalse) return b;
  if (b == kFalse) return a;
  if (a == kTrue) return lnot(b);
  if (b == kTrue) return lnot(a);
  if (a == b) return kFalse;
  if (complementary(*this, a, b)) return kTrue;
  return lor(land(a, lnot(b)), land(lnot(a), b));
}

NodeId BitStore::ite(NodeId c, NodeId t, NodeId e) {
  if (c == kTrue) return t;
  if (c == kFalse) return e;
  if (t == e) return t;
  if (t == kTrue && e == kFalse) return c;
  if (t == kFalse && e == kTrue) return lnot(c);
  return lor(land(c, t), land(lnot(c), e));
}

NodeId BitStore::conj(const std::vector<NodeId>& xs) {
  NodeId acc = kTrue;
  for (NodeId x : xs) acc = land(acc, x);
  return acc;
}

NodeId BitStore::disj(const std::vector<NodeId>& xs) {
  NodeId acc = kFalse;
  for (NodeId x : xs) acc = lor(acc, x);
  return acc;
}

bool BitStore::is_lit_or_const(NodeId n) const {
  Kind k = nodes_[n].kind;
  return k == Kind::Const || k == Kind::Lit;
}

bool BitStore::eval(NodeId n, const std::vector<char>& cur, const std::vector<char>& next) const {
  std::unordered_map<NodeId, bool> memo;
  std::function<bool(NodeId)> go = [&](NodeId m) -> bool {
    const Node& x = nodes_[m];
    switch (x.kind) {
      case Kind::Const: return x.a != 0;
      case Kind::Lit: return (x.b ? next : cur)[x.a] != 0;
      default: break;
    }
    auto it = memo.find(m);
    if (it != memo.end()) return it->second;
    bool r;
    if (x.kind == Kind::Not)
      r = !go(x.a);
    else if (x.kind == Kind::And)
      r = go(x.a) && go(x.b);
    else
      r = go(x.a) || go(x.b);
    memo.emplace(m, r);
    return r;
  };
  return go(n);
}

std::vector<std::pair<int, bool>> BitStore::literals(NodeId n) const {
  std::vector<std::pair<int, bool>> out;
  std::vector<char> seen(nodes_.size(), 0);
  std::vector<NodeId> stack{n};
  while (!stack.empty()) {
    NodeId m = stack.back();
    stack.pop_back();
    if (seen[m]) continue;
    seen[m] = 1;
    const Node& x = nodes_[m];
    if (x.kind == Kind::Lit) out.emplace_back(static_cast<int>(x.a), x.b != 0);
    if (x.kind == Kind::Not) stack.push_back(x.a);
    if (x.kind == Kind::And || x.kind == Kind::Or) {
      stack.push_back(x.a);
      stack.push_back(x.b);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool BitStore::has_primed(NodeId n) const {
  for (const auto& [bit, primed] : literals(n))
    if (primed) return true;
  return false;
}

// ---- layout ----

BitLayout::BitLayout(const SymbolTable& symbols) {
  for (int id = 0; id < symbols.size(); ++id) {
    const VarDecl& v = symbols.at(id);
    int w = v.domain.is_boolean() ? 1 : v.domain.width;
    first_.push_back(static_cast<int>(bits_.size()));
    widths_.push_back(w);
    for (int k = 0; k < v.element_count(); ++k) {
      std::string base = v.is_array() ? v.name + "." + std::to_string(k) : v.name;
      for (int i = 0; i < w; ++i) {
        BitVar b;
        b.name = v.domain.is_boolean() ? base : base + "@" + std::to_string(i);
        b.var = id;
        b.element = k;
        b.bit = i;
        b.owner = v.owner;
        by_name_[b.name] = static_cast<int>(bits_.size());
        bits_.push_back(b);
      }
    }
  }
}

int BitLayout::base(int var, int element) const {
  return first_[static_cast<std::size_t>(var)] + element * widths_[static_cast<std::size_t>(var)];
}

std::vector<int> BitLayout::bits_of(Player p) const {
  std::vector<int> out;
  for (int i = 0; i < bit_count(); ++i)
    if (bits_[static_cast<std::size_t>(i)].owner == p) out.push_back(i);
  return out;
}

std::vector<int> BitLayout::bits_of_var(int var) const {
  std::vector<int> out;
  for (int i = 0; i < bit_count(); ++i)
    if (bits_[static_cast<std::size_t>(i)].var == var) out.push_back(i);
  return out;
}

int BitLayout::find(const std::string& name) const {
  auto it = by_name_.find(name);
  return it == by_name_.end() ? -1 : it->second;
}

// ---- circuits ----

BitVec Blaster::constant(std::int64_t v) {
  int w = 1;
  while (!(v >= -(std::int64_t{1} << (w - 1)) && v <= (std::int64_t{1} << (w - 1)) - 1)) ++w;
  BitVec out;
  for (int i = 0; i < w; ++i) out.bits.push_back(((v >> i) & 1) ? kTrue : kFalse);
  return out;
}

BitVec Blaster::extend(const BitVec& v, int width) {
  BitVec out = v;
  NodeId sign = v.bits.empty() ? kFalse : v.bits.back();
  while (out.width() < width) out.bits.push_back(sign);
  return out;
}

BitVec Blaster::add(const BitVec& a, const BitVec& b) {
  int w = std::max(a.width(), b.width()) + 1;
  BitVec x = extend(a, w), y = extend(b, w), out;
  NodeId carry = kFalse;
  for (int i = 0; i < w; ++i) {
    NodeId ai = x.bits[static_cast<std::size_t>(i)], bi = y.bits[static_cast<std::size_t>(i)];
    NodeId half = store_.lxor(ai, bi);
    out.bits.push_back(store_.lxor(half, carry));
    carry = store_.lor(store_.land(ai, bi), store_.land(carry, half));
  }
  return out;
}

BitVec Blaster::sub(const BitVec& a, const BitVec& b) {
  int w = std::max(a.width(), b.width()) + 1;
  BitVec x = extend(a, w), y = extend(b, w), out;
  NodeId carry = kTrue;
  for (int i = 0; i < w; ++i) {
    NodeId ai = x.bits[static_cast<std::size_t>(i)], bi = store_.lnot(y.bits[static_cast<std::size_t>(i)]);
    NodeId half = store_.lxor(ai, bi);
    out.bits.push_back(store_.lxor(half, carry));
    carry = store_.lor(store_.land(ai, bi), store_.land(carry, half));
  }
  return out;
}

NodeId Blaster::equal(const BitVec& a, const BitVec& b) {
  int w = std::max(a.width(), b.width());
  BitVec x = extend(a, w), y = extend(b, w);
  NodeId acc = kTrue;
  for (int i = 0; i < w; ++i)
    acc = store_.land(acc, store_.iff(x.bits[static_cast<std::size_t>(i)], y.bits[static_cast<std::size_t>(i)]));
  return acc;
}

NodeId Blaster::less(const BitVec& a, const BitVec& b) {
  // flip the sign bits, then compare as unsigned from the LSB up
  int w = std::max(a.width(), b.width());
  BitVec x = extend(a, w), y = extend(b, w);
  x.bits.back() = store_.lnot(x.bits.back());
  y.bits.back() = store_.lnot(y.bits.back());
  NodeId lt = kFalse;
  for (int i = 0; i < w; ++i) {
    NodeId ai = x.bits[static_cast<std::size_t>(i)], bi = y.bits[static_cast<std::size_t>(i)];
    lt = store_.lor(store_.land(store_.lnot(ai), bi), store_.land(store_.iff(ai, bi), lt));
  }
  return lt;
}

// ---- blasting ----

namespace {
[[noreturn]] void fail(const Formula& f, const std::string& msg) {
  throw CompileError({make_error(f->loc, "bitblast", msg + ": " + logic::to_string(f))});
}
}  // namespace

bool Blaster::is_bool(const Formula& f) const {
  switch (f->op) {
    case Op::BoolConst:
    case Op::Bit:
    case Op::Not:
    case Op::And:
    case Op::Or:
    case Op::Implies:
    case Op::Iff:
    case Op::Eq:
    case Op::Ne:
    case Op::Lt:
    case Op::Le:
    case Op::Gt:
    case Op::Ge:
    case Op::Assign: return true;
    case Op::Var: return f->var >= 0 && symbols_.at(f->var).domain.is_boolean();
    case Op::Prime: return is_bool(f->args[0]);
    case Op::Ite: return is_bool(f->args[1]) && is_bool(f->args[2]);
    default: return false;
  }
}

std::int64_t Blaster::const_value(const Formula& f, bool& ok) const {
  ok = true;
  switch (f->op) {
    case Op::IntConst: return f->value;
    case Op::BoolConst: return f->value != 0;
    case Op::Neg: return -const_value(f->args[0], ok);
    case Op::Add: {
      bool o2;
      std::int64_t a = const_value(f->args[0], ok), b = const_value(f->args[1], o2);
      ok = ok && o2;
      return a + b;
    }
    case Op::Sub: {
      bool o2;
      std::int64_t a = const_value(f->args[0], ok), b = const_value(f->args[1], o2);
      ok = ok && o2;
      return a - b;
    }
    default: ok = false; return 0;
  }
}

BitVec Blaster::var_bits(int var, int element, bool primed) {
  const VarDecl& d = symbols_.at(var);
  int base = layout_.base(var, element);
  BitVec out;
  for (int i = 0; i < layout_.width(var); ++i) out.bits.push_back(store_.lit(base + i, primed));
  if (!d.domain.is_signed) out.bits.push_back(kFalse);
  return out;
}

NodeId Blaster::blast(const Formula& f) { return go_bool(f, false); }
BitVec Blaster::blast_int(const Formula& f) { return go_int(f, false); }

NodeId Blaster::go_bool(const Formula& f, bool primed) {
  auto& memo = bool_memo_[primed ? 1 : 0];
  auto it = memo.find(f.get());
  if (it != memo.end()) return it->second;
  NodeId r = kFalse;
  const auto& a = f->args;
  switch (f->op) {
    case Op::BoolConst: r = f->value ? kTrue : kFalse; break;
    case Op::Bit:
      r = store_.lit(layout_.base(f->var, f->element) + static_cast<int>(f->value), primed || f->primed);
      break;
    case Op::Prime: r = go_bool(a[0], true); break;
    case Op::Not: r = store_.lnot(go_bool(a[0], primed)); break;
    case Op::And: r = store_.land(go_bool(a[0], primed), go_bool(a[1], primed)); break;
    case Op::Or: r = store_.lor(go_bool(a[0], primed), go_bool(a[1], primed)); break;
    case Op::Implies: r = store_.implies(go_bool(a[0], primed), go_bool(a[1], primed)); break;
    case Op::Iff: r = store_.iff(go_bool(a[0], primed), go_bool(a[1], primed)); break;
    case Op::Ite: r = store_.ite(go_bool(a[0], primed), go_bool(a[1], primed), go_bool(a[2], primed)); break;
    case Op::Eq:
    case Op::Ne: {
      if (is_bool(a[0]) && is_bool(a[1]))
        r = store_.iff(go_bool(a[0], primed), go_bool(a[1], primed));
      else
        r = equal(go_int(a[0], primed), go_int(a[1], primed));
      if (f->op == Op::Ne) r = store_.lnot(r);
      break;
    }
    case Op::Lt: r = less(go_int(a[0], primed), go_int(a[1], primed)); break;
    case Op::Gt: r = less(go_int(a[1], primed), go_int(a[0], primed)); break;
    case Op::Le: r = store_.lnot(less(go_int(a[1], primed), go_int(a[0], primed))); break;
    case Op::Ge: r = store_.lnot(less(go_int(a[0], primed), go_int(a[1], primed))); break;
    case Op::Assign: r = assign(a[0], a[1], primed); break;
    case Op::Var:
      if (is_bool(f)) {
        r = go_int(f, primed).bits[0];
        break;
      }
      [[fallthrough]];
    case Op::IntConst:
    case Op::Add:
    case Op::Sub:
    case Op::Neg: {
      // integer in boolean context: nonzero
      BitVec v = go_int(f, primed);
      r = store_.disj(v.bits);
      break;
    }
    default: fail(f, "temporal operator cannot be bitblasted");
  }
  memo.emplace(f.get(), r);
  pins_.push_back(f);
  return r;
}

BitVec Blaster::go_int(const Formula& f, bool primed) {
  auto& memo = int_memo_[primed ? 1 : 0];
  auto it = memo.find(f.get());
  if (it != memo.end()) return it->second;
  BitVec r;
  const auto& a = f->args;
  switch (f->op) {
    case Op::IntConst: r = constant(f->value); break;
    case Op::Prime: r = go_int(a[0], true); break;
    case Op::Neg: r = sub(constant(0), go_int(a[0], primed)); break;
    case Op::Add: r = add(go_int(a[0], primed), go_int(a[1], primed)); break;
    case Op::Sub: r = sub(go_int(a[0], primed), go_int(a[1], primed)); break;
    case Op::Ite: {
      NodeId c = go_bool(a[0], primed);
      BitVec t = go_int(a[1], primed), e = go_int(a[2], primed);
      int w = std::max(t.width(), e.width());
      t = extend(t, w);
      e = extend(e, w);
      for (int i = 0; i < w; ++i)
        r.bits.push_back(store_.ite(c, t.bits[static_cast<std::size_t>(i)], e.bits[static_cast<std::size_t>(i)]));
      break;
    }
    case Op::Var: {
      if (f->var < 0) fail(f, "unresolved variable");
      const VarDecl& d = symbols_.at(f->var);
      bool p = primed || f->primed;
      if (!d.is_array()) {
        if (!a.empty()) fail(f, "index on a scalar");
        r = var_bits(f->var, 0, p);
        break;
      }
      if (a.empty()) fail(f, "array used without index");
      bool ok;
      std::int64_t k = const_value(a[0], ok);
      if (ok) {
        if (k < 0 || k >= d.array_length) fail(f, "array index out of bounds");
        r = var_bits(f->var, static_cast<int>(k), p);
        break;
      }
      BitVec idx = go_int(a[0], primed);
      r = var_bits(f->var, d.array_length - 1, p);
      for (int e = d.array_length - 2; e >= 0; --e) {
        NodeId c = equal(idx, constant(e));
        BitVec t = var_bits(f->var, e, p);
        int w = std::max(t.width(), r.width());
        t = extend(t, w);
        BitVec el = extend(r, w);
        r.bits.clear();
        for (int i = 0; i < w; ++i)
          r.bits.push_back(store_.ite(c, t.bits[static_cast<std::size_t>(i)], el.bits[static_cast<std::size_t>(i)]));
      }
      break;
    }
    default:
      // boolean in integer context: a one-bit unsigned value
      r.bits = {go_bool(f, primed), kFalse};
      break;
  }
  memo.emplace(f.get(), r);
  pins_.push_back(f);
  return r;
}

NodeId Blaster::assign(const Formula& target, const Formula& value, bool primed) {
  if (target->op != Op::Var || target->var < 0) fail(target, "assignment target must be a variable");
  const VarDecl& d = symbols_.at(target->var);
  auto one = [&](int element) -> NodeId {
    int base = layout_.base(target->var, element);
    int w = layout_.width(target->var);
    if (d.domain.is_boolean()) return store_.iff(store_.lit(base, true), go_bool(value, primed));
    BitVec v = go_int(value, primed);
    if (d.domain.wraps()) {
      // truncate to the target width
      v = extend(v, w);
      NodeId acc = kTrue;
      for (int i = 0; i < w; ++i) acc = store_.land(acc, store_.iff(store_.lit(base + i, true), v.bits[static_cast<std::size_t>(i)]));
      return acc;
    }
    return equal(var_bits(target->var, element, true), v);
  };
  if (!d.is_array()) return one(0);
  bool ok;
  std::int64_t k = const_value(target->args[0], ok);
  if (ok) {
    if (k < 0 || k >= d.array_length) fail(target, "array index out of bounds");
    return one(static_cast<int>(k));
  }
  BitVec idx = go_int(target->args[0], primed);
  NodeId acc = kFalse;
  for (int e = 0; e < d.array_length; ++e) acc = store_.lor(acc, store_.land(equal(idx, constant(e)), one(e)));
  return acc;
}

NodeId Blaster::domain_constraint(int var, bool primed) {
  const VarDecl& d = symbols_.at(var);
  if (!d.domain.needs_range_constraint()) return kTrue;
  NodeId acc = kTrue;
  for (int e = 0; e < d.element_count(); ++e) {
    BitVec x = var_bits(var, e, primed);
    acc = store_.land(acc, store_.lnot(less(x, constant(d.domain.min))));
    acc = store_.land(acc, store_.lnot(less(constant(d.domain.max), x)));
  }
  return acc;
}

// ---- games ----

BitGame blast_game(const game::GameSpec& g) {
  BitGame out;
  out.layout = BitLayout(g.symbols);
  Blaster b(out.store, out.layout, g.symbols);
  out.env_bits = out.layout.bits_of(Player::Env);
  out.sys_bits = out.layout.bits_of(Player::Sys);
  auto side = [&](Player p, std::vector<NodeId>& init, std::vector<NodeId>& safety, std::vector<NodeId>& live,
                  std::vector<std::string>& tags) {
    const game::PlayerSpec& s = g.side(p);
    for (const auto& c : s.init) init.push_back(b.blast(c.formula));
    for (const auto& c : s.safety) {
      safety.push_back(b.blast(c.formula));
      tags.push_back(c.tag);
    }
    for (int v = 0; v < g.symbols.size(); ++v) {
      if (g.symbols.at(v).owner != p) continue;
      NodeId now = b.domain_constraint(v, false);
      if (now == kTrue) continue;
      init.push_back(now);
      safety.push_back(b.domain_constraint(v, true));
      tags.push_back("domain(" + g.symbols.at(v).name + ")");
    }
    for (const auto& c : s.recurrence) live.push_back(b.blast(c.formula));
    if (live.empty()) live.push_back(kTrue);
  };
  side(Player::Env, out.env_init, out.env_safety, out.env_live, out.env_safety_tags);
  side(Player::Sys, out.sys_init, out.sys_safety, out.sys_live, out.sys_safety_tags);
  for (std::size_t i = 0; i < out.env_safety.size(); ++i)
    for (const auto& [bit, primed] : out.store.literals(out.env_safety[i]))
      if (primed && out.layout.bit(bit).owner == Player::Sys)
        throw std::logic_error("env safety '" + out.env_safety_tags[i] + "' mentions primed system bit " +
                               out.layout.bit(bit).name);
  return out;
}

// ---- slugs ----

std::string emit_formula(const BitStore& store, const BitLayout& layout, NodeId root, bool buffers) {
  auto name_of = [&](int bit) {
    return bit < layout.bit_count() ? layout.bit(bit).name : "b" + std::to_string(bit);
  };
  auto compound = [&](NodeId n) {
    const auto& x = store.node(n);
    if (x.kind == BitStore::Kind::Const || x.kind == BitStore::Kind::Lit) return false;
    if (x.kind == BitStore::Kind::Not && store.is_lit_or_const(x.a)) return false;
    return true;
  };
  std::unordered_map<NodeId, int> parents;
  std::vector<NodeId> order;  // post-order
  {
    std::unordered_map<NodeId, char> seen;
    std::function<void(NodeId)> walk = [&](NodeId n) {
      if (!seen.emplace(n, 1).second) return;
      const auto& x = store.node(n);
      if (x.kind == BitStore::Kind::Not) {
        ++parents[x.a];
        walk(x.a);
      } else if (x.kind == BitStore::Kind::And || x.kind == BitStore::Kind::Or) {
        ++parents[x.a];
        walk(x.a);
        ++parents[x.b];
        walk(x.b);
      }
      order.push_back(n);
    };
    walk(root);
  }
  std::unordered_map<NodeId, int> slot;
  if (buffers)
    for (NodeId n : order)
      if (n != root && parents[n] >= 2 && compound(n)) slot.emplace(n, static_cast<int>(slot.size()));
  std::ostringstream out;
  std::function<void(NodeId, bool)> put = [&](NodeId n, bool top) {
    if (!top) {
      auto it = slot.find(n);
      if (it != slot.end()) {
        out << " ?" << it->second;
        return;
      }
    }
    const auto& x = store.node(n);
    switch (x.kind) {
      case BitStore::Kind::Const: out << ' ' << x.a; break;
      case BitStore::Kind::Lit: out << ' ' << name_of(static_cast<int>(x.a)) << (x.b ? "'" : ""); break;
      case BitStore::Kind::Not:
        out << " !";
        put(x.a, false);
        break;
      case BitStore::Kind::And:
      case BitStore::Kind::Or:
        out << (x.kind == BitStore::Kind::And ? " &" : " |");
        put(x.a, false);
        put(x.b, false);
        break;
    }
  };
  if (slot.empty()) {
    put(root, true);
  } else {
    out << " $ " << slot.size() + 1;
    std::vector<NodeId> entries(slot.size());
    for (const auto& [n, i] : slot) entries[static_cast<std::size_t>(i)] = n;
    for (NodeId n : entries) put(n, true);
    put(root, true);
  }
  return out.str().substr(1);
}

std::string emit_slugs(const BitGame& g, bool buffers) {
  std::ostringstream out;
  out << "[INPUT]\n";
  for (int b : g.env_bits) out << g.layout.bit(b).name << "\n";
  out << "\n[OUTPUT]\n";
  for (int b : g.sys_bits) out << g.layout.bit(b).name << "\n";
  auto section = [&](const char* name, const std::vector<NodeId>& fs, bool keep_true) {
    out << "\n[" << name << "]\n";
    for (NodeId f : fs) {
      if (f == kTrue && !keep_true) continue;
      out << emit_formula(g.store, g.layout, f, buffers) << "\n";
    }
  };
  section("ENV_INIT", g.env_init, false);
  section("SYS_INIT", g.sys_init, false);
  section("ENV_TRANS", g.env_safety, false);
  section("SYS_TRANS", g.sys_safety, false);
  section("ENV_LIVENESS", g.env_live, true);
  section("SYS_LIVENESS", g.sys_live, true);
  return out.str();
}

NodeId parse_formula(const std::string& line, BitStore& store, std::map<std::string, int>& names) {
  std::istringstream in(line);
  std::vector<std::string> toks;
  for (std::string t; in >> t;) toks.push_back(t);
  std::size_t pos = 0;
  std::vector<std::vector<NodeId>> frames;
  std::function<NodeId()> parse = [&]() -> NodeId {
    if (pos >= toks.size()) throw std::runtime_error("slugs: unexpected end of formula");
    const std::string t = toks[pos++];
    if (t == "&") {
      NodeId a = parse();
      return store.land(a, parse());
    }
    if (t == "|") {
      NodeId a = parse();
      return store.lor(a, parse());
    }
    if (t == "^") {
      NodeId a = parse();
      return store.lxor(a, parse());
    }
    if (t == "!") return store.lnot(parse());
    if (t == "1") return kTrue;
    if (t == "0") return kFalse;
    if (t == "$") {
      if (pos >= toks.size()) throw std::runtime_error("slugs: buffer size missing");
      int n = std::stoi(toks[pos++]);
      if (n < 1) throw std::runtime_error("slugs: empty buffer");
      frames.emplace_back();
      for (int i = 0; i < n; ++i) {
        NodeId e = parse();
        frames.back().push_back(e);
      }
      NodeId last = frames.back().back();
      frames.pop_back();
      return last;
    }
    if (t[0] == '?') {
      if (frames.empty()) throw std::runtime_error("slugs: buffer reference outside a buffer");
      auto i = static_cast<std::size_t>(std::stoi(t.substr(1)));
      if (i >= frames.back().size()) throw std::runtime_error("slugs: buffer reference ?" + std::to_string(i) + " not yet defined");
      return frames.back()[i];
    }
    bool primed = t.back() == '\'';
    std::string name = primed ? t.substr(0, t.size() - 1) : t;
    auto it = names.find(name);
    int bit;
    if (it == names.end()) {
      bit = static_cast<int>(names.size());
      names.emplace(name, bit);
    } else {
      bit = it->second;
    }
    return store.lit(bit, primed);
  };
  NodeId r = parse();
  if (pos != toks.size()) throw std::runtime_error("slugs: trailing tokens in '" + line + "'");
  return r;
}

SlugsFile parse_slugs(const std::string& text, BitStore& store, std::map<std::string, int>& names) {
  SlugsFile out;
  std::istringstream in(text);
  std::string section;
  for (std::string line; std::getline(in, line);) {
    auto start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos || line[start] == '#') continue;
    line = line.substr(start);
    while (!line.empty() && (line.back() == ' ' || line.back() == '\r')) line.pop_back();
    if (line.front() == '[') {
      section = line.substr(1, line.find(']') - 1);
      out.sections[section];
      continue;
    }
    if (section == "INPUT" || section == "OUTPUT") {
      (section == "INPUT" ? out.inputs : out.outputs).push_back(line);
      if (!names.count(line)) names.emplace(line, static_cast<int>(names.size()));
      continue;
    }
    out.sections[section].push_back(parse_formula(line, store, names));
  }
  return out;
}

bdd::Bdd BddBuilder::build(NodeId n) {
  auto it = memo_.find(n);
  if (it != memo_.end()) return it->second;
  const auto& x = store_.node(n);
  bdd::Bdd r;
  switch (x.kind) {
    case BitStore::Kind::Const: r = mgr_.constant(x.a != 0); break;
    case BitStore::Kind::Lit: r = mgr_.var((x.b ? primed_ : unprimed_)[x.a]); break;
    case BitStore::Kind::Not: r = !build(x.a); break;
    case BitStore::Kind::And: {
      bdd::Bdd a = build(x.a);
      r = a.is_false() ? a : (a & build(x.b));
      break;
    }
    case BitStore::Kind::Or: {
      bdd::Bdd a = build(x.a);
      r = a.is_true() ? a : (a | build(x.b));
      break;
    }
  }
  memo_.emplace(n, r);
  return r;
}

}  // namespace opsyn::bits
