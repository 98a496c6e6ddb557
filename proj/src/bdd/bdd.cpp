#include "opsyn/bdd/bdd.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "opsyn/diagnostics.hpp"

namespace opsyn::bdd {

namespace {
constexpr std::uint32_t kFreeVar = 0xFFFFFFFEu;
constexpr double kMaxGrowth = 1.2;
}  // namespace

// ---- handles ----

Bdd::Bdd(Manager* m, std::uint32_t node) : mgr_(m), node_(node) {
  if (mgr_) mgr_->ref(node_);
}
Bdd::Bdd(const Bdd& o) : mgr_(o.mgr_), node_(o.node_) {
  if (mgr_) mgr_->ref(node_);
}
Bdd::Bdd(Bdd&& o) noexcept : mgr_(o.mgr_), node_(o.node_) { o.mgr_ = nullptr; }
Bdd& Bdd::operator=(const Bdd& o) {
  if (this != &o) {
    if (o.mgr_) o.mgr_->ref(o.node_);
    if (mgr_) mgr_->deref(node_);
    mgr_ = o.mgr_;
    node_ = o.node_;
  }
  return *this;
}
Bdd& Bdd::operator=(Bdd&& o) noexcept {
  if (this != &o) {
    if (mgr_) mgr_->deref(node_);
    mgr_ = o.mgr_;
    node_ = o.node_;
    o.mgr_ = nullptr;
  }
  return *this;
}
Bdd::~Bdd() {
  if (mgr_) mgr_->deref(node_);
}

Bdd Bdd::operator!() const {
  mgr_->safe_point();
  return Bdd(mgr_, mgr_->not_rec(node_));
}
Bdd Bdd::operator&(const Bdd& o) const {
  mgr_->safe_point();
  return Bdd(mgr_, mgr_->apply_rec(Manager::kAnd, node_, o.node_));
}
Bdd Bdd::operator|(const Bdd& o) const {
  mgr_->safe_point();
  return Bdd(mgr_, mgr_->apply_rec(Manager::kOr, node_, o.node_));
}
Bdd Bdd::operator^(const Bdd& o) const {
  mgr_->safe_point();
  return Bdd(mgr_, mgr_->apply_rec(Manager::kXor, node_, o.node_));
}
Bdd Bdd::implies(const Bdd& o) const { return mgr_->ite(*this, o, mgr_->bdd_true()); }
Bdd Bdd::iff(const Bdd& o) const { return !(*this ^ o); }
bool Bdd::leq(const Bdd& o) const { return (*this & !o).is_false(); }

// ---- manager ----

Manager::Manager(std::size_t node_limit) : node_limit_(node_limit) {
  nodes_.push_back({kTerminalVar, 0, 0, kNil, 0});
  nodes_.push_back({kTerminalVar, 1, 1, kNil, 0});
  cache_.resize(1 << 16);
  next_reorder_ = reorder_min_;
}

Manager::~Manager() = default;

int Manager::add_var(const std::string& name, bool same_group) {
  auto v = static_cast<std::uint32_t>(names_.size());
  names_.push_back(name);
  var2level_.push_back(v);
  level2var_.push_back(v);
  group_.push_back(same_group && v > 0 ? group_.back() : v);
  Subtable t;
  t.buckets.assign(64, kNil);
  tables_.push_back(std::move(t));
  return static_cast<int>(v);
}

std::vector<int> Manager::order() const { return {level2var_.begin(), level2var_.end()}; }

Bdd Manager::bdd_true() { return Bdd(this, 1); }
Bdd Manager::bdd_false() { return Bdd(this, 0); }
Bdd Manager::var(int v) {
  safe_point();
  return Bdd(this, make_node(static_cast<std::uint32_t>(v), 0, 1));
}
Bdd Manager::nvar(int v) {
  safe_point();
  return Bdd(this, make_node(static_cast<std::uint32_t>(v), 1, 0));
}

std::uint32_t Manager::alloc_node() {
  if (node_limit_ && live_ >= node_limit_)
    throw ResourceError("BDD node limit exceeded (" + std::to_string(live_) + " live nodes)");
  std::uint32_t n;
  if (!free_.empty()) {
    n = free_.back();
    free_.pop_back();
  } else {
    n = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back({kFreeVar, 0, 0, kNil, 0});
    if (in_reorder_) iref_.push_back(0);
  }
  if (in_reorder_ && iref_.size() <= n) iref_.resize(n + 1, 0);
  if (in_reorder_) iref_[n] = 0;
  ++live_;
  stats_.peak_live_nodes = std::max(stats_.peak_live_nodes, live_);
  return n;
}

void Manager::resize_subtable(Subtable& t) {
  std::vector<std::uint32_t> old;
  old.swap(t.buckets);
  t.buckets.assign(old.size() * 2, kNil);
  std::size_t mask = t.buckets.size() - 1;
  for (std::uint32_t head : old) {
    while (head != kNil) {
      std::uint32_t next = nodes_[head].next;
      std::size_t b = hash_pair(nodes_[head].low, nodes_[head].high, mask);
      nodes_[head].next = t.buckets[b];
      t.buckets[b] = head;
      head = next;
    }
  }
}

void Manager::insert_unique(std::uint32_t n) {
  Subtable& t = tables_[nodes_[n].var];
  if (t.count + 1 > t.buckets.size() * 2) resize_subtable(t);
  std::size_t b = hash_pair(nodes_[n].low, nodes_[n].high, t.buckets.size() - 1);
  nodes_[n].next = t.buckets[b];
  t.buckets[b] = n;
  ++t.count;
}

void Manager::remove_unique(std::uint32_t n) {
  Subtable& t = tables_[nodes_[n].var];
  std::size_t b = hash_pair(nodes_[n].low, nodes_[n].high, t.buckets.size() - 1);
  std::uint32_t* p = &t.buckets[b];
  while (*p != n) p = &nodes_[*p].next;
  *p = nodes_[n].next;
  --t.count;
}

std::uint32_t Manager::make_node(std::uint32_t var, std::uint32_t low, std::uint32_t high) {
  if (low == high) return low;
  Subtable& t = tables_[var];
  std::size_t b = hash_pair(low, high, t.buckets.size() - 1);
  for (std::uint32_t n = t.buckets[b]; n != kNil; n = nodes_[n].next)
    if (nodes_[n].low == low && nodes_[n].high == high) return n;
  std::uint32_t n = alloc_node();
  nodes_[n] = {var, low, high, kNil, 0};
  insert_unique(n);
  if (in_reorder_) {
    ref_internal(low);
    ref_internal(high);
  }
  return n;
}

bool Manager::cache_get(std::uint32_t op, std::uint32_t a, std::uint32_t b, std::uint32_t c, std::uint32_t& r) {
  ++stats_.cache_lookups;
  std::uint64_t h = (op * 0x9E3779B1ull) ^ (a * 0x85EBCA77ull) ^ (b * 0xC2B2AE3Dull) ^ (c * 0x27D4EB2Full);
  const CacheEntry& e = cache_[(h ^ (h >> 17)) & (cache_.size() - 1)];
  if (e.gen == gen_ && e.op == op && e.a == a && e.b == b && e.c == c) {
    ++stats_.cache_hits;
    r = e.result;
    return true;
  }
  return false;
}

void Manager::cache_put(std::uint32_t op, std::uint32_t a, std::uint32_t b, std::uint32_t c, std::uint32_t r) {
  std::uint64_t h = (op * 0x9E3779B1ull) ^ (a * 0x85EBCA77ull) ^ (b * 0xC2B2AE3Dull) ^ (c * 0x27D4EB2Full);
  cache_[(h ^ (h >> 17)) & (cache_.size() - 1)] = {op, a, b, c, r, gen_};
}

std::uint32_t Manager::not_rec(std::uint32_t a) {
  if (a <= 1) return a ^ 1u;
  std::uint32_t r;
  if (cache_get(kNot, a, 0, 0, r)) return r;
  const Node n = nodes_[a];
  std::uint32_t lo = not_rec(n.low);
  std::uint32_t hi = not_rec(n.high);
  r = make_node(n.var, lo, hi);
  cache_put(kNot, a, 0, 0, r);
  return r;
}

std::uint32_t Manager::apply_rec(std::uint32_t op, std::uint32_t a, std::uint32_t b) {
  switch (op) {
    case kAnd:
      if (a == 0 || b == 0) return 0;
      if (a == 1) return b;
      if (b == 1 || a == b) return a;
      break;
    case kOr:
      if (a == 1 || b == 1) return 1;
      if (a == 0) return b;
      if (b == 0 || a == b) return a;
      break;
    case kXor:
      if (a == b) return 0;
      if (a == 0) return b;
      if (b == 0) return a;
      if (a == 1) return not_rec(b);
      if (b == 1) return not_rec(a);
      break;
    default: break;
  }
  if (a > b) std::swap(a, b);
  std::uint32_t r;
  if (cache_get(op, a, b, 0, r)) return r;
  std::uint32_t la = level(a), lb = level(b);
  std::uint32_t top = std::min(la, lb);
  std::uint32_t var = level2var_[top];
  std::uint32_t a0 = la == top ? nodes_[a].low : a, a1 = la == top ? nodes_[a].high : a;
  std::uint32_t b0 = lb == top ? nodes_[b].low : b, b1 = lb == top ? nodes_[b].high : b;
  std::uint32_t lo = apply_rec(op, a0, b0);
  std::uint32_t hi = apply_rec(op, a1, b1);
  r = make_node(var, lo, hi);
  cache_put(op, a, b, 0, r);
  return r;
}

std::uint32_t Manager::ite_rec(std::uint32_t f, std::uint32_t g, std::uint32_t h) {
  if (f == 1) return g;
  if (f == 0) return h;
  if (g == h) return g;
  if (g == 1 && h == 0) return f;
  if (g == 0 && h == 1) return not_rec(f);
  if (g == 1) return apply_rec(kOr, f, h);
  if (h == 0) return apply_rec(kAnd, f, g);
  std::uint32_t r;
  if (cache_get(kIte, f, g, h, r)) return r;
  std::uint32_t lf = level(f), lg = level(g), lh = level(h);
  std::uint32_t top = std::min({lf, lg, lh});
  std::uint32_t var = level2var_[top];
  auto lo_of = [&](std::uint32_t n, std::uint32_t l) { return l == top ? nodes_[n].low : n; };
  auto hi_of = [&](std::uint32_t n, std::uint32_t l) { return l == top ? nodes_[n].high : n; };
  std::uint32_t lo = ite_rec(lo_of(f, lf), lo_of(g, lg), lo_of(h, lh));
  std::uint32_t hi = ite_rec(hi_of(f, lf), hi_of(g, lg), hi_of(h, lh));
  r = make_node(var, lo, hi);
  cache_put(kIte, f, g, h, r);
  return r;
}

std::uint32_t Manager::exists_rec(std::uint32_t f, std::uint32_t cube) {
  if (f <= 1) return f;
  std::uint32_t lf = level(f);
  while (cube != 1 && level(cube) < lf) cube = nodes_[cube].high;
  if (cube == 1) return f;
  std::uint32_t r;
  if (cache_get(kExists, f, cube, 0, r)) return r;
  const Node n = nodes_[f];
  if (level(cube) == lf) {
    std::uint32_t next = nodes_[cube].high;
    std::uint32_t lo = exists_rec(n.low, next);
    if (lo == 1) {
      r = 1;
    } else {
      std::uint32_t hi = exists_rec(n.high, next);
      r = apply_rec(kOr, lo, hi);
    }
  } else {
    std::uint32_t lo = exists_rec(n.low, cube);
    std::uint32_t hi = exists_rec(n.high, cube);
    r = make_node(n.var, lo, hi);
  }
  cache_put(kExists, f, cube, 0, r);
  return r;
}

std::uint32_t Manager::and_exists_rec(std::uint32_t f, std::uint32_t g, std::uint32_t cube) {
  if (f == 0 || g == 0) return 0;
  if (f == 1 && g == 1) return 1;
  if (cube == 1) return apply_rec(kAnd, f, g);
  if (f == 1) return exists_rec(g, cube);
  if (g == 1 || f == g) return exists_rec(f, cube);
  if (f > g) std::swap(f, g);
  std::uint32_t lf = level(f), lg = level(g);
  std::uint32_t top = std::min(lf, lg);
  while (cube != 1 && level(cube) < top) cube = nodes_[cube].high;
  if (cube == 1) return apply_rec(kAnd, f, g);
  std::uint32_t r;
  if (cache_get(kAndExists, f, g, cube, r)) return r;
  std::uint32_t var = level2var_[top];
  std::uint32_t f0 = lf == top ? nodes_[f].low : f, f1 = lf == top ? nodes_[f].high : f;
  std::uint32_t g0 = lg == top ? nodes_[g].low : g, g1 = lg == top ? nodes_[g].high : g;
  if (level(cube) == top) {
    std::uint32_t next = nodes_[cube].high;
    std::uint32_t lo = and_exists_rec(f0, g0, next);
    if (lo == 1) {
      r = 1;
    } else {
      std::uint32_t hi = and_exists_rec(f1, g1, next);
      r = apply_rec(kOr, lo, hi);
    }
  } else {
    std::uint32_t lo = and_exists_rec(f0, g0, cube);
    std::uint32_t hi = and_exists_rec(f1, g1, cube);
    r = make_node(var, lo, hi);
  }
  cache_put(kAndExists, f, g, cube, r);
  return r;
}

std::uint32_t Manager::cofactor_rec(std::uint32_t f, std::uint32_t var, bool value) {
  if (f <= 1) return f;
  std::uint32_t lf = level(f), lv = var2level_[var];
  if (lf > lv) return f;
  if (lf == lv) return value ? nodes_[f].high : nodes_[f].low;
  std::uint32_t op = value ? kCofactor1 : kCofactor0;
  std::uint32_t r;
  if (cache_get(op, f, var, 0, r)) return r;
  const Node n = nodes_[f];
  std::uint32_t lo = cofactor_rec(n.low, var, value);
  std::uint32_t hi = cofactor_rec(n.high, var, value);
  r = make_node(n.var, lo, hi);
  cache_put(op, f, var, 0, r);
  return r;
}

std::uint32_t Manager::cube_node(const std::vector<int>& vars) {
  std::vector<int> sorted(vars);
  std::sort(sorted.begin(), sorted.end(), [&](int a, int b) { return level_of(a) > level_of(b); });
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::uint32_t acc = 1;
  for (int v : sorted) acc = make_node(static_cast<std::uint32_t>(v), 0, acc);
  return acc;
}

Bdd Manager::ite(const Bdd& f, const Bdd& g, const Bdd& h) {
  safe_point();
  return Bdd(this, ite_rec(f.node(), g.node(), h.node()));
}

Bdd Manager::cube(const std::vector<int>& vars) {
  safe_point();
  return Bdd(this, cube_node(vars));
}

Bdd Manager::exists(const std::vector<int>& vars, const Bdd& f) {
  safe_point();
  if (vars.empty()) return f;
  Bdd c(this, cube_node(vars));
  return Bdd(this, exists_rec(f.node(), c.node()));
}

Bdd Manager::forall(const std::vector<int>& vars, const Bdd& f) { return !exists(vars, !f); }

Bdd Manager::and_exists(const Bdd& f, const Bdd& g, const std::vector<int>& vars) {
  safe_point();
  Bdd c(this, cube_node(vars));
  return Bdd(this, and_exists_rec(f.node(), g.node(), c.node()));
}

Bdd Manager::rename(const Bdd& f, const std::vector<int>& map) {
  safe_point();
  std::unordered_map<std::uint32_t, std::uint32_t> memo;
  std::function<std::uint32_t(std::uint32_t)> rec = [&](std::uint32_t n) -> std::uint32_t {
    if (n <= 1) return n;
    auto it = memo.find(n);
    if (it != memo.end()) return it->second;
    const Node node = nodes_[n];
    std::uint32_t lo = rec(node.low);
    std::uint32_t hi = rec(node.high);
    std::uint32_t v = node.var;
    if (v < map.size() && map[v] >= 0) v = static_cast<std::uint32_t>(map[v]);
    std::uint32_t r;
    std::uint32_t lv = var2level_[v];
    if (lv < level(lo) && lv < level(hi))
      r = make_node(v, lo, hi);
    else
      r = ite_rec(make_node(v, 0, 1), hi, lo);
    memo.emplace(n, r);
    return r;
  };
  return Bdd(this, rec(f.node()));
}

Bdd Manager::cofactor(const Bdd& f, int v, bool value) {
  safe_point();
  return Bdd(this, cofactor_rec(f.node(), static_cast<std::uint32_t>(v), value));
}

int Manager::top_var(const Bdd& f) const {
  return f.node() <= 1 ? -1 : static_cast<int>(nodes_[f.node()].var);
}

Bdd Manager::restrict(const Bdd& f, const std::vector<int>& vars, const std::vector<char>& values) {
  safe_point();
  std::vector<int> value_of(names_.size(), -1);
  for (std::size_t i = 0; i < vars.size(); ++i) value_of[static_cast<std::size_t>(vars[i])] = values[i] ? 1 : 0;
  std::unordered_map<std::uint32_t, std::uint32_t> memo;
  std::function<std::uint32_t(std::uint32_t)> rec = [&](std::uint32_t n) -> std::uint32_t {
    if (n <= 1) return n;
    auto it = memo.find(n);
    if (it != memo.end()) return it->second;
    const Node node = nodes_[n];
    std::uint32_t r;
    int v = value_of[node.var];
    if (v >= 0) {
      r = rec(v ? node.high : node.low);
    } else {
      std::uint32_t lo = rec(node.low);
      std::uint32_t hi = rec(node.high);
      r = make_node(node.var, lo, hi);
    }
    memo.emplace(n, r);
    return r;
  };
  return Bdd(this, rec(f.node()));
}

bool Manager::eval(const Bdd& f, const std::vector<char>& assignment) const {
  std::uint32_t n = f.node();
  while (n > 1) n = assignment[nodes_[n].var] ? nodes_[n].high : nodes_[n].low;
  return n == 1;
}

std::vector<int> Manager::support(const Bdd& f) const {
  std::vector<char> seen_var(names_.size(), 0);
  std::unordered_map<std::uint32_t, char> seen;
  std::vector<std::uint32_t> stack{f.node()};
  while (!stack.empty()) {
    std::uint32_t n = stack.back();
    stack.pop_back();
    if (n <= 1 || !seen.emplace(n, 1).second) continue;
    seen_var[nodes_[n].var] = 1;
    stack.push_back(nodes_[n].low);
    stack.push_back(nodes_[n].high);
  }
  std::vector<int> out;
  for (std::size_t v = 0; v < seen_var.size(); ++v)
    if (seen_var[v]) out.push_back(static_cast<int>(v));
  return out;
}

std::size_t Manager::node_count(const Bdd& f) const { return node_count(std::vector<Bdd>{f}); }

std::size_t Manager::node_count(const std::vector<Bdd>& fs) const {
  std::unordered_map<std::uint32_t, char> seen;
  std::vector<std::uint32_t> stack;
  for (const auto& f : fs) stack.push_back(f.node());
  while (!stack.empty()) {
    std::uint32_t n = stack.back();
    stack.pop_back();
    if (!seen.emplace(n, 1).second) continue;
    if (n > 1) {
      stack.push_back(nodes_[n].low);
      stack.push_back(nodes_[n].high);
    }
  }
  return seen.size();
}

double Manager::sat_count(const Bdd& f, int nvars) const {
  std::unordered_map<std::uint32_t, double> memo;
  std::function<double(std::uint32_t)> rec = [&](std::uint32_t n) -> double {
    if (n <= 1) return n;
    auto it = memo.find(n);
    if (it != memo.end()) return it->second;
    double p = 0.5 * (rec(nodes_[n].low) + rec(nodes_[n].high));
    memo.emplace(n, p);
    return p;
  };
  return rec(f.node()) * std::ldexp(1.0, nvars);
}

void Manager::for_each_sat(const Bdd& f, const std::vector<int>& vars,
                           const std::function<bool(const std::vector<char>&)>& fn) const {
  std::vector<int> idx(vars.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    return level_of(vars[static_cast<std::size_t>(a)]) < level_of(vars[static_cast<std::size_t>(b)]);
  });
  std::vector<char> values(vars.size(), 0);
  bool stop = false;
  // enumerate in level order, with each level's variable trying false first
  std::function<void(std::uint32_t, std::size_t)> rec = [&](std::uint32_t n, std::size_t k) {
    if (stop || n == 0) return;
    if (k == idx.size()) {
      if (n != 1) throw std::logic_error("for_each_sat: function depends on variables outside the set");
      if (!fn(values)) stop = true;
      return;
    }
    auto slot = static_cast<std::size_t>(idx[k]);
    std::uint32_t lv = static_cast<std::uint32_t>(level_of(vars[slot]));
    std::uint32_t ln = level(n);
    if (ln < lv) throw std::logic_error("for_each_sat: function depends on variables outside the set");
    for (char b = 0; b < 2; ++b) {
      values[slot] = b;
      std::uint32_t child = ln == lv ? (b ? nodes_[n].high : nodes_[n].low) : n;
      rec(child, k + 1);
    }
    values[slot] = 0;
  };
  rec(f.node(), 0);
}

std::vector<char> Manager::pick_min(const Bdd& f, const std::vector<int>& vars) const {
  // Greedy in the given variable order: a value is kept if some completion exists.
  auto* self = const_cast<Manager*>(this);
  Bdd cur = f;
  std::vector<char> out(vars.size(), 0);
  for (std::size_t i = 0; i < vars.size(); ++i) {
    Bdd lo = self->cofactor(cur, vars[i], false);
    if (!lo.is_false()) {
      cur = lo;
      out[i] = 0;
    } else {
      cur = self->cofactor(cur, vars[i], true);
      out[i] = 1;
    }
  }
  return out;
}

std::string Manager::to_dot(const std::vector<Bdd>& roots, const std::vector<std::string>& names) const {
  std::ostringstream out;
  out << "digraph bdd {\n";
  std::unordered_map<std::uint32_t, char> seen;
  std::vector<std::uint32_t> stack;
  for (std::size_t i = 0; i < roots.size(); ++i) {
    std::string label = i < names.size() ? names[i] : "f" + std::to_string(i);
    out << "  r" << i << " [shape=plaintext, label=\"" << label << "\"];\n";
    out << "  r" << i << " -> n" << roots[i].node() << ";\n";
    stack.push_back(roots[i].node());
  }
  while (!stack.empty()) {
    std::uint32_t n = stack.back();
    stack.pop_back();
    if (!seen.emplace(n, 1).second) continue;
    if (n <= 1) {
      out << "  n" << n << " [shape=box, label=\"" << n << "\"];\n";
      continue;
    }
    out << "  n" << n << " [label=\"" << names_[nodes_[n].var] << "\"];\n";
    out << "  n" << n << " -> n" << nodes_[n].low << " [style=dashed];\n";
    out << "  n" << n << " -> n" << nodes_[n].high << ";\n";
    stack.push_back(nodes_[n].low);
    stack.push_back(nodes_[n].high);
  }
  out << "}\n";
  return out.str();
}

// ---- garbage collection ----

void Manager::safe_point() {
  if (in_reorder_) return;
  if (policy_ == ReorderPolicy::Auto && live_ >= next_reorder_) {
    collect();
    if (live_ >= next_reorder_) {
      reorder();
      return;
    }
  }
  if (live_ > gc_threshold_) collect();
}

void Manager::gc() { collect(); }

void Manager::collect() {
  std::vector<char> mark(nodes_.size(), 0);
  mark[0] = mark[1] = 1;
  std::vector<std::uint32_t> stack;
  for (std::uint32_t n = 2; n < nodes_.size(); ++n)
    if (nodes_[n].var != kFreeVar && nodes_[n].ext > 0) stack.push_back(n);
  while (!stack.empty()) {
    std::uint32_t n = stack.back();
    stack.pop_back();
    if (mark[n]) continue;
    mark[n] = 1;
    stack.push_back(nodes_[n].low);
    stack.push_back(nodes_[n].high);
  }
  live_ = 0;
  for (auto& t : tables_) {
    t.count = 0;
    for (auto& head : t.buckets) {
      std::uint32_t* p = &head;
      while (*p != kNil) {
        std::uint32_t n = *p;
        if (mark[n]) {
          ++t.count;
          ++live_;
          p = &nodes_[n].next;
        } else {
          *p = nodes_[n].next;
          nodes_[n].var = kFreeVar;
          free_.push_back(n);
        }
      }
    }
  }
  ++gen_;
  ++stats_.gc_runs;
  gc_threshold_ = std::max<std::size_t>(1 << 18, 2 * live_);
  std::size_t want = 1 << 16;
  while (want < live_ && want < (1u << 22)) want <<= 1;
  if (want > cache_.size()) cache_.assign(want, CacheEntry{});
}

// ---- reordering ----

void Manager::reorder_begin() {
  collect();
  in_reorder_ = true;
  iref_.assign(nodes_.size(), 0);
  for (std::uint32_t n = 2; n < nodes_.size(); ++n) {
    if (nodes_[n].var == kFreeVar) continue;
    iref_[n] += nodes_[n].ext;
    ref_internal(nodes_[n].low);
    ref_internal(nodes_[n].high);
  }
}

void Manager::reorder_end() {
  in_reorder_ = false;
  iref_.clear();
  iref_.shrink_to_fit();
  ++gen_;
}

void Manager::deref_internal(std::uint32_t n) {
  std::vector<std::uint32_t> stack{n};
  while (!stack.empty()) {
    std::uint32_t m = stack.back();
    stack.pop_back();
    if (m <= 1) continue;
    if (--iref_[m] != 0) continue;
    remove_unique(m);
    stack.push_back(nodes_[m].low);
    stack.push_back(nodes_[m].high);
    nodes_[m].var = kFreeVar;
    free_.push_back(m);
    --live_;
  }
}

void Manager::swap_levels(std::uint32_t l) {
  std::uint32_t x = level2var_[l], y = level2var_[l + 1];
  ++stats_.reorder_swaps;
  Subtable& tx = tables_[x];
  std::vector<std::uint32_t> moving;
  for (auto& head : tx.buckets) {
    std::uint32_t* p = &head;
    while (*p != kNil) {
      std::uint32_t n = *p;
      if (nodes_[nodes_[n].low].var == y || nodes_[nodes_[n].high].var == y) {
        *p = nodes_[n].next;
        --tx.count;
        moving.push_back(n);
      } else {
        p = &nodes_[n].next;
      }
    }
  }
  // levels swap first so that new x nodes are created below y
  std::swap(level2var_[l], level2var_[l + 1]);
  var2level_[x] = l + 1;
  var2level_[y] = l;
  for (std::uint32_t n : moving) {
    std::uint32_t f1 = nodes_[n].high, f0 = nodes_[n].low;
    std::uint32_t f11 = f1, f10 = f1, f01 = f0, f00 = f0;
    if (nodes_[f1].var == y) {
      f11 = nodes_[f1].high;
      f10 = nodes_[f1].low;
    }
    if (nodes_[f0].var == y) {
      f01 = nodes_[f0].high;
      f00 = nodes_[f0].low;
    }
    std::uint32_t hi = make_node(x, f01, f11);
    ref_internal(hi);
    std::uint32_t lo = make_node(x, f00, f10);
    ref_internal(lo);
    deref_internal(f1);
    deref_internal(f0);
    nodes_[n].var = y;
    nodes_[n].low = lo;
    nodes_[n].high = hi;
    insert_unique(n);
  }
}

std::size_t Manager::sift_groups() {
  std::size_t moves = 0;
  struct Block {
    std::uint32_t group;
    std::uint32_t size;
  };
  auto blocks_now = [&]() {
    std::vector<Block> blocks;
    for (std::uint32_t l = 0; l < level2var_.size(); ++l) {
      std::uint32_t g = group_[level2var_[l]];
      if (!blocks.empty() && blocks.back().group == g)
        ++blocks.back().size;
      else
        blocks.push_back({g, 1});
    }
    return blocks;
  };
  std::vector<Block> blocks = blocks_now();
  auto start_of = [&](std::size_t i) {
    std::uint32_t s = 0;
    for (std::size_t k = 0; k < i; ++k) s += blocks[k].size;
    return s;
  };
  // exchange block i with block i+1
  auto exchange = [&](std::size_t i) {
    std::uint32_t a = start_of(i);
    std::uint32_t s1 = blocks[i].size, s2 = blocks[i + 1].size;
    for (std::uint32_t j = 0; j < s2; ++j)
      for (std::uint32_t k = 0; k < s1; ++k) swap_levels(a + s1 + j - 1 - k);
    std::swap(blocks[i], blocks[i + 1]);
    ++moves;
  };
  // sift larger groups first
  std::vector<std::pair<std::size_t, std::uint32_t>> order;
  for (const auto& b : blocks) {
    std::size_t count = 0;
    for (std::uint32_t v = 0; v < group_.size(); ++v)
      if (group_[v] == b.group) count += tables_[v].count;
    order.push_back({count, b.group});
  }
  std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (const auto& [count, g] : order) {
    if (count == 0) continue;
    std::size_t pos = 0;
    while (blocks[pos].group != g) ++pos;
    std::size_t best = live_, best_pos = pos;
    std::size_t n = blocks.size();
    bool down_first = pos >= n / 2;  // go to the nearer end first
    for (int phase = 0; phase < 2; ++phase) {
      bool down = phase == 0 ? down_first : !down_first;
      if (down) {
        while (pos + 1 < n) {
          exchange(pos);
          ++pos;
          if (live_ < best) {
            best = live_;
            best_pos = pos;
          }
          if (static_cast<double>(live_) > kMaxGrowth * static_cast<double>(best)) break;
        }
      } else {
        while (pos > 0) {
          exchange(pos - 1);
          --pos;
          if (live_ < best) {
            best = live_;
            best_pos = pos;
          }
          if (static_cast<double>(live_) > kMaxGrowth * static_cast<double>(best)) break;
        }
      }
    }
    while (pos < best_pos) {
      exchange(pos);
      ++pos;
    }
    while (pos > best_pos) {
      exchange(pos - 1);
      --pos;
    }
  }
  return moves;
}

ReorderResult Manager::reorder() {
  ReorderResult r;
  if (in_reorder_) return r;
  reorder_begin();
  r.nodes_before = live_;
  if (names_.size() > 1) r.moves = sift_groups();
  r.nodes_after = live_;
  reorder_end();
  ++stats_.reorder_runs;
  next_reorder_ = std::max(reorder_min_, static_cast<std::size_t>(reorder_factor_ * static_cast<double>(live_)));
  return r;
}

void Manager::shuffle_to(const std::vector<int>& target) {
  if (target.size() != level2var_.size()) throw std::invalid_argument("shuffle_to: order size mismatch");
  reorder_begin();
  for (std::uint32_t l = 0; l < target.size(); ++l) {
    std::uint32_t cur = var2level_[static_cast<std::uint32_t>(target[l])];
    while (cur > l) {
      swap_levels(cur - 1);
      --cur;
    }
  }
  reorder_end();
}

}  // namespace opsyn::bdd
