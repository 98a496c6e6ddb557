#include <cstdlib>
#include <random>

#include "doctest.h"
#include "opsyn/bdd/bdd.hpp"

using namespace opsyn::bdd;

namespace {

// BDD of the function given by a truth table over vars (bit i of row = var i)
Bdd from_table(Manager& m, const std::vector<int>& vars, std::uint32_t table) {
  Bdd acc = m.bdd_false();
  for (std::uint32_t row = 0; row < (1u << vars.size()); ++row) {
    if (!((table >> row) & 1)) continue;
    Bdd cube = m.bdd_true();
    for (std::size_t i = 0; i < vars.size(); ++i) cube &= ((row >> i) & 1) ? m.var(vars[i]) : m.nvar(vars[i]);
    acc |= cube;
  }
  return acc;
}

std::vector<char> assignment(Manager& m, std::uint32_t row, const std::vector<int>& vars) {
  std::vector<char> a(static_cast<std::size_t>(m.var_count()), 0);
  for (std::size_t i = 0; i < vars.size(); ++i) a[static_cast<std::size_t>(vars[i])] = (row >> i) & 1;
  return a;
}

}  // namespace

TEST_CASE("contradiction and identity") {
  Manager m;
  int x = m.add_var("x");
  CHECK((m.var(x) & m.nvar(x)).is_false());
  Bdd a = m.var(x);
  CHECK((a | m.bdd_false()) == a);
}

TEST_CASE("and over random 4-variable functions matches truth tables") {
  Manager m;
  std::vector<int> vars;
  for (int i = 0; i < 4; ++i) vars.push_back(m.add_var("v" + std::to_string(i)));
  std::mt19937 rng(11);
  for (int t = 0; t < 8; ++t) {
    std::uint32_t ta = rng() & 0xFFFF, tb = rng() & 0xFFFF;
    Bdd a = from_table(m, vars, ta), b = from_table(m, vars, tb);
    CHECK((a & b) == from_table(m, vars, ta & tb));
    CHECK((a | b) == from_table(m, vars, ta | tb));
    CHECK((a ^ b) == from_table(m, vars, ta ^ tb));
    CHECK(a.implies(b) == from_table(m, vars, (~ta | tb) & 0xFFFF));
    for (std::uint32_t row = 0; row < 16; ++row) CHECK(m.eval(a & b, assignment(m, row, vars)) == (((ta & tb) >> row) & 1));
  }
}

TEST_CASE("canonicity: equal functions share a node") {
  Manager m;
  std::vector<int> vars;
  for (int i = 0; i < 3; ++i) vars.push_back(m.add_var("v" + std::to_string(i)));
  for (std::uint32_t t = 0; t < 256; ++t) {
    Bdd a = from_table(m, vars, t);
    // built differently: via double negation and shannon expansion on v0
    Bdd hi = m.cofactor(a, vars[0], true), lo = m.cofactor(a, vars[0], false);
    Bdd b = !(!m.ite(m.var(vars[0]), hi, lo));
    CHECK(a.node() == b.node());
  }
}

TEST_CASE("existential quantification") {
  Manager m;
  int xt = m.add_var("xt"), xtp = m.add_var("xt'", true), y = m.add_var("y"), yp = m.add_var("y'", true);
  (void)y;
  Bdd f = m.var(xt) & m.var(xtp) & m.var(yp);
  CHECK(m.exists({yp}, f) == (m.var(xt) & m.var(xtp)));
  CHECK(m.exists({}, f) == f);
  CHECK(m.exists({xt, xtp, y, yp}, f).is_true());
  CHECK(m.exists({xt, xtp, y, yp}, m.bdd_false()).is_false());
  CHECK(f.leq(m.exists({xt}, f)));
}

TEST_CASE("quantifier duality and and_exists") {
  Manager m;
  std::vector<int> vars;
  for (int i = 0; i < 5; ++i) vars.push_back(m.add_var("v" + std::to_string(i)));
  std::mt19937 rng(3);
  for (int t = 0; t < 20; ++t) {
    Bdd f = m.bdd_false(), g = m.bdd_false();
    for (int k = 0; k < 6; ++k) {
      f |= m.var(vars[rng() % 5]) & m.nvar(vars[rng() % 5]);
      g |= m.var(vars[rng() % 5]) ^ m.var(vars[rng() % 5]);
    }
    std::vector<int> q{vars[1], vars[3]};
    CHECK(m.forall(q, f) == !m.exists(q, !f));
    CHECK(m.and_exists(f, g, q) == m.exists(q, f & g));
  }
}

TEST_CASE("renaming primes and unprimes") {
  Manager m;
  std::vector<int> cur, next;
  for (int i = 0; i < 3; ++i) {
    cur.push_back(m.add_var("b" + std::to_string(i)));
    next.push_back(m.add_var("b" + std::to_string(i) + "'", true));
  }
  std::vector<int> prime(static_cast<std::size_t>(m.var_count()), -1), unprime = prime;
  for (int i = 0; i < 3; ++i) {
    prime[static_cast<std::size_t>(cur[static_cast<std::size_t>(i)])] = next[static_cast<std::size_t>(i)];
    unprime[static_cast<std::size_t>(next[static_cast<std::size_t>(i)])] = cur[static_cast<std::size_t>(i)];
  }
  CHECK(m.rename(m.var(next[0]), unprime) == m.var(cur[0]));
  // the guard test substitution x' -> x on x' & y
  CHECK(m.rename(m.var(next[0]) & m.var(cur[1]), unprime) == (m.var(cur[0]) & m.var(cur[1])));
  std::mt19937 rng(5);
  for (int t = 0; t < 20; ++t) {
    Bdd f = m.bdd_false();
    for (int k = 0; k < 4; ++k) f |= m.var(cur[rng() % 3]) & m.nvar(cur[rng() % 3]);
    CHECK(m.rename(m.rename(f, prime), unprime) == f);
  }
}

TEST_CASE("sifting shrinks the separated pairwise equivalence") {
  Manager m;
  std::vector<int> x;
  for (int i = 0; i < 6; ++i) x.push_back(m.add_var("x" + std::to_string(i)));
  // x0 x1 x2 then x3 x4 x5: pairs (0,3) (1,4) (2,5) are far apart
  Bdd f = m.var(x[0]).iff(m.var(x[3])) & m.var(x[1]).iff(m.var(x[4])) & m.var(x[2]).iff(m.var(x[5]));
  std::size_t before = m.node_count(f);
  std::mt19937 rng(9);
  std::vector<std::vector<char>> samples;
  std::vector<bool> values;
  for (int i = 0; i < 200; ++i) {
    std::vector<char> a(6);
    for (auto& b : a) b = rng() & 1;
    samples.push_back(a);
    values.push_back(m.eval(f, a));
  }
  auto r = m.reorder();
  CHECK(r.nodes_after <= r.nodes_before);
  CHECK(m.node_count(f) < before);
  for (std::size_t i = 0; i < samples.size(); ++i) CHECK(m.eval(f, samples[i]) == values[i]);
}

TEST_CASE("reordering keeps groups adjacent and preserves functions") {
  Manager m;
  std::vector<int> cur, next;
  for (int i = 0; i < 6; ++i) {
    cur.push_back(m.add_var("b" + std::to_string(i)));
    next.push_back(m.add_var("b" + std::to_string(i) + "'", true));
  }
  std::mt19937 rng(17);
  std::vector<Bdd> fs;
  for (int t = 0; t < 10; ++t) {
    Bdd f = m.bdd_true();
    for (int k = 0; k < 4; ++k) f &= m.var(cur[rng() % 6]) | m.var(next[rng() % 6]) | m.nvar(cur[rng() % 6]);
    fs.push_back(f);
  }
  std::vector<std::vector<char>> samples;
  std::vector<std::vector<bool>> values;
  for (int i = 0; i < 1000; ++i) {
    std::vector<char> a(static_cast<std::size_t>(m.var_count()));
    for (auto& b : a) b = rng() & 1;
    samples.push_back(a);
    std::vector<bool> v;
    for (const auto& f : fs) v.push_back(m.eval(f, a));
    values.push_back(v);
  }
  m.shuffle_to({next[5], cur[5], cur[0], next[0], cur[3], next[3], cur[1], next[1], cur[2], next[2], cur[4], next[4]});
  m.reorder();
  for (std::size_t i = 0; i < 6; ++i) CHECK(std::abs(m.level_of(next[i]) - m.level_of(cur[i])) == 1);
  for (std::size_t i = 0; i < samples.size(); ++i)
    for (std::size_t k = 0; k < fs.size(); ++k) CHECK(m.eval(fs[k], samples[i]) == values[i][k]);
}

TEST_CASE("single variable manager keeps its order") {
  Manager m;
  int v = m.add_var("only");
  Bdd f = m.var(v);
  m.reorder();
  CHECK(m.order() == std::vector<int>{v});
  CHECK(m.eval(f, {1}));
}

TEST_CASE("auto policy reorders, off policy does not") {
  for (auto policy : {ReorderPolicy::Off, ReorderPolicy::Auto}) {
    Manager m;
    m.set_reorder_policy(policy);
    m.set_reorder_threshold(64);
    std::vector<int> x;
    for (int i = 0; i < 16; ++i) x.push_back(m.add_var("x" + std::to_string(i)));
    Bdd f = m.bdd_true();
    for (int i = 0; i < 8; ++i) f &= m.var(x[static_cast<std::size_t>(i)]).iff(m.var(x[static_cast<std::size_t>(i + 8)]));
    if (policy == ReorderPolicy::Off)
      CHECK(m.stats().reorder_runs == 0);
    else
      CHECK(m.stats().reorder_runs > 0);
  }
}

TEST_CASE("node limit raises a resource error") {
  Manager m(200);
  std::vector<int> x;
  for (int i = 0; i < 24; ++i) x.push_back(m.add_var("x" + std::to_string(i)));
  auto build = [&] {
    Bdd f = m.bdd_true();
    for (int i = 0; i < 12; ++i) f &= m.var(x[static_cast<std::size_t>(i)]).iff(m.var(x[static_cast<std::size_t>(i + 12)]));
    return f;
  };
  CHECK_THROWS(build());
}

TEST_CASE("satisfying assignments and minimal picks") {
  Manager m;
  std::vector<int> v;
  for (int i = 0; i < 3; ++i) v.push_back(m.add_var("v" + std::to_string(i)));
  Bdd f = m.var(v[0]) | m.var(v[2]);
  int count = 0;
  m.for_each_sat(f, v, [&](const std::vector<char>& a) {
    CHECK((a[0] || a[2]));
    ++count;
    return true;
  });
  CHECK(count == 6);
  CHECK(m.sat_count(f, 3) == doctest::Approx(6.0));
  auto pick = m.pick_min(f, v);
  CHECK(pick == std::vector<char>{0, 0, 1});
}
