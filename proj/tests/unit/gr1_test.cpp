#include <random>

#include "doctest.h"
#include "opsyn/gr1/solver.hpp"
#include "opsyn/gr1/transducer.hpp"
#include "oracle.hpp"

using namespace opsyn;
using oracle::Values;

namespace {

bool realizable(const bits::BitGame& g) {
  gr1::Solver s(g);
  return s.solve();
}

// copy of a game with one more safety conjunct for `side`
bits::BitGame with_safety(const bits::BitGame& g, bool sys, std::mt19937_64& rng) {
  bits::BitGame h = g;
  auto& bits = sys ? h.sys_bits : h.env_bits;
  int a = bits[rng() % bits.size()];
  int b = h.layout.bit_count() > 0 ? static_cast<int>(rng() % static_cast<std::uint64_t>(h.layout.bit_count())) : a;
  auto f = h.store.lor(h.store.lit(a, true), rng() % 2 ? h.store.lit(b, false) : h.store.lnot(h.store.lit(b, false)));
  (sys ? h.sys_safety : h.env_safety).push_back(f);
  (sys ? h.sys_safety_tags : h.env_safety_tags).push_back("extra");
  return h;
}

}  // namespace

TEST_CASE("false system init is unrealizable") {
  auto c = oracle::compile("free sys bool y; assert ltl { y && !y }");
  CHECK(!realizable(c.game));
}

TEST_CASE("copying the input is realizable and the strategy copies") {
  auto c = oracle::compile("free env bool x; free sys bool y; assert ltl { [] (y' <-> x') }");
  gr1::Solver solver(c.game);
  REQUIRE(solver.solve());
  solver.build_strategies();
  solver.combine();
  auto t = gr1::enumerate(solver, 1000);
  CHECK(t.complete);
  auto r = oracle::check_transducer(
      t, c.game, c.tr.game.symbols, [](const Values&, const Values& n) { return n.at("y") == n.at("x"); }, {},
      [](const Values&) { return true; });
  CHECK(r.safe);
  CHECK(r.dead_ends == 0);
  auto sim = gr1::simulate(solver, 1, 50);
  CHECK(sim.sys_safety_violations == 0);
  for (std::size_t i = 1; i < sim.trace.size(); ++i) {
    auto v = gr1::decode(c.game.layout, c.tr.game.symbols, sim.trace[i].bits);
    CHECK(v.at("y") == v.at("x"));
  }
}

TEST_CASE("two opposite goals are visited in turn") {
  auto c = oracle::compile("free sys bool a; assert ltl { []<> a && []<> !a }");
  gr1::Solver solver(c.game);
  REQUIRE(solver.solve());
  solver.build_strategies();
  solver.combine();
  CHECK(solver.goal_count() == 2);
  auto sim = gr1::simulate(solver, 3, 40);
  REQUIRE(sim.sys_goal_hits.size() == 2);
  CHECK(sim.sys_goal_hits[0] >= 10);
  CHECK(sim.sys_goal_hits[1] >= 10);
}

TEST_CASE("bunny strategy avoids the fox and reaches the carrot") {
  auto c = oracle::compile(oracle::read_file(OPSYN_SOURCE_DIR "/models/bunny.pml"));
  gr1::Solver solver(c.game);
  REQUIRE(solver.solve());
  solver.build_strategies();
  solver.combine();
  auto t = gr1::enumerate(solver, 100000);
  REQUIRE(t.complete);
  auto r = oracle::check_transducer(
      t, c.game, c.tr.game.symbols,
      [](const Values& cur, const Values& next) {
        return !(cur.at("x") == next.at("xt") && cur.at("y") == next.at("yt"));
      },
      {[](const Values& v) { return v.at("yt") == 0; }},
      [](const Values& v) { return v.at("x") == 3 && v.at("y") == 3; });
  INFO(r.why);
  CHECK(r.safe);
  CHECK(r.live);
  CHECK(r.dead_ends == 0);
}

TEST_CASE("bunny survives long random runs") {
  auto c = oracle::compile(oracle::read_file(OPSYN_SOURCE_DIR "/models/bunny.pml"));
  gr1::Solver solver(c.game);
  REQUIRE(solver.solve());
  solver.build_strategies();
  solver.combine();
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto sim = gr1::simulate(solver, seed, 200);
    CHECK(sim.sys_safety_violations == 0);
    CHECK(!sim.driver_error);
    CHECK(sim.trace.size() == 201);
  }
}

TEST_CASE("a driver that breaks the assumptions is flagged") {
  auto c = oracle::compile(oracle::read_file(OPSYN_SOURCE_DIR "/models/bunny.pml"));
  gr1::Solver solver(c.game);
  REQUIRE(solver.solve());
  solver.build_strategies();
  solver.combine();
  // all ones puts xt outside int(1, 2)
  auto sim = gr1::simulate(solver, 1, 10, [&](const gr1::Valuation&, int) {
    return std::vector<char>(c.game.env_bits.size(), 1);
  });
  CHECK(sim.driver_error);
}

TEST_CASE("symbolic and explicit solutions agree on random games") {
  std::mt19937_64 rng(2024);
  int agree = 0, yes = 0;
  for (int i = 0; i < 60; ++i) {
    int nx = 1 + static_cast<int>(rng() % 3), ny = 1 + static_cast<int>(rng() % 3);
    auto g = oracle::random_game(rng, nx, ny);
    bool sym = realizable(g), ex = oracle::explicit_realizable(g);
    agree += sym == ex;
    yes += sym;
  }
  CHECK(agree == 60);
  CHECK(yes > 0);
  CHECK(yes < 60);
}

TEST_CASE("realizability is monotone in the safety constraints") {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 40; ++i) {
    auto g = oracle::random_game(rng, 2, 2);
    bool base = realizable(g);
    auto harder = with_safety(g, true, rng);
    auto easier = with_safety(g, false, rng);
    if (realizable(harder)) CHECK(base);
    if (base) CHECK(realizable(easier));
  }
}

TEST_CASE("combined strategy is sound and complete on the winning region") {
  std::mt19937_64 rng(5);
  int checked = 0;
  for (int i = 0; i < 40 && checked < 10; ++i) {
    auto g = oracle::random_game(rng, 2, 2);
    gr1::Solver s(g);
    if (!s.solve()) continue;
    s.build_strategies();
    s.combine();
    ++checked;
    auto& m = s.manager();
    const auto& rel = s.strategy();
    CHECK(rel.leq(s.sys_trans()));
    CHECK(rel.leq(s.prime(s.winning())));
    std::vector<int> reply = s.y_next();
    reply.insert(reply.end(), s.mem_next_vars().begin(), s.mem_next_vars().end());
    bdd::Bdd answered = m.exists(reply, rel);
    for (int j = 0; j < s.goal_count(); ++j) {
      bdd::Bdd need = s.winning() & s.mem_is(j, false) & s.env_trans();
      CHECK(need.leq(answered));
    }
  }
  CHECK(checked > 0);
}

TEST_CASE("statistics table has the documented header") {
  auto c = oracle::compile(oracle::read_file(OPSYN_SOURCE_DIR "/models/bunny.pml"));
  gr1::Solver solver(c.game);
  solver.solve();
  solver.build_strategies();
  solver.combine();
  auto csv = solver.stats_csv();
  CHECK(csv.rfind("phase,seconds,peak_nodes,live_nodes,reorders,iterations\n", 0) == 0);
  for (const char* phase : {"build", "winning_region", "goal_strategies", "combine"}) CHECK(csv.find(phase) != std::string::npos);
}

TEST_CASE("truncated enumeration falls back to a summary") {
  auto c = oracle::compile(oracle::read_file(OPSYN_SOURCE_DIR "/models/bunny.pml"));
  gr1::Solver solver(c.game);
  REQUIRE(solver.solve());
  solver.build_strategies();
  solver.combine();
  auto t = gr1::enumerate(solver, 3);
  CHECK(!t.complete);
  CHECK(t.states.size() <= 3);
  CHECK(!gr1::symbolic_summary(solver, t).empty());
  auto full = gr1::enumerate(solver, 100000);
  CHECK(gr1::transducer_json(full, c.game, c.tr.game.symbols).find("\"states\"") != std::string::npos);
  CHECK(gr1::transducer_dot(full, c.game, c.tr.game.symbols).rfind("digraph", 0) == 0);
}
