#include <random>

#include "doctest.h"
#include "opsyn/frontend/ast.hpp"
#include "opsyn/logic/temporal.hpp"
#include "opsyn/translate/translator.hpp"
#include "oracle.hpp"

using namespace opsyn;
using namespace opsyn::logic;

namespace {

struct Parsed {
  frontend::CheckedSpec spec;
  Formula f;
};

// formula of the first ltl block, over free env bools p, q, r
Parsed ltl(const std::string& text) {
  auto spec = frontend::check_semantics(frontend::parse("free env bool p, q, r;\nassume ltl { " + text + " }"));
  Formula f = spec.ast.ltl.at(0).formula;
  return {std::move(spec), f};
}

bool same_lanes(const oracle::Lanes& a, const oracle::Lanes& b) { return a == b; }

}  // namespace

TEST_CASE("always of a next-step implication is a safety conjunct") {
  auto s = split_gr1(ltl("[] (p -> X q)").f);
  CHECK(is_true(s.init));
  REQUIRE(s.safety.size() == 1);
  CHECK(s.recurrence.empty());
  CHECK(to_string(s.safety[0]) == "(p -> q')");
}

TEST_CASE("always eventually is a recurrence") {
  auto s = split_gr1(ltl("[]<> p").f);
  REQUIRE(s.recurrence.size() == 1);
  CHECK(to_string(s.recurrence[0]) == "p");
  CHECK(s.safety.empty());
}

TEST_CASE("persistence and nested until are not GR(1)") {
  CHECK_THROWS_AS(split_gr1(ltl("<>[] p").f), NotInGr1);
  CHECK_THROWS_AS(split_gr1(ltl("[] (p U q)").f), NotInGr1);
  CHECK_THROWS_AS(split_gr1(ltl("p U (q U r)").f), NotInGr1);
}

TEST_CASE("init, safety and recurrence conjuncts are classified together") {
  auto s = split_gr1(ltl("p && [] (q -> q') && []<> r && [] !p").f);
  CHECK(to_string(s.init) == "p");
  CHECK(s.safety.size() == 2);
  CHECK(s.recurrence.size() == 1);
}

TEST_CASE("splitting a reassembled split is a fixpoint") {
  for (const char* text : {"p && [] (q -> X q) && []<> r", "[]<> p && []<> !p", "[] (p || q')", "q"}) {
    auto s1 = split_gr1(ltl(text).f);
    auto s2 = split_gr1(reassemble(s1));
    CHECK(structurally_equal(s1.init, s2.init));
    REQUIRE(s1.safety.size() == s2.safety.size());
    for (std::size_t i = 0; i < s1.safety.size(); ++i) CHECK(structurally_equal(s1.safety[i], s2.safety[i]));
    REQUIRE(s1.recurrence.size() == s2.recurrence.size());
    for (std::size_t i = 0; i < s1.recurrence.size(); ++i) CHECK(structurally_equal(s1.recurrence[i], s2.recurrence[i]));
  }
}

TEST_CASE("strong previous is false at the first position") {
  auto in = ltl("--X p");
  SymbolTable symbols = in.spec.symbols;
  TesterFactory fresh(symbols, Player::Env);
  auto pe = eliminate_past(in.f, fresh);
  REQUIRE(pe.testers.size() == 1);
  CHECK(symbols.at(pe.testers[0]).auxiliary);
  CHECK(symbols.at(pe.testers[0]).owner == Player::Env);
  CHECK(symbols.at(pe.testers[0]).name.rfind("__", 0) == 0);
  REQUIRE(pe.init->op == Op::Not);
  CHECK(pe.init->args[0]->var == pe.testers[0]);
}

TEST_CASE("weak previous is true at the first position") {
  auto in = ltl("-X p");
  SymbolTable symbols = in.spec.symbols;
  TesterFactory fresh(symbols, Player::Env);
  auto pe = eliminate_past(in.f, fresh);
  REQUIRE(pe.testers.size() == 1);
  REQUIRE(pe.init->op == Op::Var);
  CHECK(pe.init->var == pe.testers[0]);
}

TEST_CASE("since holds while p holds after q at position 0") {
  auto in = ltl("p S q");
  std::vector<int> ids{0, 1};
  // q only at 0, p everywhere else: one word of length 5
  oracle::Lanes P(5, std::vector<std::uint64_t>{0}), Q(5, std::vector<std::uint64_t>{0});
  Q[0][0] = 1;
  for (int i = 1; i < 5; ++i) P[static_cast<std::size_t>(i)][0] = 1;
  auto direct = oracle::eval_past(in.f, ids, {P, Q});
  for (int i = 0; i < 5; ++i) CHECK((direct[static_cast<std::size_t>(i)][0] & 1) == 1);
  auto testers = oracle::eval_testers(in.f, in.spec.symbols, ids, {P, Q});
  for (int i = 0; i < 5; ++i) CHECK((testers[static_cast<std::size_t>(i)][0] & 1) == 1);
  // drop p at 3: false from 3 on
  P[3][0] = 0;
  direct = oracle::eval_past(in.f, ids, {P, Q});
  CHECK((direct[2][0] & 1) == 1);
  CHECK((direct[3][0] & 1) == 0);
  CHECK((direct[4][0] & 1) == 0);
}

TEST_CASE("testers agree with direct evaluation on every word over three propositions") {
  const char* formulas[] = {
      "--X p",          "-X (p && q)",        "p S q",           "(--X p) S (q || r)", "O r",
      "H (p -> -X q)", "--X --X r",         "(p S q) S (-X r)", "!(q S !p) && O (p && r)",
  };
  std::vector<int> ids{0, 1, 2};
  std::vector<oracle::Lanes> props;
  for (int i = 0; i < 3; ++i) props.push_back(oracle::all_words(3, 6, i));
  for (const char* text : formulas) {
    INFO(text);
    auto in = ltl(text);
    CHECK(same_lanes(oracle::eval_past(in.f, ids, props), oracle::eval_testers(in.f, in.spec.symbols, ids, props)));
  }
}

TEST_CASE("past operator definitions hold under the evaluator") {
  std::vector<int> ids{0, 1, 2};
  std::vector<oracle::Lanes> props;
  for (int i = 0; i < 3; ++i) props.push_back(oracle::all_words(3, 5, i));
  auto eval = [&](const char* text) {
    auto in = ltl(text);
    return oracle::eval_past(in.f, ids, props);
  };
  CHECK(eval("-X p") == eval("!(--X !p)"));
  CHECK(eval("O (p && q)") == eval("true S (p && q)"));
  CHECK(eval("H r") == eval("!(O !r)"));
}

TEST_CASE("past of a primed operand is rejected") {
  CHECK_THROWS_AS(translate::compile_source("free env bool p; assume ltl { [] (--X p') }"), CompileError);
}

TEST_CASE("identical past subformulas share a tester") {
  auto in = ltl("[] ((--X p) -> (q || --X p))");
  SymbolTable symbols = in.spec.symbols;
  TesterFactory fresh(symbols, Player::Env);
  auto pe = eliminate_past(in.f, fresh);
  CHECK(pe.testers.size() == 1);
}

TEST_CASE("prime_all refuses already primed references") {
  auto in = ltl("[] (p -> q')");
  auto s = split_gr1(in.f);
  CHECK(prime_all(s.safety[0]) == nullptr);
  CHECK(prime_all(make_var("p", 0)) != nullptr);
}
