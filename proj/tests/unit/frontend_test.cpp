#include "doctest.h"
#include "opsyn/frontend/ast.hpp"
#include "oracle.hpp"

using namespace opsyn;
using namespace opsyn::frontend;

namespace {

std::vector<std::string> rules_of(const std::string& src) {
  try {
    check_semantics(parse(src));
  } catch (const CompileError& e) {
    std::vector<std::string> out;
    for (const auto& d : e.diagnostics()) out.push_back(d.rule);
    return out;
  }
  return {};
}

bool has_rule(const std::string& src, const std::string& rule) {
  for (const auto& r : rules_of(src))
    if (r == rule) return true;
  return false;
}

std::string bunny() { return oracle::read_file(OPSYN_SOURCE_DIR "/models/bunny.pml"); }

}  // namespace

TEST_CASE("free env bit declaration") {
  auto ast = parse("free env bit x;");
  REQUIRE(ast.globals.size() == 1);
  const auto& d = ast.globals[0];
  CHECK(d.name == "x");
  CHECK(d.owner == Player::Env);
  CHECK(d.kind == VarKind::Declarative);
  CHECK(d.domain.kind == Domain::Kind::Bit);
}

TEST_CASE("empty source has no units") {
  auto ast = parse("");
  CHECK(ast.units.empty());
  CHECK(ast.globals.empty());
}

TEST_CASE("bunny listing parses to two processes, two ltl blocks, four globals") {
  auto ast = parse(bunny());
  CHECK(ast.processes.size() == 2);
  CHECK(ast.ltl.size() == 2);
  CHECK(ast.globals.size() == 4);
  CHECK(rules_of(bunny()).empty());
}

TEST_CASE("ranged, byte and array declarations") {
  auto spec = check_semantics(parse("sys int(-2, 5) a = 1; env byte b; free env bool r[3];"));
  const auto& s = spec.symbols;
  REQUIRE(s.size() == 3);
  CHECK(s.at(0).domain.kind == Domain::Kind::Ranged);
  CHECK(s.at(0).domain.min == -2);
  CHECK(s.at(0).domain.max == 5);
  CHECK(s.at(0).initial == 1);
  CHECK(s.at(0).kind == VarKind::Imperative);
  CHECK(s.at(1).domain.width == 8);
  CHECK(s.at(2).array_length == 3);
  CHECK(s.at(2).is_free());
}

TEST_CASE("defines substitute constants and can be overridden") {
  auto a = check_semantics(parse("#define N 3\nsys int(0, N) x;"));
  CHECK(a.symbols.at(0).domain.max == 3);
  auto b = check_semantics(parse("#define N 3\nsys int(0, N) x;", {{"N", "5"}}));
  CHECK(b.symbols.at(0).domain.max == 5);
}

TEST_CASE("primed system variable in an assumption is rejected") {
  const char* src =
      "sys bool y; env bool x;\n"
      "assume active env proctype p(){ do :: x' == y' od }";
  CHECK(has_rule(src, "primed-sys-in-assumption"));
  CHECK(has_rule("sys bool y; assume ltl { [] y' }", "primed-sys-in-assumption"));
}

TEST_CASE("double priming is rejected") {
  CHECK(has_rule("sys int(0, 3) x; assert active sys proctype p(){ x'' == 1 }", "multiple-priming"));
}

TEST_CASE("unsupported constructs are rejected at parse time") {
  for (const char* src : {"assert active sys proctype p(){ run q() }", "chan c = [1] of { bit };"}) {
    bool rejected = false;
    try {
      parse(src);
    } catch (const CompileError& e) {
      rejected = true;
      CHECK(e.diagnostics().front().rule == "unsupported");
    }
    CHECK(rejected);
  }
}

TEST_CASE("syntax errors carry a position") {
  try {
    parse("sys bool x\nsys bool y;");
    FAIL("expected a syntax error");
  } catch (const CompileError& e) {
    CHECK(e.diagnostics().front().rule == "syntax");
    CHECK(e.diagnostics().front().loc.line == 2);
  }
}

TEST_CASE("primes in ltl are rejected when atomic blocks exist") {
  const char* src =
      "sys bool y;\n"
      "assert active sys proctype p(){ atomic { y' ; y } }\n"
      "assert ltl { [] (y -> y') }";
  CHECK(has_rule(src, "primed-ltl-with-atomic"));
}

TEST_CASE("liveness assumptions cannot coexist with loops inside atomic") {
  const char* src =
      "sys bool y; env bool x;\n"
      "assert active sys proctype p(){ atomic { do :: y' od } }\n"
      "assume ltl { []<> x }";
  CHECK(has_rule(src, "liveness-with-atomic-loop"));
}

TEST_CASE("undeclared identifiers and foreign assignments") {
  CHECK(has_rule("assert active sys proctype p(){ z }", "undeclared"));
  CHECK(has_rule("env int(0, 3) x; assert active sys proctype p(){ x = 1 }", "ownership"));
}

TEST_CASE("locals shadow globals") {
  auto spec = check_semantics(parse("sys bool x; assert active sys proctype p(){ int(0, 3) x; x' == 2 }"));
  auto local = spec.symbols.lookup("x", 0);
  auto global = spec.symbols.lookup("x", std::nullopt);
  REQUIRE(local);
  REQUIRE(global);
  CHECK(*local != *global);
}

TEST_CASE("pretty printing round-trips") {
  const char* extra =
      "sys int(0, 3) n;\n"
      "free env bool r[2];\n"
      "assert active sys proctype q(){\n"
      "  S: if :: r[0] && (n < 3); n = n + 1 :: else; goto S fi;\n"
      "  atomic { n' == 0; r[1] }\n"
      "}\n"
      "assume ltl { [] (r[0] -> (--X r[1] S -X r[0])) }\n";
  for (const std::string& src : {bunny(), std::string(extra)}) {
    auto a = parse(src);
    auto b = parse(print(a));
    CHECK(structurally_equal(a, b));
  }
}

TEST_CASE("ownership partition covers every declaration") {
  auto spec = check_semantics(parse(bunny()));
  int env = 0, sys = 0;
  for (const auto& d : spec.symbols.all()) (d.owner == Player::Env ? env : sys)++;
  CHECK(env + sys == spec.symbols.size());
  CHECK(env == 2);
  CHECK(sys == 2);
}
