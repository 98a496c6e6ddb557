#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "oracle.hpp"

namespace fs = std::filesystem;

namespace {

struct Scratch {
  fs::path dir;
  Scratch() {
    dir = fs::temp_directory_path() / ("opsyn_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string write(const std::string& name, const std::string& text) {
    std::ofstream(dir / name) << text;
    return (dir / name).string();
  }
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

int run(const std::string& args) {
  std::string cmd = std::string(OPSYN_CLI) + " " + args + " >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const std::string kBunny = OPSYN_SOURCE_DIR "/models/bunny.pml";

}  // namespace

TEST_CASE("exit codes") {
  Scratch s;
  CHECK(run("realizable " + kBunny) == 0);
  CHECK(run("realizable " + s.write("bad.pml", "free sys bool y; assert ltl { y && !y }")) == 1);
  CHECK(run("compile " + s.write("syntax.pml", "sys bool x\nsys bool y;")) == 2);
  CHECK(run("compile " + s.path("missing.pml")) == 3);
  CHECK(run("realizable " + s.write("gr1.pml", "free env bool p; assume ltl { <>[] p }")) == 2);
}

TEST_CASE("node limit is a resource error") {
  std::string cmd = std::string("OPSYN_NODE_LIMIT=50 ") + OPSYN_CLI + " realizable " + OPSYN_SOURCE_DIR +
                    "/models/amba.pml >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  CHECK(WEXITSTATUS(status) == 4);
}

TEST_CASE("bunny slugs output matches the pinned file") {
  Scratch s;
  REQUIRE(run("compile " + kBunny + " -o " + s.path("a.slugsin")) == 0);
  CHECK(oracle::read_file(s.path("a.slugsin")) == oracle::read_file(OPSYN_SOURCE_DIR "/tests/golden/bunny.slugsin"));
}

TEST_CASE("compiling twice gives identical files") {
  Scratch s;
  for (const char* model : {"/models/bunny.pml", "/models/amba.pml"}) {
    std::string src = std::string(OPSYN_SOURCE_DIR) + model;
    REQUIRE(run("compile " + src + " -o " + s.path("1")) == 0);
    REQUIRE(run("compile " + src + " -o " + s.path("2")) == 0);
    CHECK(oracle::read_file(s.path("1")) == oracle::read_file(s.path("2")));
    REQUIRE(run("compile --emit json " + src + " -o " + s.path("3")) == 0);
    REQUIRE(run("compile --emit json " + src + " -o " + s.path("4")) == 0);
    CHECK(oracle::read_file(s.path("3")) == oracle::read_file(s.path("4")));
  }
}

TEST_CASE("synthesis and simulation write their outputs") {
  Scratch s;
  CHECK(run("synthesize " + kBunny + " --format json -o " + s.path("t.json") + " --stats " + s.path("st.csv")) == 0);
  CHECK(oracle::read_file(s.path("t.json")).find("\"states\"") != std::string::npos);
  CHECK(oracle::read_file(s.path("st.csv")).rfind("phase,", 0) == 0);
  CHECK(run("synthesize " + kBunny + " --format dot -o " + s.path("t.dot")) == 0);
  CHECK(oracle::read_file(s.path("t.dot")).rfind("digraph", 0) == 0);
  CHECK(run("simulate " + kBunny + " --steps 30 --seed 4 -o " + s.path("sim.txt")) == 0);
  CHECK(!oracle::read_file(s.path("sim.txt")).empty());
  CHECK(run("compile " + kBunny + " --dump-graph " + s.path("g.dot") + " --dump-game " + s.path("g.json") + " -o " +
            s.path("x")) == 0);
  CHECK(oracle::read_file(s.path("g.dot")).find("bunny") != std::string::npos);
  CHECK(oracle::read_file(s.path("g.json")).find("\"roster\"") != std::string::npos);
}
