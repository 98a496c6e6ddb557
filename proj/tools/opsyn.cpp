// opsyn: compile open-Promela specifications to GR(1) games and solve them.
//
// exit codes: 0 ok / realizable, 1 unrealizable, 2 diagnostics,
//             3 I/O error, 4 resource limit, 5 internal error

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "opsyn/bitblast/bitblast.hpp"
#include "opsyn/frontend/ast.hpp"
#include "opsyn/gr1/solver.hpp"
#include "opsyn/gr1/transducer.hpp"
#include "opsyn/graph/program_graph.hpp"
#include "opsyn/translate/translator.hpp"

namespace {

enum Exit { kOk = 0, kUnrealizable = 1, kDiagnostics = 2, kIo = 3, kResource = 4, kInternal = 5 };

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Config {
  std::string input;
  std::string output = "-";
  std::string emit = "slugs";
  std::string dump_graph, dump_game, stats;
  std::string format = "json";
  std::string reorder = "auto";
  std::string reorder_phase3 = "on";
  bool syntactic_guards = false;
  bool atomic_visible_ltl = false;
  bool bdd_stats = false;
  std::uint64_t seed = 1;
  int steps = 100;
  std::size_t max_enumeration = 100000;
  std::vector<std::string> defines;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_to(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
}

std::map<std::string, std::string> parse_defines(const std::vector<std::string>& ds) {
  std::map<std::string, std::string> out;
  for (const auto& d : ds) {
    auto eq = d.find('=');
    if (eq == std::string::npos)
      out[d] = "1";
    else
      out[d.substr(0, eq)] = d.substr(eq + 1);
  }
  return out;
}

void print_diags(const std::string& file, const std::vector<opsyn::Diagnostic>& ds) {
  for (const auto& d : ds) std::cerr << file << ':' << opsyn::format_diagnostic(d) << '\n';
}

struct Compiled {
  opsyn::translate::Translation tr;
  opsyn::bits::BitGame game;
};

Compiled compile(const Config& cfg) {
  std::string src = read_file(cfg.input);
  opsyn::translate::Options opt;
  opt.syntactic_guards = cfg.syntactic_guards;
  opt.atomic_visible_ltl = cfg.atomic_visible_ltl;
  Compiled c{opsyn::translate::compile_source(src, opt, parse_defines(cfg.defines)), {}};
  print_diags(cfg.input, c.tr.warnings);
  if (!cfg.dump_graph.empty()) {
    std::string dot;
    for (const auto& p : c.tr.processes) dot += opsyn::graph::to_dot(p.graph);
    write_to(cfg.dump_graph, dot);
  }
  if (!cfg.dump_game.empty()) write_to(cfg.dump_game, opsyn::game::dump_json(c.tr.game));
  c.game = opsyn::bits::blast_game(c.tr.game);
  return c;
}

opsyn::gr1::SolverOptions solver_options(const Config& cfg) {
  opsyn::gr1::SolverOptions o;
  o.reorder = cfg.reorder == "off" ? opsyn::bdd::ReorderPolicy::Off : opsyn::bdd::ReorderPolicy::Auto;
  o.reorder_phase3 = cfg.reorder_phase3 == "on";
  if (const char* lim = std::getenv("OPSYN_NODE_LIMIT")) o.node_limit = std::strtoull(lim, nullptr, 10);
  return o;
}

void report(const Config& cfg, opsyn::gr1::Solver& s) {
  if (!cfg.stats.empty()) write_to(cfg.stats, s.stats_csv());
  if (cfg.bdd_stats) {
    const auto& st = s.manager().stats();
    double rate = st.cache_lookups ? static_cast<double>(st.cache_hits) / static_cast<double>(st.cache_lookups) : 0.0;
    std::cerr << "bdd: vars " << s.manager().var_count() << ", live " << s.manager().live_nodes() << ", peak "
              << st.peak_live_nodes << ", allocated " << st.allocated_nodes << ", gc " << st.gc_runs << ", reorders "
              << st.reorder_runs << ", swaps " << st.reorder_swaps << ", cache hit rate " << rate << '\n';
  }
}

int run(const std::string& command, const Config& cfg) {
  Compiled c = compile(cfg);
  if (command == "compile") {
    if (cfg.emit == "json")
      write_to(cfg.output, opsyn::game::dump_json(c.tr.game));
    else
      write_to(cfg.output, opsyn::bits::emit_slugs(c.game));
    return kOk;
  }
  opsyn::gr1::Solver solver(c.game, solver_options(cfg));
  bool ok = solver.solve();
  if (command == "realizable" || !ok) {
    std::cout << (ok ? "realizable" : "unrealizable") << '\n';
    report(cfg, solver);
    return ok ? kOk : kUnrealizable;
  }
  solver.combine();
  const auto& symbols = c.tr.game.symbols;
  if (command == "synthesize") {
    auto t = opsyn::gr1::enumerate(solver, cfg.max_enumeration);
    if (!t.complete)
      write_to(cfg.output, opsyn::gr1::symbolic_summary(solver, t));
    else if (cfg.format == "dot")
      write_to(cfg.output, opsyn::gr1::transducer_dot(t, c.game, symbols));
    else
      write_to(cfg.output, opsyn::gr1::transducer_json(t, c.game, symbols));
    std::cerr << "realizable; " << t.states.size() << " states, " << t.transitions.size() << " transitions"
              << (t.complete ? "" : " (enumeration cap reached, symbolic summary written)") << '\n';
    report(cfg, solver);
    return kOk;
  }
  // simulate
  auto r = opsyn::gr1::simulate(solver, cfg.seed, cfg.steps);
  std::ostringstream out;
  for (std::size_t i = 0; i < r.trace.size(); ++i) {
    out << i << " goal=" << r.trace[i].goal;
    for (const auto& [name, value] : opsyn::gr1::decode(c.game.layout, symbols, r.trace[i].bits))
      if (name.rfind("__", 0) != 0) out << ' ' << name << '=' << value;
    out << '\n';
  }
  out << "# sys safety violations: " << r.sys_safety_violations << '\n';
  for (std::size_t j = 0; j < r.sys_goal_hits.size(); ++j) out << "# sys goal " << j << " hits: " << r.sys_goal_hits[j] << '\n';
  for (std::size_t i = 0; i < r.env_goal_hits.size(); ++i) out << "# env goal " << i << " hits: " << r.env_goal_hits[i] << '\n';
  if (!r.message.empty()) out << "# " << r.message << '\n';
  write_to(cfg.output, out.str());
  report(cfg, solver);
  return r.sys_safety_violations ? kInternal : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"opsyn: synthesis from open-Promela specifications",
               "opsyn"};
  app.footer("exit codes: 0 ok/realizable, 1 unrealizable, 2 diagnostics, 3 I/O error, 4 resource limit, 5 internal\n"
             "OPSYN_NODE_LIMIT caps the number of BDD nodes.");
  app.require_subcommand(1, 1);
  Config cfg;
  auto common = [&](CLI::App* sub) {
    sub->add_option("input", cfg.input, "specification file")->required();
    sub->add_option("-o,--output", cfg.output, "output path ('-' for stdout)");
    sub->add_option("-D", cfg.defines, "override a #define (NAME=VALUE)");
    sub->add_option("--dump-graph", cfg.dump_graph, "write program graphs (DOT) to a path");
    sub->add_option("--dump-game", cfg.dump_game, "write the game (JSON) to a path");
    sub->add_flag("--syntactic-guards", cfg.syntactic_guards, "approximate guards syntactically");
    sub->add_flag("--atomic-visible-ltl", cfg.atomic_visible_ltl, "ltl assertions observe atomic execution");
  };
  auto solving = [&](CLI::App* sub) {
    sub->add_option("--reorder", cfg.reorder, "dynamic variable reordering")->check(CLI::IsMember({"off", "auto"}));
    sub->add_option("--reorder-phase3", cfg.reorder_phase3, "reordering while combining strategies")
        ->check(CLI::IsMember({"on", "off"}));
    sub->add_flag("--bdd-stats", cfg.bdd_stats, "print BDD statistics to stderr");
    sub->add_option("--stats", cfg.stats, "write per-phase statistics (CSV) to a path");
  };
  auto* compile_cmd = app.add_subcommand("compile", "translate to a GR(1) game");
  common(compile_cmd);
  compile_cmd->add_option("--emit", cfg.emit, "output format")->check(CLI::IsMember({"slugs", "json"}));
  auto* real_cmd = app.add_subcommand("realizable", "decide realizability");
  common(real_cmd);
  solving(real_cmd);
  auto* synth_cmd = app.add_subcommand("synthesize", "extract a transducer");
  common(synth_cmd);
  solving(synth_cmd);
  synth_cmd->add_option("--format", cfg.format, "transducer format")->check(CLI::IsMember({"json", "dot"}));
  synth_cmd->add_option("--max-enumeration", cfg.max_enumeration, "state cap for the explicit transducer");
  auto* sim_cmd = app.add_subcommand("simulate", "run the strategy against a random environment");
  common(sim_cmd);
  solving(sim_cmd);
  sim_cmd->add_option("--seed", cfg.seed, "random seed");
  sim_cmd->add_option("--steps", cfg.steps, "number of steps");

  CLI11_PARSE(app, argc, argv);
  std::string command = app.get_subcommands().front()->get_name();
  try {
    return run(command, cfg);
  } catch (const opsyn::CompileError& e) {
    print_diags(cfg.input, e.diagnostics());
    return kDiagnostics;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const opsyn::ResourceError& e) {
    std::cerr << "resource limit: " << e.what() << '\n';
    return kResource;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInternal;
  }
}
