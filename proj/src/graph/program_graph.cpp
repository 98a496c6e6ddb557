#include "opsyn/graph/program_graph.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>

namespace opsyn::graph {

using frontend::Sequence;
using frontend::Stmt;
using frontend::StmtKind;

std::vector<int> ProgramGraph::out_edges(int node) const {
  std::vector<int> out;
  for (int e = 0; e < static_cast<int>(edges.size()); ++e)
    if (edges[static_cast<std::size_t>(e)].from == node) out.push_back(e);
  return out;
}

int ProgramGraph::max_multiplicity() const {
  int m = 1;
  for (const auto& e : edges) m = std::max(m, e.key + 1);
  return m;
}

namespace {

class Builder {
 public:
  explicit Builder(const frontend::Process& p) : proc_(p) {}

  ProgramGraph run() {
    int entry = fresh();
    int exit = fresh();
    build_seq(proc_.body, entry, exit, -1, false, false);
    for (const auto& [from, label, loc] : gotos_) {
      auto it = labels_.find(label);
      if (it == labels_.end()) throw CompileError({make_error(loc, "goto", "goto to unknown label '" + label + "'")});
      unite(from, it->second);
    }
    for (auto& e : raw_edges_)
      if (e.to < 0) e.to = labels_.at(pending_jump_targets_.at(&e - raw_edges_.data()));
    return finish(find(entry));
  }

 private:
  struct RawEdge {
    int from, to;
    EdgeKind kind;
    frontend::StmtPtr stmt;
    bool in_atomic;
  };

  int fresh() {
    parent_.push_back(static_cast<int>(parent_.size()));
    interior_.push_back(atomic_depth_ > 0);
    return parent_.back();
  }

  int find(int n) {
    while (parent_[static_cast<std::size_t>(n)] != n) {
      parent_[static_cast<std::size_t>(n)] = parent_[static_cast<std::size_t>(parent_[static_cast<std::size_t>(n)])];
      n = parent_[static_cast<std::size_t>(n)];
    }
    return n;
  }

  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[static_cast<std::size_t>(a)] = b;
  }

  void add_edge(int from, int to, EdgeKind kind, const frontend::StmtPtr& s) {
    raw_edges_.push_back({from, to, kind, s, atomic_depth_ > 0});
  }

  void build_seq(const Sequence& seq, int in, int out, int brk, bool option_start, bool shared_in) {
    int cur = in;
    for (std::size_t i = 0; i < seq.size(); ++i) {
      int next = i + 1 == seq.size() ? out : fresh();
      bool first = option_start && i == 0;
      build_stmt(seq[i], cur, next, brk, first, shared_in && i == 0);
      cur = next;
    }
    if (seq.empty()) unite(in, out);
  }

  void build_stmt(const frontend::StmtPtr& sp, int in, int out, int brk, bool first, bool shared_in) {
    const Stmt& s = *sp;
    for (const auto& l : s.labels) labels_[l] = in;
    switch (s.kind) {
      case StmtKind::Expr:
      case StmtKind::Assign: add_edge(in, out, EdgeKind::Statement, sp); break;
      case StmtKind::Else: add_edge(in, out, EdgeKind::Else, sp); break;
      case StmtKind::Goto:
        if (first) {
          pending_jump_targets_[raw_edges_.size()] = s.target;
          add_edge(in, -1, EdgeKind::Jump, sp);
        } else {
          gotos_.push_back({in, s.target, s.loc});
        }
        break;
      case StmtKind::Break:
        if (brk < 0) throw CompileError({make_error(s.loc, "break", "'break' outside a loop")});
        if (first)
          add_edge(in, brk, EdgeKind::Jump, sp);
        else
          unite(in, brk);
        break;
      case StmtKind::If:
        for (const auto& opt : s.options) build_seq(opt, in, out, brk, true, true);
        break;
      case StmtKind::Do: {
        // The loop head must not carry edges of an enclosing selection, so
        // a shared entry node gets a copy of the head's edges instead.
        int head = shared_in ? fresh() : in;
        std::size_t before = raw_edges_.size();
        for (const auto& opt : s.options) build_seq(opt, head, head, out, true, true);
        if (head != in) {
          std::size_t after = raw_edges_.size();
          for (std::size_t e = before; e < after; ++e) {
            if (raw_edges_[e].from != head) continue;
            RawEdge copy = raw_edges_[e];
            copy.from = in;
            auto pj = pending_jump_targets_.find(e);
            if (pj != pending_jump_targets_.end()) pending_jump_targets_[raw_edges_.size()] = pj->second;
            raw_edges_.push_back(copy);
          }
          for (const auto& l : s.labels) labels_[l] = head;
        }
        break;
      }
      case StmtKind::Atomic:
        ++atomic_depth_;
        build_seq(s.body, in, out, brk, first, shared_in);
        --atomic_depth_;
        break;
    }
  }

  ProgramGraph finish(int root) {
    int n = static_cast<int>(parent_.size());
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
    for (std::size_t e = 0; e < raw_edges_.size(); ++e) {
      raw_edges_[e].from = find(raw_edges_[e].from);
      raw_edges_[e].to = find(raw_edges_[e].to);
      adj[static_cast<std::size_t>(raw_edges_[e].from)].push_back(static_cast<int>(e));
    }
    // preorder numbering from the root
    std::vector<int> number(static_cast<std::size_t>(n), -1);
    int next = 0;
    std::vector<int> stack{root};
    std::vector<int> order;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      if (number[static_cast<std::size_t>(v)] >= 0) continue;
      number[static_cast<std::size_t>(v)] = next++;
      order.push_back(v);
      const auto& out = adj[static_cast<std::size_t>(v)];
      for (auto it = out.rbegin(); it != out.rend(); ++it) {
        int w = raw_edges_[static_cast<std::size_t>(*it)].to;
        if (number[static_cast<std::size_t>(w)] < 0) stack.push_back(w);
      }
    }
    ProgramGraph g;
    g.pid = proc_.pid;
    g.name = proc_.name;
    g.root = 0;
    g.nodes.resize(static_cast<std::size_t>(next));
    for (const auto& [label, node] : labels_) {
      int v = find(node);
      if (number[static_cast<std::size_t>(v)] < 0) continue;
      auto& gn = g.nodes[static_cast<std::size_t>(number[static_cast<std::size_t>(v)])];
      gn.labels.push_back(label);
      if (label.find("progress") != std::string::npos) gn.progress = true;
    }
    for (auto& gn : g.nodes) std::sort(gn.labels.begin(), gn.labels.end());
    // a location is inside an atomic block only if every node merged into it is
    std::vector<char> inside(static_cast<std::size_t>(n), 1);
    for (int v = 0; v < n; ++v)
      if (!interior_[static_cast<std::size_t>(v)]) inside[static_cast<std::size_t>(find(v))] = 0;
    for (int v : order) g.nodes[static_cast<std::size_t>(number[static_cast<std::size_t>(v)])].interior = inside[static_cast<std::size_t>(v)];
    bool dead = false;
    SourceLoc dead_loc;
    std::map<std::pair<int, int>, int> keys;
    for (int v : order) {
      for (int e : adj[static_cast<std::size_t>(v)]) {
        const RawEdge& r = raw_edges_[static_cast<std::size_t>(e)];
        Edge out;
        out.from = number[static_cast<std::size_t>(r.from)];
        out.to = number[static_cast<std::size_t>(r.to)];
        out.key = keys[{out.from, out.to}]++;
        out.kind = r.kind;
        out.stmt = r.stmt;
        out.in_atomic = r.in_atomic;
        if (r.kind == EdgeKind::Statement) out.formula = r.stmt->expr;
        if (r.kind == EdgeKind::Jump) out.formula = logic::make_bool(true);
        g.edges.push_back(out);
      }
    }
    for (const auto& r : raw_edges_) {
      if (number[static_cast<std::size_t>(r.from)] < 0 && !dead) {
        dead = true;
        dead_loc = r.stmt->loc;
      }
    }
    if (dead)
      g.warnings.push_back(make_warning(dead_loc, "unreachable", "unreachable statements in '" + proc_.name + "' removed"));
    return g;
  }

  const frontend::Process& proc_;
  std::vector<int> parent_;
  std::vector<char> interior_;  // created between two statements of an atomic block
  std::vector<RawEdge> raw_edges_;
  std::map<std::size_t, std::string> pending_jump_targets_;
  std::map<std::string, int> labels_;
  std::vector<std::tuple<int, std::string, SourceLoc>> gotos_;
  int atomic_depth_ = 0;
};

}  // namespace

ProgramGraph build_graph(const frontend::Process& process) {
  Builder b(process);
  ProgramGraph g = b.run();
  mark_atomic(g, process);
  return g;
}

void mark_atomic(ProgramGraph& graph, const frontend::Process&) {
  std::vector<char> enters(graph.nodes.size(), 0), leaves(graph.nodes.size(), 0);
  for (const auto& e : graph.edges) {
    if (!e.in_atomic) continue;
    enters[static_cast<std::size_t>(e.to)] = 1;
    leaves[static_cast<std::size_t>(e.from)] = 1;
  }
  for (std::size_t n = 0; n < graph.nodes.size(); ++n)
    graph.nodes[n].atomic = graph.nodes[n].interior && enters[n] && leaves[n];
}

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

std::string to_dot(const ProgramGraph& g) {
  std::ostringstream out;
  out << "digraph \"" << escape(g.name) << "\" {\n";
  for (std::size_t n = 0; n < g.nodes.size(); ++n) {
    const auto& gn = g.nodes[n];
    out << "  n" << n << " [label=\"" << n;
    for (const auto& l : gn.labels) out << "\\n" << escape(l);
    out << "\"";
    if (gn.progress) out << ", peripheries=2";
    if (gn.atomic) out << ", style=filled, fillcolor=lightgray";
    if (static_cast<int>(n) == g.root) out << ", shape=box";
    out << "];\n";
  }
  for (const auto& e : g.edges) {
    std::string text = e.kind == EdgeKind::Else ? "else" : logic::to_string(e.formula);
    out << "  n" << e.from << " -> n" << e.to << " [label=\"" << escape(text) << " [" << e.key << "]\"];\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace opsyn::graph
