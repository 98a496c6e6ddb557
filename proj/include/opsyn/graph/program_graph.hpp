#pragma once

#include <string>
#include <vector>

#include "opsyn/frontend/ast.hpp"

namespace opsyn::graph {

using logic::Formula;

enum class EdgeKind {
  Statement,  // expression or assignment
  Else,       // negation of the sibling guards, filled in by the translator
  Jump,       // goto/break that starts an option: always executable
};

struct Edge {
  int from = 0;
  int to = 0;
  int key = 0;
  EdgeKind kind = EdgeKind::Statement;
  Formula formula;  // Statement: the statement; Jump: true; Else: null
  frontend::StmtPtr stmt;
  bool in_atomic = false;  // the statement lies inside an atomic block
};

struct GraphNode {
  bool atomic = false;
  bool interior = false;  // lies strictly between two statements of an atomic block
  bool progress = false;
  std::vector<std::string> labels;
};

struct ProgramGraph {
  int pid = -1;
  std::string name;
  std::vector<GraphNode> nodes;
  std::vector<Edge> edges;
  int root = 0;
  std::vector<Diagnostic> warnings;

  std::vector<int> out_edges(int node) const;
  int max_multiplicity() const;  // largest key + 1
};

/// Builds the program graph of a checked process. Nodes are numbered in
/// preorder from the root, following edges in option order.
ProgramGraph build_graph(const frontend::Process& process);

/// Flags interior nodes of atomic blocks that are both entered and left by
/// atomic statements. A loop head that is both entry and exit of a block is
/// not interior.
void mark_atomic(ProgramGraph& graph, const frontend::Process& process);

std::string to_dot(const ProgramGraph& graph);

}  // namespace opsyn::graph
