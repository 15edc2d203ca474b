#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mutinv {

// Loop-free structured-text-like control language: assignments and nested
// conditionals (depth <= 3), arithmetic/relational/logical expressions.

enum class NodeKind { Assign, If, Arith, Rel, Logic, Not, Neg, Abs, Num, Var };
enum class RelOp { Gt, Ge, Lt, Le, Eq, Ne };
enum class LogicOp { And, Or };

const char* rel_op_token(RelOp op);
const char* logic_op_token(LogicOp op);

struct Node {
  NodeKind kind{};
  char arith = 0;        // '+', '-', '*', '/' for Arith
  RelOp rel{};           // for Rel
  LogicOp logic{};       // for Logic
  double num = 0.0;      // for Num
  std::string name;      // Assign target / Var name
  std::vector<int> kids; // node ids of children, in order
  int n_then = 0;        // If: kids = [cond, then..., else...]
  int n_else = 0;
  bool has_else = false;
  int line = 0, col = 0;
};

// AST arena. Node ids are pre-order indices assigned at parse time and are
// stable under mutation: replacements edit a node in place, insertions get
// fresh ids at the end of the arena.
struct Program {
  std::vector<Node> nodes;  // nodes[id].  Never reordered after parse.
  std::vector<int> top;     // top-level statement ids, in program order
};

bool structurally_equal(const Program& a, const Program& b);
std::size_t structural_hash(const Program& p);

struct ParseError : std::runtime_error {
  ParseError(int line, int col, const std::string& msg)
      : std::runtime_error(msg), line(line), col(col) {}
  int line, col;
};

struct EvalError : std::runtime_error {
  EvalError(int node_id, const std::string& msg)
      : std::runtime_error(msg), node_id(node_id) {}
  int node_id;
};

struct Diagnostic {
  int line = 0, col = 0;
  std::string message;
};

constexpr int kMaxIfDepth = 3;

Program parse(std::string_view text);
std::string pretty_print(const Program& p);

// Node ids evaluated during one scan cycle.
using CoverageSet = std::set<int>;

struct EvalResult {
  std::map<std::string, double> values;  // actuator + internal variables
  CoverageSet coverage;
};

// One scan cycle. `sensors` are read-only inputs; `actuators` seeds the
// variable environment (on=1, off=0) and assignments update a working copy.
EvalResult evaluate(const Program& p,
                    const std::map<std::string, double>& sensors,
                    const std::map<std::string, double>& actuators);

struct DeclaredNames {
  std::set<std::string> sensors;
  std::set<std::string> actuators;
};

std::vector<Diagnostic> validate(const Program& p, const DeclaredNames& decl);

}  // namespace mutinv
