#include <cmath>

#include "mutinv/dsl.hpp"

namespace mutinv {

namespace {

struct Value {
  bool is_bool = false;
  double num = 0.0;
  bool b = false;
};

struct Evaluator {
  const Program& p;
  const std::map<std::string, double>& sensors;
  std::map<std::string, double>& env;
  CoverageSet& coverage;

  Value eval(int id) {
    coverage.insert(id);
    const Node& n = p.nodes[id];
    Value v;
    switch (n.kind) {
      case NodeKind::Num:
        v.num = n.num;
        return v;
      case NodeKind::Var: {
        auto s = sensors.find(n.name);
        if (s != sensors.end()) {
          v.num = s->second;
          return v;
        }
        auto e = env.find(n.name);
        if (e != env.end()) {
          v.num = e->second;
          return v;
        }
        throw EvalError(id, "unknown identifier '" + n.name + "'");
      }
      case NodeKind::Abs:
        v.num = std::fabs(number(n.kids[0]));
        return v;
      case NodeKind::Neg:
        v.num = -number(n.kids[0]);
        return v;
      case NodeKind::Arith: {
        const double a = number(n.kids[0]);
        const double b = number(n.kids[1]);
        switch (n.arith) {
          case '+': v.num = a + b; break;
          case '-': v.num = a - b; break;
          case '*': v.num = a * b; break;
          case '/':
            if (b == 0.0) throw EvalError(id, "division by zero");
            v.num = a / b;
            break;
        }
        return v;
      }
      case NodeKind::Rel: {
        const double a = number(n.kids[0]);
        const double b = number(n.kids[1]);
        v.is_bool = true;
        switch (n.rel) {
          case RelOp::Gt: v.b = a > b; break;
          case RelOp::Ge: v.b = a >= b; break;
          case RelOp::Lt: v.b = a < b; break;
          case RelOp::Le: v.b = a <= b; break;
          case RelOp::Eq: v.b = a == b; break;
          case RelOp::Ne: v.b = a != b; break;
        }
        return v;
      }
      case NodeKind::Logic: {
        const bool a = boolean(n.kids[0]);
        v.is_bool = true;
        // Short-circuit: the right operand is only covered when evaluated.
        if (n.logic == LogicOp::And)
          v.b = a ? boolean(n.kids[1]) : false;
        else
          v.b = a ? true : boolean(n.kids[1]);
        return v;
      }
      case NodeKind::Not:
        v.is_bool = true;
        v.b = !boolean(n.kids[0]);
        return v;
      default:
        throw EvalError(id, "statement node in expression position");
    }
  }

  double number(int id) {
    Value v = eval(id);
    if (v.is_bool) throw EvalError(id, "boolean used as number");
    return v.num;
  }

  bool boolean(int id) {
    Value v = eval(id);
    if (!v.is_bool) throw EvalError(id, "number used as boolean");
    return v.b;
  }

  void exec(int id) {
    coverage.insert(id);
    const Node& n = p.nodes[id];
    if (n.kind == NodeKind::Assign) {
      if (sensors.count(n.name))
        throw EvalError(id, "cannot assign to sensor '" + n.name + "'");
      env[n.name] = number(n.kids[0]);
      return;
    }
    if (n.kind != NodeKind::If)
      throw EvalError(id, "expression node in statement position");
    if (boolean(n.kids[0])) {
      for (int i = 0; i < n.n_then; ++i) exec(n.kids[1 + i]);
    } else {
      for (int i = 0; i < n.n_else; ++i) exec(n.kids[1 + n.n_then + i]);
    }
  }
};

}  // namespace

EvalResult evaluate(const Program& p,
                    const std::map<std::string, double>& sensors,
                    const std::map<std::string, double>& actuators) {
  EvalResult r;
  r.values = actuators;
  Evaluator ev{p, sensors, r.values, r.coverage};
  for (int id : p.top) ev.exec(id);
  return r;
}

namespace {

enum class Ty { Num, Bool, Error };

struct Validator {
  const Program& p;
  const DeclaredNames& decl;
  std::vector<Diagnostic>& diags;
  std::set<std::string> assigned;

  void report(int id, std::string msg) {
    diags.push_back({p.nodes[id].line, p.nodes[id].col, std::move(msg)});
  }

  Ty type_of(int id) {
    const Node& n = p.nodes[id];
    switch (n.kind) {
      case NodeKind::Num:
        return Ty::Num;
      case NodeKind::Var:
        if (!decl.sensors.count(n.name) && !decl.actuators.count(n.name) &&
            !assigned.count(n.name)) {
          report(id, "unknown identifier '" + n.name + "'");
          return Ty::Error;
        }
        return Ty::Num;
      case NodeKind::Abs:
      case NodeKind::Neg:
        require(n.kids[0], Ty::Num);
        return Ty::Num;
      case NodeKind::Arith:
        require(n.kids[0], Ty::Num);
        require(n.kids[1], Ty::Num);
        return Ty::Num;
      case NodeKind::Rel:
        require(n.kids[0], Ty::Num);
        require(n.kids[1], Ty::Num);
        return Ty::Bool;
      case NodeKind::Logic:
        require(n.kids[0], Ty::Bool);
        require(n.kids[1], Ty::Bool);
        return Ty::Bool;
      case NodeKind::Not:
        require(n.kids[0], Ty::Bool);
        return Ty::Bool;
      default:
        report(id, "statement node in expression position");
        return Ty::Error;
    }
  }

  void require(int id, Ty want) {
    const Ty got = type_of(id);
    if (got == Ty::Error || got == want) return;
    report(id, want == Ty::Num ? "boolean used as number"
                               : "number used as boolean");
  }

  void check_stmt(int id, int depth) {
    const Node& n = p.nodes[id];
    if (n.kind == NodeKind::Assign) {
      if (decl.sensors.count(n.name))
        report(id, "cannot assign to sensor '" + n.name + "'");
      require(n.kids[0], Ty::Num);
      assigned.insert(n.name);
      return;
    }
    if (depth + 1 > kMaxIfDepth) report(id, "nesting depth exceeds 3");
    require(n.kids[0], Ty::Bool);
    for (int i = 0; i < n.n_then; ++i) check_stmt(n.kids[1 + i], depth + 1);
    for (int i = 0; i < n.n_else; ++i)
      check_stmt(n.kids[1 + n.n_then + i], depth + 1);
  }
};

}  // namespace

std::vector<Diagnostic> validate(const Program& p, const DeclaredNames& decl) {
  std::vector<Diagnostic> diags;
  Validator v{p, decl, diags, {}};
  for (int id : p.top) v.check_stmt(id, 0);
  return diags;
}

}  // namespace mutinv
