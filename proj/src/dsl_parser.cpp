#include <cassert>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <sstream>

#include "mutinv/dsl.hpp"

namespace mutinv {

const char* rel_op_token(RelOp op) {
  switch (op) {
    case RelOp::Gt: return ">";
    case RelOp::Ge: return ">=";
    case RelOp::Lt: return "<";
    case RelOp::Le: return "<=";
    case RelOp::Eq: return "=";
    case RelOp::Ne: return "<>";
  }
  return "?";
}

const char* logic_op_token(LogicOp op) {
  return op == LogicOp::And ? "and" : "or";
}

namespace {

enum class Tok {
  Ident, Number, Assign, Semi, LParen, RParen,
  Plus, Minus, Star, Slash,
  Gt, Ge, Lt, Le, Eq, Ne,
  KwIf, KwThen, KwElse, KwEnd, KwAnd, KwOr, KwNot, KwAbs,
  Eof
};

struct Token {
  Tok kind;
  std::string text;
  double num = 0.0;
  int line = 1, col = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_ws_and_comments();
      Token t;
      t.line = line_;
      t.col = col_;
      if (pos_ >= src_.size()) {
        t.kind = Tok::Eof;
        out.push_back(t);
        return out;
      }
      const char c = src_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
                src_[pos_] == '_'))
          advance();
        t.text = std::string(src_.substr(start, pos_ - start));
        t.kind = keyword_kind(t.text);
        out.push_back(t);
        continue;
      }
      if (std::isdigit(static_cast<unsigned char>(c)) ||
          (c == '.' && pos_ + 1 < src_.size() &&
           std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
        std::size_t start = pos_;
        while (pos_ < src_.size() &&
               std::isdigit(static_cast<unsigned char>(src_[pos_])))
          advance();
        if (pos_ < src_.size() && src_[pos_] == '.') {
          advance();
          while (pos_ < src_.size() &&
                 std::isdigit(static_cast<unsigned char>(src_[pos_])))
            advance();
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
          advance();
          if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-'))
            advance();
          if (pos_ >= src_.size() ||
              !std::isdigit(static_cast<unsigned char>(src_[pos_])))
            throw ParseError(t.line, t.col, "malformed number literal");
          while (pos_ < src_.size() &&
                 std::isdigit(static_cast<unsigned char>(src_[pos_])))
            advance();
        }
        t.kind = Tok::Number;
        t.text = std::string(src_.substr(start, pos_ - start));
        t.num = std::strtod(t.text.c_str(), nullptr);
        out.push_back(t);
        continue;
      }
      switch (c) {
        case ':':
          advance();
          if (pos_ >= src_.size() || src_[pos_] != '=')
            throw ParseError(t.line, t.col, "expected ':='");
          advance();
          t.kind = Tok::Assign;
          break;
        case ';': advance(); t.kind = Tok::Semi; break;
        case '(': advance(); t.kind = Tok::LParen; break;
        case ')': advance(); t.kind = Tok::RParen; break;
        case '+': advance(); t.kind = Tok::Plus; break;
        case '-': advance(); t.kind = Tok::Minus; break;
        case '*': advance(); t.kind = Tok::Star; break;
        case '/': advance(); t.kind = Tok::Slash; break;
        case '>':
          advance();
          if (pos_ < src_.size() && src_[pos_] == '=') { advance(); t.kind = Tok::Ge; }
          else t.kind = Tok::Gt;
          break;
        case '<':
          advance();
          if (pos_ < src_.size() && src_[pos_] == '=') { advance(); t.kind = Tok::Le; }
          else if (pos_ < src_.size() && src_[pos_] == '>') { advance(); t.kind = Tok::Ne; }
          else t.kind = Tok::Lt;
          break;
        case '=': advance(); t.kind = Tok::Eq; break;
        default:
          throw ParseError(t.line, t.col,
                           std::string("unexpected character '") + c + "'");
      }
      out.push_back(t);
    }
  }

 private:
  static Tok keyword_kind(const std::string& s) {
    if (s == "if") return Tok::KwIf;
    if (s == "then") return Tok::KwThen;
    if (s == "else") return Tok::KwElse;
    if (s == "end") return Tok::KwEnd;
    if (s == "and") return Tok::KwAnd;
    if (s == "or") return Tok::KwOr;
    if (s == "not") return Tok::KwNot;
    if (s == "abs") return Tok::KwAbs;
    return Tok::Ident;
  }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_ws_and_comments() {
    for (;;) {
      while (pos_ < src_.size() &&
             std::isspace(static_cast<unsigned char>(src_[pos_])))
        advance();
      // (* ... *) comments, non-nesting
      if (pos_ + 1 < src_.size() && src_[pos_] == '(' && src_[pos_ + 1] == '*') {
        const int l = line_, c = col_;
        advance();
        advance();
        for (;;) {
          if (pos_ + 1 >= src_.size())
            throw ParseError(l, c, "unterminated comment");
          if (src_[pos_] == '*' && src_[pos_ + 1] == ')') {
            advance();
            advance();
            break;
          }
          advance();
        }
        continue;
      }
      break;
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1, col_ = 1;
};

// Temporary tree; flattened into a pre-order arena once parsing succeeds.
struct TNode {
  Node data;
  std::vector<std::unique_ptr<TNode>> kids;
};
using TPtr = std::unique_ptr<TNode>;

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  Program run() {
    std::vector<TPtr> stmts = stmt_list(0);
    expect(Tok::Eof, "expected statement or end of input");
    Program p;
    for (auto& s : stmts) p.top.push_back(flatten(*s, p));
    return p;
  }

 private:
  const Token& cur() const { return toks_[idx_]; }
  bool at(Tok k) const { return cur().kind == k; }
  Token eat() { return toks_[idx_++]; }

  Token expect(Tok k, const char* what) {
    if (!at(k)) throw ParseError(cur().line, cur().col, what);
    return eat();
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(cur().line, cur().col, msg);
  }

  std::vector<TPtr> stmt_list(int if_depth) {
    std::vector<TPtr> out;
    while (at(Tok::Ident) || at(Tok::KwIf)) out.push_back(stmt(if_depth));
    return out;
  }

  TPtr stmt(int if_depth) {
    if (at(Tok::KwIf)) {
      if (if_depth + 1 > kMaxIfDepth)
        throw ParseError(cur().line, cur().col, "nesting depth exceeds 3");
      Token kw = eat();
      auto n = std::make_unique<TNode>();
      n->data.kind = NodeKind::If;
      n->data.line = kw.line;
      n->data.col = kw.col;
      n->kids.push_back(expr());
      expect(Tok::KwThen, "expected 'then'");
      auto then_block = stmt_list(if_depth + 1);
      n->data.n_then = static_cast<int>(then_block.size());
      for (auto& s : then_block) n->kids.push_back(std::move(s));
      if (at(Tok::KwElse)) {
        eat();
        n->data.has_else = true;
        auto else_block = stmt_list(if_depth + 1);
        n->data.n_else = static_cast<int>(else_block.size());
        for (auto& s : else_block) n->kids.push_back(std::move(s));
      }
      expect(Tok::KwEnd, "expected 'end'");
      return n;
    }
    Token id = expect(Tok::Ident, "expected statement");
    auto n = std::make_unique<TNode>();
    n->data.kind = NodeKind::Assign;
    n->data.name = id.text;
    n->data.line = id.line;
    n->data.col = id.col;
    expect(Tok::Assign, "expected ':='");
    n->kids.push_back(expr());
    expect(Tok::Semi, "expected ';'");
    return n;
  }

  TPtr expr() { return or_expr(); }

  TPtr or_expr() {
    TPtr lhs = and_expr();
    while (at(Tok::KwOr)) {
      Token op = eat();
      auto n = std::make_unique<TNode>();
      n->data.kind = NodeKind::Logic;
      n->data.logic = LogicOp::Or;
      n->data.line = op.line;
      n->data.col = op.col;
      n->kids.push_back(std::move(lhs));
      n->kids.push_back(and_expr());
      lhs = std::move(n);
    }
    return lhs;
  }

  TPtr and_expr() {
    TPtr lhs = not_expr();
    while (at(Tok::KwAnd)) {
      Token op = eat();
      auto n = std::make_unique<TNode>();
      n->data.kind = NodeKind::Logic;
      n->data.logic = LogicOp::And;
      n->data.line = op.line;
      n->data.col = op.col;
      n->kids.push_back(std::move(lhs));
      n->kids.push_back(not_expr());
      lhs = std::move(n);
    }
    return lhs;
  }

  TPtr not_expr() {
    if (at(Tok::KwNot)) {
      Token op = eat();
      auto n = std::make_unique<TNode>();
      n->data.kind = NodeKind::Not;
      n->data.line = op.line;
      n->data.col = op.col;
      n->kids.push_back(not_expr());
      return n;
    }
    return cmp_expr();
  }

  TPtr cmp_expr() {
    TPtr lhs = add_expr();
    RelOp rel;
    switch (cur().kind) {
      case Tok::Gt: rel = RelOp::Gt; break;
      case Tok::Ge: rel = RelOp::Ge; break;
      case Tok::Lt: rel = RelOp::Lt; break;
      case Tok::Le: rel = RelOp::Le; break;
      case Tok::Eq: rel = RelOp::Eq; break;
      case Tok::Ne: rel = RelOp::Ne; break;
      default: return lhs;
    }
    Token op = eat();
    auto n = std::make_unique<TNode>();
    n->data.kind = NodeKind::Rel;
    n->data.rel = rel;
    n->data.line = op.line;
    n->data.col = op.col;
    n->kids.push_back(std::move(lhs));
    n->kids.push_back(add_expr());
    return n;
  }

  TPtr add_expr() {
    TPtr lhs = mul_expr();
    while (at(Tok::Plus) || at(Tok::Minus)) {
      Token op = eat();
      auto n = std::make_unique<TNode>();
      n->data.kind = NodeKind::Arith;
      n->data.arith = op.kind == Tok::Plus ? '+' : '-';
      n->data.line = op.line;
      n->data.col = op.col;
      n->kids.push_back(std::move(lhs));
      n->kids.push_back(mul_expr());
      lhs = std::move(n);
    }
    return lhs;
  }

  TPtr mul_expr() {
    TPtr lhs = unary_expr();
    while (at(Tok::Star) || at(Tok::Slash)) {
      Token op = eat();
      auto n = std::make_unique<TNode>();
      n->data.kind = NodeKind::Arith;
      n->data.arith = op.kind == Tok::Star ? '*' : '/';
      n->data.line = op.line;
      n->data.col = op.col;
      n->kids.push_back(std::move(lhs));
      n->kids.push_back(unary_expr());
      lhs = std::move(n);
    }
    return lhs;
  }

  TPtr unary_expr() {
    if (at(Tok::Minus)) {
      Token op = eat();
      auto n = std::make_unique<TNode>();
      n->data.kind = NodeKind::Neg;
      n->data.line = op.line;
      n->data.col = op.col;
      n->kids.push_back(unary_expr());
      return n;
    }
    return primary();
  }

  TPtr primary() {
    if (at(Tok::Number)) {
      Token t = eat();
      auto n = std::make_unique<TNode>();
      n->data.kind = NodeKind::Num;
      n->data.num = t.num;
      n->data.line = t.line;
      n->data.col = t.col;
      return n;
    }
    if (at(Tok::Ident)) {
      Token t = eat();
      auto n = std::make_unique<TNode>();
      n->data.kind = NodeKind::Var;
      n->data.name = t.text;
      n->data.line = t.line;
      n->data.col = t.col;
      return n;
    }
    if (at(Tok::KwAbs)) {
      Token t = eat();
      auto n = std::make_unique<TNode>();
      n->data.kind = NodeKind::Abs;
      n->data.line = t.line;
      n->data.col = t.col;
      expect(Tok::LParen, "expected '(' after abs");
      n->kids.push_back(expr());
      expect(Tok::RParen, "expected ')'");
      return n;
    }
    if (at(Tok::LParen)) {
      eat();
      TPtr inner = expr();
      expect(Tok::RParen, "expected ')'");
      return inner;
    }
    fail("expected expression");
  }

  // Pre-order flatten: a node's id is always smaller than its children's.
  int flatten(TNode& t, Program& p) {
    const int id = static_cast<int>(p.nodes.size());
    p.nodes.push_back(t.data);
    for (auto& k : t.kids) {
      const int kid = flatten(*k, p);  // may reallocate p.nodes
      p.nodes[id].kids.push_back(kid);
    }
    return id;
  }

  std::vector<Token> toks_;
  std::size_t idx_ = 0;
};

}  // namespace

Program parse(std::string_view text) {
  Lexer lex(text);
  Parser parser(lex.run());
  return parser.run();
}

namespace {

// Shortest decimal that round-trips; fixed notation for readable magnitudes.
std::string format_number(double x) {
  char buf[64];
  const double ax = std::fabs(x);
  const bool fixed = x == 0.0 || (ax >= 1e-4 && ax < 1e15);
  auto res = std::to_chars(buf, buf + sizeof buf, x,
                           fixed ? std::chars_format::fixed
                                 : std::chars_format::general);
  return std::string(buf, res.ptr);
}

int precedence(const Program& p, int id) {
  switch (p.nodes[id].kind) {
    case NodeKind::Logic:
      return p.nodes[id].logic == LogicOp::Or ? 1 : 2;
    case NodeKind::Not: return 3;
    case NodeKind::Rel: return 4;
    case NodeKind::Arith:
      return (p.nodes[id].arith == '+' || p.nodes[id].arith == '-') ? 5 : 6;
    case NodeKind::Neg: return 7;
    default: return 8;
  }
}

void print_expr(const Program& p, int id, int required, std::string& out) {
  const Node& n = p.nodes[id];
  const int prec = precedence(p, id);
  const bool parens = prec < required;
  if (parens) out += '(';
  switch (n.kind) {
    case NodeKind::Num:
      out += format_number(n.num);
      break;
    case NodeKind::Var:
      out += n.name;
      break;
    case NodeKind::Abs:
      out += "abs(";
      print_expr(p, n.kids[0], 1, out);
      out += ')';
      break;
    case NodeKind::Neg:
      out += '-';
      print_expr(p, n.kids[0], 7, out);
      break;
    case NodeKind::Not:
      out += "not ";
      print_expr(p, n.kids[0], 3, out);
      break;
    case NodeKind::Arith:
      print_expr(p, n.kids[0], prec, out);
      out += ' ';
      out += n.arith;
      out += ' ';
      print_expr(p, n.kids[1], prec + 1, out);
      break;
    case NodeKind::Rel:
      print_expr(p, n.kids[0], 5, out);
      out += ' ';
      out += rel_op_token(n.rel);
      out += ' ';
      print_expr(p, n.kids[1], 5, out);
      break;
    case NodeKind::Logic:
      print_expr(p, n.kids[0], prec, out);
      out += ' ';
      out += logic_op_token(n.logic);
      out += ' ';
      print_expr(p, n.kids[1], prec + 1, out);
      break;
    default:
      break;
  }
  if (parens) out += ')';
}

void print_stmt(const Program& p, int id, int indent, std::string& out) {
  const Node& n = p.nodes[id];
  out.append(indent, ' ');
  if (n.kind == NodeKind::Assign) {
    out += n.name;
    out += " := ";
    print_expr(p, n.kids[0], 1, out);
    out += ";\n";
    return;
  }
  out += "if ";
  print_expr(p, n.kids[0], 1, out);
  out += " then\n";
  for (int i = 0; i < n.n_then; ++i)
    print_stmt(p, n.kids[1 + i], indent + 2, out);
  if (n.has_else) {
    out.append(indent, ' ');
    out += "else\n";
    for (int i = 0; i < n.n_else; ++i)
      print_stmt(p, n.kids[1 + n.n_then + i], indent + 2, out);
  }
  out.append(indent, ' ');
  out += "end\n";
}

bool node_equal(const Program& a, int ia, const Program& b, int ib) {
  const Node& x = a.nodes[ia];
  const Node& y = b.nodes[ib];
  if (x.kind != y.kind || x.kids.size() != y.kids.size()) return false;
  switch (x.kind) {
    case NodeKind::Arith: if (x.arith != y.arith) return false; break;
    case NodeKind::Rel: if (x.rel != y.rel) return false; break;
    case NodeKind::Logic: if (x.logic != y.logic) return false; break;
    case NodeKind::Num: if (x.num != y.num) return false; break;
    case NodeKind::Var:
    case NodeKind::Assign: if (x.name != y.name) return false; break;
    case NodeKind::If:
      if (x.n_then != y.n_then || x.n_else != y.n_else ||
          x.has_else != y.has_else)
        return false;
      break;
    default: break;
  }
  for (std::size_t i = 0; i < x.kids.size(); ++i)
    if (!node_equal(a, x.kids[i], b, y.kids[i])) return false;
  return true;
}

void hash_node(const Program& p, int id, std::size_t& h) {
  auto mix = [&h](std::size_t v) {
    h ^= v + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
  };
  const Node& n = p.nodes[id];
  mix(static_cast<std::size_t>(n.kind));
  switch (n.kind) {
    case NodeKind::Arith: mix(static_cast<std::size_t>(n.arith)); break;
    case NodeKind::Rel: mix(static_cast<std::size_t>(n.rel)); break;
    case NodeKind::Logic: mix(static_cast<std::size_t>(n.logic)); break;
    case NodeKind::Num: mix(std::hash<double>{}(n.num)); break;
    case NodeKind::Var:
    case NodeKind::Assign: mix(std::hash<std::string>{}(n.name)); break;
    case NodeKind::If: mix(static_cast<std::size_t>(n.n_then)); break;
    default: break;
  }
  for (int k : n.kids) hash_node(p, k, h);
}

}  // namespace

std::string pretty_print(const Program& p) {
  std::string out;
  for (int id : p.top) print_stmt(p, id, 0, out);
  return out;
}

bool structurally_equal(const Program& a, const Program& b) {
  if (a.top.size() != b.top.size()) return false;
  for (std::size_t i = 0; i < a.top.size(); ++i)
    if (!node_equal(a, a.top[i], b, b.top[i])) return false;
  return true;
}

std::size_t structural_hash(const Program& p) {
  std::size_t h = p.top.size();
  for (int id : p.top) hash_node(p, id, h);
  return h;
}

}  // namespace mutinv
