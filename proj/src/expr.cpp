#include "heis/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

namespace heis {

SyntaxError::SyntaxError(const std::string& msg, std::size_t pos)
    : Error(msg + " at position " + std::to_string(pos)), position(pos) {}

namespace {

enum class Tok { number, ident, plus, minus, star, slash, caret, lparen, rparen, comma, end };

struct Token {
  Tok kind;
  std::size_t pos;
  std::string text;
  double value = 0.0;
};

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const unsigned char c = static_cast<unsigned char>(s[i]);
    if (std::isspace(c)) {
      ++i;
      continue;
    }
    // U+2212 MINUS SIGN, common in pasted formulas.
    if (s.substr(i, 3) == "\xE2\x88\x92") {
      out.push_back({Tok::minus, i, "-"});
      i += 3;
      continue;
    }
    if (std::isdigit(c) || c == '.') {
      std::size_t j = i;
      while (j < s.size() && (std::isdigit(static_cast<unsigned char>(s[j])) || s[j] == '.')) ++j;
      if (j < s.size() && (s[j] == 'e' || s[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < s.size() && (s[k] == '+' || s[k] == '-')) ++k;
        if (k < s.size() && std::isdigit(static_cast<unsigned char>(s[k]))) {
          j = k;
          while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
        }
      }
      Token t{Tok::number, i, std::string(s.substr(i, j - i))};
      const auto res = std::from_chars(s.data() + i, s.data() + j, t.value);
      if (res.ec != std::errc() || res.ptr != s.data() + j) throw SyntaxError("malformed number '" + t.text + "'", i);
      out.push_back(std::move(t));
      i = j;
      continue;
    }
    if (std::isalpha(c) || c == '_') {
      std::size_t j = i;
      while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
      out.push_back({Tok::ident, i, std::string(s.substr(i, j - i))});
      i = j;
      continue;
    }
    Tok k;
    switch (c) {
      case '+': k = Tok::plus; break;
      case '-': k = Tok::minus; break;
      case '*': k = Tok::star; break;
      case '/': k = Tok::slash; break;
      case '^': k = Tok::caret; break;
      case '(': k = Tok::lparen; break;
      case ')': k = Tok::rparen; break;
      case ',': k = Tok::comma; break;
      default: throw SyntaxError(std::string("unexpected character '") + s[i] + "'", i);
    }
    out.push_back({k, i, std::string(1, s[i])});
    ++i;
  }
  out.push_back({Tok::end, s.size(), "<end>"});
  return out;
}

using Node = ExprAST::Node;
using Op = ExprAST::Op;

class Parser {
 public:
  Parser(std::vector<Token> toks, int n, std::vector<Node>& nodes) : toks_(std::move(toks)), n_(n), nodes_(nodes) {}

  int parse() {
    const int root = expr();
    if (peek().kind != Tok::end) fail("unexpected token '" + peek().text + "'");
    return root;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& next() { return toks_[pos_++]; }
  [[noreturn]] void fail(const std::string& msg) const { throw SyntaxError(msg, peek().pos); }

  void expect(Tok k, const char* what) {
    if (peek().kind != k) fail(std::string("expected ") + what + ", got '" + peek().text + "'");
    ++pos_;
  }

  int add(Node node) {
    nodes_.push_back(node);
    return static_cast<int>(nodes_.size()) - 1;
  }

  int binary(Op op, int l, int r) { return add(Node{op, 0.0, 0, l, r}); }

  int expr() {
    int lhs = term();
    while (peek().kind == Tok::plus || peek().kind == Tok::minus) {
      const Op op = next().kind == Tok::plus ? Op::add : Op::sub;
      lhs = binary(op, lhs, term());
    }
    return lhs;
  }

  int term() {
    int lhs = factor();
    while (peek().kind == Tok::star || peek().kind == Tok::slash) {
      const Op op = next().kind == Tok::star ? Op::mul : Op::div;
      lhs = binary(op, lhs, factor());
    }
    return lhs;
  }

  int factor() {
    if (peek().kind == Tok::minus) {
      ++pos_;
      return add(Node{Op::neg, 0.0, 0, factor(), -1});
    }
    const int base = atom();
    if (peek().kind != Tok::caret) return base;
    ++pos_;
    double sign = 1.0;
    if (peek().kind == Tok::minus) {
      ++pos_;
      sign = -1.0;
    }
    if (peek().kind != Tok::number) fail("expected number after '^', got '" + peek().text + "'");
    const int ex = add(Node{Op::constant, sign * next().value, 0, -1, -1});
    return binary(Op::pow, base, ex);
  }

  int atom() {
    const Token& tok = peek();
    switch (tok.kind) {
      case Tok::number:
        ++pos_;
        return add(Node{Op::constant, tok.value, 0, -1, -1});
      case Tok::lparen: {
        ++pos_;
        const int e = expr();
        expect(Tok::rparen, "')'");
        return e;
      }
      case Tok::ident: return identifier();
      default: fail("unexpected token '" + tok.text + "'");
    }
  }

  int identifier() {
    const Token tok = next();
    if (peek().kind == Tok::lparen) return call(tok);
    if (tok.text == "t") return add(Node{Op::variable, 0.0, 2 * n_, -1, -1});
    if ((tok.text[0] == 'x' || tok.text[0] == 'y') && tok.text.size() > 1) {
      int idx = 0;
      const auto* first = tok.text.data() + 1;
      const auto* last = tok.text.data() + tok.text.size();
      const auto res = std::from_chars(first, last, idx);
      if (res.ec == std::errc() && res.ptr == last && tok.text[1] != '0') {
        if (idx < 1 || idx > n_)
          throw SyntaxError("variable '" + tok.text + "' out of range for n = " + std::to_string(n_), tok.pos);
        return add(Node{Op::variable, 0.0, (tok.text[0] == 'x' ? 0 : n_) + idx - 1, -1, -1});
      }
    }
    throw SyntaxError("unknown identifier '" + tok.text + "'", tok.pos);
  }

  int call(const Token& fn) {
    Op op;
    int arity;
    if (fn.text == "abs") op = Op::abs, arity = 1;
    else if (fn.text == "sqrt") op = Op::sqrt, arity = 1;
    else if (fn.text == "exp") op = Op::exp, arity = 1;
    else if (fn.text == "max") op = Op::max, arity = 2;
    else if (fn.text == "pow") op = Op::pow, arity = 2;
    else throw SyntaxError("unknown function '" + fn.text + "'", fn.pos);
    expect(Tok::lparen, "'('");
    const int a = expr();
    int b = -1;
    int got = 1;
    if (peek().kind == Tok::comma) {
      ++pos_;
      b = expr();
      got = 2;
    }
    if (got != arity)
      throw SyntaxError("function '" + fn.text + "' takes " + std::to_string(arity) + " argument(s), got " +
                            std::to_string(got),
                        fn.pos);
    expect(Tok::rparen, "')'");
    return add(Node{op, 0.0, 0, a, b});
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  int n_;
  std::vector<Node>& nodes_;
};

}  // namespace

ExprAST parse_expr(std::string_view text, int n) {
  if (n < 1 || n > kMaxDim) throw DimensionError("parse_expr: n out of range");
  ExprAST ast;
  ast.n_ = n;
  Parser parser(tokenize(text), n, ast.nodes_);
  ast.root_ = parser.parse();
  return ast;
}

double ExprAST::eval(const HPoint& p) const {
  if (p.dim() != n_) throw DimensionError("expression expects n = " + std::to_string(n_));
  const double v = eval_node(root_, p);
  if (!std::isfinite(v)) throw DomainError("expression evaluated to a non-finite value at " + heis::to_string(p));
  return v;
}

double ExprAST::eval_node(int idx, const HPoint& p) const {
  const Node& nd = nodes_[static_cast<size_t>(idx)];
  switch (nd.op) {
    case Op::constant: return nd.value;
    case Op::variable:
      if (nd.var < n_) return p.x[nd.var];
      if (nd.var < 2 * n_) return p.y[nd.var - n_];
      return p.t;
    case Op::add: return eval_node(nd.lhs, p) + eval_node(nd.rhs, p);
    case Op::sub: return eval_node(nd.lhs, p) - eval_node(nd.rhs, p);
    case Op::mul: return eval_node(nd.lhs, p) * eval_node(nd.rhs, p);
    case Op::div: {
      const double den = eval_node(nd.rhs, p);
      if (den == 0.0) throw DomainError("division by zero");
      return eval_node(nd.lhs, p) / den;
    }
    case Op::neg: return -eval_node(nd.lhs, p);
    case Op::pow: {
      const double base = eval_node(nd.lhs, p);
      const double ex = eval_node(nd.rhs, p);
      if (base < 0.0 && ex != std::floor(ex)) throw DomainError("non-integer power of a negative base");
      if (base == 0.0 && ex < 0.0) throw DomainError("negative power of zero");
      if (ex == 2.0) return base * base;
      return std::pow(base, ex);
    }
    case Op::abs: return std::abs(eval_node(nd.lhs, p));
    case Op::max: return std::max(eval_node(nd.lhs, p), eval_node(nd.rhs, p));
    case Op::sqrt: {
      const double a = eval_node(nd.lhs, p);
      if (a < 0.0) throw DomainError("sqrt of a negative number");
      return std::sqrt(a);
    }
    case Op::exp: return std::exp(eval_node(nd.lhs, p));
  }
  return 0.0;
}

std::string ExprAST::node_string(int idx) const {
  const Node& nd = nodes_[static_cast<size_t>(idx)];
  auto bin = [&](const char* sym) { return "(" + node_string(nd.lhs) + " " + sym + " " + node_string(nd.rhs) + ")"; };
  switch (nd.op) {
    case Op::constant: {
      std::ostringstream os;
      os.precision(17);
      os << nd.value;
      return os.str();
    }
    case Op::variable:
      if (nd.var < n_) return "x" + std::to_string(nd.var + 1);
      if (nd.var < 2 * n_) return "y" + std::to_string(nd.var - n_ + 1);
      return "t";
    case Op::add: return bin("+");
    case Op::sub: return bin("-");
    case Op::mul: return bin("*");
    case Op::div: return bin("/");
    case Op::neg: return "(-" + node_string(nd.lhs) + ")";
    case Op::pow: return "pow(" + node_string(nd.lhs) + ", " + node_string(nd.rhs) + ")";
    case Op::abs: return "abs(" + node_string(nd.lhs) + ")";
    case Op::max: return "max(" + node_string(nd.lhs) + ", " + node_string(nd.rhs) + ")";
    case Op::sqrt: return "sqrt(" + node_string(nd.lhs) + ")";
    case Op::exp: return "exp(" + node_string(nd.lhs) + ")";
  }
  return "?";
}

std::string ExprAST::to_string() const { return node_string(root_); }

}  // namespace heis
