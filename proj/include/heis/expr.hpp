#pragma once

// Expression language for user-supplied functions on H^n.
//
//   expr   := term (('+' | '-') term)*
//   term   := factor (('*' | '/') factor)*
//   factor := '-' factor | atom ('^' number)?
//   atom   := number | variable | function '(' expr (',' expr)? ')' | '(' expr ')'
//
// Variables are x1..xn, y1..yn and t. Functions: abs, sqrt, exp (one argument),
// max, pow (two arguments).

#include "heis/core.hpp"

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace heis {

struct SyntaxError : Error {
  SyntaxError(const std::string& msg, std::size_t pos);
  std::size_t position;
};

class ExprAST {
 public:
  enum class Op { constant, variable, add, sub, mul, div, neg, pow, abs, max, sqrt, exp };

  struct Node {
    Op op = Op::constant;
    double value = 0.0;  // constant
    int var = 0;         // variable index into (x1..xn, y1..yn, t)
    int lhs = -1;
    int rhs = -1;
  };

  int dim() const { return n_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  int root() const { return root_; }

  // Throws DomainError on division by zero, sqrt of a negative number,
  // non-integer power of a negative base, or a non-finite result.
  double eval(const HPoint& p) const;

  std::string to_string() const;

 private:
  friend ExprAST parse_expr(std::string_view text, int n);
  double eval_node(int idx, const HPoint& p) const;
  std::string node_string(int idx) const;

  int n_ = 1;
  int root_ = -1;
  std::vector<Node> nodes_;
};

ExprAST parse_expr(std::string_view text, int n);

}  // namespace heis
