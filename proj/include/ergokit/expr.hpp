#pragma once

// Small expression language for scalar fields in configuration files.
//
// Grammar (lowest to highest precedence):
//
//   expr     := term   (('+' | '-') term)*
//   term     := unary  (('*' | '/') unary)*
//   unary    := '-' unary | power
//   power    := primary ('^' unary)?          right-associative
//   primary  := number | 't' | 'x' digits | name '(' expr (',' expr)* ')'
//             | '(' expr ')'
//
// Functions: exp log sqrt abs tanh (one argument), min max pow (two).
// Variables x1..xd address the state, t the time. There are no user
// functions and no conditionals; set indicators are written as sublevel
// sets of min/max/abs expressions in the config instead.

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ergokit/errors.hpp"

namespace ergokit::dsl {

class ParseError : public InvalidArgument {
public:
  ParseError(const std::string& message, std::size_t offset, std::size_t line,
             std::size_t column);

  std::size_t offset() const { return offset_; }
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

private:
  std::size_t offset_;
  std::size_t line_;
  std::size_t column_;
};

// Raised by evaluation: log of a nonpositive number, negative base with a
// fractional exponent, division by zero, overflow.
class DomainError : public NumericalError {
public:
  DomainError(const std::string& message, std::size_t offset);
  std::size_t offset() const { return offset_; }

private:
  std::size_t offset_;
};

enum class BinaryOp { Add, Sub, Mul, Div, Pow };
enum class Function { Exp, Log, Sqrt, Abs, Tanh, Min, Max, Pow };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Literal {
  double value;
};
// index 0 is t, 1..d are x1..xd.
struct Variable {
  std::size_t index;
};
struct Negate {
  NodePtr operand;
};
struct Binary {
  BinaryOp op;
  NodePtr lhs;
  NodePtr rhs;
};
struct Call {
  Function function;
  std::vector<NodePtr> args;
};

struct Node {
  std::variant<Literal, Variable, Negate, Binary, Call> kind;
  std::size_t offset = 0;  // byte offset of the token that produced the node
};

class Expr {
public:
  static Expr parse(std::string_view source, std::size_t dimension);

  std::size_t dimension() const { return dimension_; }
  const Node& root() const { return *root_; }

  // x.size() must equal dimension().
  double evaluate(std::span<const double> x, double t = 0.0) const;

  // Canonical, fully parenthesized text; parses back to the same tree.
  std::string to_string() const;

  bool structurally_equal(const Expr& other) const;

private:
  Expr(NodePtr root, std::size_t dimension)
      : root_(std::move(root)), dimension_(dimension) {}

  NodePtr root_;
  std::size_t dimension_;
};

// Central difference (e(x + h e_i) - e(x - h e_i)) / 2h, with i zero-based.
double differentiate_fd(const Expr& e, std::span<const double> x, std::size_t i,
                        double h);

}  // namespace ergokit::dsl
