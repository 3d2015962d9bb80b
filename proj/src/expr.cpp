#include "ergokit/expr.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <optional>
#include <utility>

namespace ergokit::dsl {

ParseError::ParseError(const std::string& message, std::size_t offset, std::size_t line,
                       std::size_t column)
    : InvalidArgument("parse error at offset " + std::to_string(offset) + " (line " +
                      std::to_string(line) + ", column " + std::to_string(column) +
                      "): " + message),
      offset_(offset),
      line_(line),
      column_(column) {}

DomainError::DomainError(const std::string& message, std::size_t offset)
    : NumericalError("domain error at offset " + std::to_string(offset) + ": " + message),
      offset_(offset) {}

namespace {

struct FunctionInfo {
  std::string_view name;
  Function function;
  std::size_t arity;
};

constexpr std::array<FunctionInfo, 8> kFunctions{{
    {"exp", Function::Exp, 1},
    {"log", Function::Log, 1},
    {"sqrt", Function::Sqrt, 1},
    {"abs", Function::Abs, 1},
    {"tanh", Function::Tanh, 1},
    {"min", Function::Min, 2},
    {"max", Function::Max, 2},
    {"pow", Function::Pow, 2},
}};

std::string_view function_name(Function f) {
  for (const auto& info : kFunctions) {
    if (info.function == f) return info.name;
  }
  return "?";
}

enum class TokenKind { Number, Identifier, Plus, Minus, Star, Slash, Caret, LParen, RParen, Comma, End };

struct Token {
  TokenKind kind;
  std::size_t offset;
  std::string_view text;
  double number = 0.0;
};

class Parser {
public:
  Parser(std::string_view source, std::size_t dimension)
      : source_(source), dimension_(dimension) {
    advance();
  }

  NodePtr parse_all() {
    auto node = parse_expr();
    if (current_.kind != TokenKind::End) fail("unexpected '" + std::string(current_.text) + "'");
    return node;
  }

private:
  [[noreturn]] void fail(const std::string& message) const { fail_at(message, current_.offset); }

  [[noreturn]] void fail_at(const std::string& message, std::size_t offset) const {
    std::size_t line = 1;
    std::size_t column = 1;
    for (std::size_t i = 0; i < offset && i < source_.size(); ++i) {
      if (source_[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ParseError(message, offset, line, column);
  }

  static bool is_digit(char c) { return c >= '0' && c <= '9'; }
  static bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }

  void advance() {
    while (pos_ < source_.size() &&
           (source_[pos_] == ' ' || source_[pos_] == '\t' || source_[pos_] == '\n' || source_[pos_] == '\r')) {
      ++pos_;
    }
    const std::size_t start = pos_;
    if (pos_ >= source_.size()) {
      current_ = {TokenKind::End, start, "end of input"};
      return;
    }
    const char c = source_[pos_];
    if (is_digit(c) || (c == '.' && pos_ + 1 < source_.size() && is_digit(source_[pos_ + 1]))) {
      lex_number(start);
      return;
    }
    if (is_alpha(c)) {
      while (pos_ < source_.size() && (is_alpha(source_[pos_]) || is_digit(source_[pos_]))) ++pos_;
      current_ = {TokenKind::Identifier, start, source_.substr(start, pos_ - start)};
      return;
    }
    TokenKind kind;
    switch (c) {
      case '+': kind = TokenKind::Plus; break;
      case '-': kind = TokenKind::Minus; break;
      case '*': kind = TokenKind::Star; break;
      case '/': kind = TokenKind::Slash; break;
      case '^': kind = TokenKind::Caret; break;
      case '(': kind = TokenKind::LParen; break;
      case ')': kind = TokenKind::RParen; break;
      case ',': kind = TokenKind::Comma; break;
      default:
        current_ = {TokenKind::End, start, source_.substr(start, 1)};
        fail("unexpected character '" + std::string(1, c) + "'");
    }
    ++pos_;
    current_ = {kind, start, source_.substr(start, 1)};
  }

  void lex_number(std::size_t start) {
    while (pos_ < source_.size() && is_digit(source_[pos_])) ++pos_;
    if (pos_ < source_.size() && source_[pos_] == '.') {
      ++pos_;
      while (pos_ < source_.size() && is_digit(source_[pos_])) ++pos_;
    }
    if (pos_ < source_.size() && (source_[pos_] == 'e' || source_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < source_.size() && (source_[p] == '+' || source_[p] == '-')) ++p;
      if (p < source_.size() && is_digit(source_[p])) {
        pos_ = p;
        while (pos_ < source_.size() && is_digit(source_[pos_])) ++pos_;
      }
    }
    const auto text = source_.substr(start, pos_ - start);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    current_ = {TokenKind::Number, start, text, value};
    if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value)) {
      fail("numeric literal out of range");
    }
  }

  static NodePtr make(Node node) { return std::make_shared<const Node>(std::move(node)); }

  NodePtr parse_expr() {
    auto lhs = parse_term();
    while (current_.kind == TokenKind::Plus || current_.kind == TokenKind::Minus) {
      const auto op = current_.kind == TokenKind::Plus ? BinaryOp::Add : BinaryOp::Sub;
      const auto offset = current_.offset;
      advance();
      auto rhs = parse_term();
      lhs = make({Binary{op, std::move(lhs), std::move(rhs)}, offset});
    }
    return lhs;
  }

  NodePtr parse_term() {
    auto lhs = parse_unary();
    while (current_.kind == TokenKind::Star || current_.kind == TokenKind::Slash) {
      const auto op = current_.kind == TokenKind::Star ? BinaryOp::Mul : BinaryOp::Div;
      const auto offset = current_.offset;
      advance();
      auto rhs = parse_unary();
      lhs = make({Binary{op, std::move(lhs), std::move(rhs)}, offset});
    }
    return lhs;
  }

  NodePtr parse_unary() {
    if (current_.kind == TokenKind::Minus) {
      const auto offset = current_.offset;
      advance();
      return make({Negate{parse_unary()}, offset});
    }
    return parse_power();
  }

  NodePtr parse_power() {
    auto base = parse_primary();
    if (current_.kind == TokenKind::Caret) {
      const auto offset = current_.offset;
      advance();
      auto exponent = parse_unary();
      return make({Binary{BinaryOp::Pow, std::move(base), std::move(exponent)}, offset});
    }
    return base;
  }

  NodePtr parse_primary() {
    const Token token = current_;
    switch (token.kind) {
      case TokenKind::Number:
        advance();
        return make({Literal{token.number}, token.offset});
      case TokenKind::LParen: {
        advance();
        auto inner = parse_expr();
        if (current_.kind != TokenKind::RParen) fail("expected ')'");
        advance();
        return inner;
      }
      case TokenKind::Identifier:
        advance();
        if (current_.kind == TokenKind::LParen) return parse_call(token);
        return make({Variable{variable_index(token)}, token.offset});
      case TokenKind::End:
        fail("unexpected end of input");
      default:
        fail("unexpected '" + std::string(token.text) + "'");
    }
  }

  std::size_t variable_index(const Token& token) const {
    const auto name = token.text;
    if (name == "t") return 0;
    if (name.size() >= 2 && name[0] == 'x') {
      std::size_t index = 0;
      const auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), index);
      if (ec == std::errc() && ptr == name.data() + name.size()) {
        if (index == 0 || index > dimension_) {
          fail_at("variable '" + std::string(name) + "' out of range for dimension " +
                      std::to_string(dimension_),
                  token.offset);
        }
        return index;
      }
    }
    fail_at("unknown identifier '" + std::string(name) + "'", token.offset);
  }

  NodePtr parse_call(const Token& name) {
    const FunctionInfo* info = nullptr;
    for (const auto& candidate : kFunctions) {
      if (candidate.name == name.text) info = &candidate;
    }
    if (info == nullptr) fail_at("unknown function '" + std::string(name.text) + "'", name.offset);
    advance();  // '('
    std::vector<NodePtr> args;
    args.push_back(parse_expr());
    while (current_.kind == TokenKind::Comma) {
      advance();
      args.push_back(parse_expr());
    }
    if (current_.kind != TokenKind::RParen) fail("expected ')' or ','");
    advance();
    if (args.size() != info->arity) {
      fail_at(std::string(info->name) + " takes " + std::to_string(info->arity) +
                  " argument(s), got " + std::to_string(args.size()),
              name.offset);
    }
    return make({Call{info->function, std::move(args)}, name.offset});
  }

  std::string_view source_;
  std::size_t dimension_;
  std::size_t pos_ = 0;
  Token current_{TokenKind::End, 0, ""};
};

double checked(double value, std::size_t offset) {
  if (!std::isfinite(value)) throw DomainError("non-finite result", offset);
  return value;
}

double power(double base, double exponent, std::size_t offset) {
  if (base < 0.0 && std::trunc(exponent) != exponent) {
    throw DomainError("negative base with non-integer exponent", offset);
  }
  if (base == 0.0 && exponent < 0.0) throw DomainError("zero raised to a negative power", offset);
  return checked(std::pow(base, exponent), offset);
}

double eval(const Node& node, std::span<const double> x, double t) {
  return std::visit(
      [&](const auto& n) -> double {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Literal>) {
          return n.value;
        } else if constexpr (std::is_same_v<T, Variable>) {
          return n.index == 0 ? t : x[n.index - 1];
        } else if constexpr (std::is_same_v<T, Negate>) {
          return -eval(*n.operand, x, t);
        } else if constexpr (std::is_same_v<T, Binary>) {
          const double a = eval(*n.lhs, x, t);
          const double b = eval(*n.rhs, x, t);
          switch (n.op) {
            case BinaryOp::Add: return checked(a + b, node.offset);
            case BinaryOp::Sub: return checked(a - b, node.offset);
            case BinaryOp::Mul: return checked(a * b, node.offset);
            case BinaryOp::Div:
              if (b == 0.0) throw DomainError("division by zero", node.offset);
              return checked(a / b, node.offset);
            case BinaryOp::Pow: return power(a, b, node.offset);
          }
          return 0.0;
        } else {
          const double a = eval(*n.args[0], x, t);
          switch (n.function) {
            case Function::Exp: return checked(std::exp(a), node.offset);
            case Function::Log:
              if (a <= 0.0) throw DomainError("log of a nonpositive number", node.offset);
              return std::log(a);
            case Function::Sqrt:
              if (a < 0.0) throw DomainError("sqrt of a negative number", node.offset);
              return std::sqrt(a);
            case Function::Abs: return std::abs(a);
            case Function::Tanh: return std::tanh(a);
            case Function::Min: return std::min(a, eval(*n.args[1], x, t));
            case Function::Max: return std::max(a, eval(*n.args[1], x, t));
            case Function::Pow: return power(a, eval(*n.args[1], x, t), node.offset);
          }
          return 0.0;
        }
      },
      node.kind);
}

void print(const Node& node, std::string& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Literal>) {
          std::array<char, 32> buf{};
          const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), n.value);
          out.append(buf.data(), ptr);
        } else if constexpr (std::is_same_v<T, Variable>) {
          out += n.index == 0 ? std::string("t") : "x" + std::to_string(n.index);
        } else if constexpr (std::is_same_v<T, Negate>) {
          out += "(-";
          print(*n.operand, out);
          out += ")";
        } else if constexpr (std::is_same_v<T, Binary>) {
          static constexpr std::array<const char*, 5> kOps{" + ", " - ", " * ", " / ", " ^ "};
          out += "(";
          print(*n.lhs, out);
          out += kOps[static_cast<std::size_t>(n.op)];
          print(*n.rhs, out);
          out += ")";
        } else {
          out += function_name(n.function);
          out += "(";
          for (std::size_t i = 0; i < n.args.size(); ++i) {
            if (i > 0) out += ", ";
            print(*n.args[i], out);
          }
          out += ")";
        }
      },
      node.kind);
}

bool equal(const Node& a, const Node& b) {
  if (a.kind.index() != b.kind.index()) return false;
  return std::visit(
      [&](const auto& na) -> bool {
        using T = std::decay_t<decltype(na)>;
        const auto& nb = std::get<T>(b.kind);
        if constexpr (std::is_same_v<T, Literal>) {
          return na.value == nb.value;
        } else if constexpr (std::is_same_v<T, Variable>) {
          return na.index == nb.index;
        } else if constexpr (std::is_same_v<T, Negate>) {
          return equal(*na.operand, *nb.operand);
        } else if constexpr (std::is_same_v<T, Binary>) {
          return na.op == nb.op && equal(*na.lhs, *nb.lhs) && equal(*na.rhs, *nb.rhs);
        } else {
          if (na.function != nb.function || na.args.size() != nb.args.size()) return false;
          for (std::size_t i = 0; i < na.args.size(); ++i) {
            if (!equal(*na.args[i], *nb.args[i])) return false;
          }
          return true;
        }
      },
      a.kind);
}

}  // namespace

Expr Expr::parse(std::string_view source, std::size_t dimension) {
  Parser parser(source, dimension);
  return Expr(parser.parse_all(), dimension);
}

double Expr::evaluate(std::span<const double> x, double t) const {
  if (x.size() != dimension_) {
    throw InvalidArgument("expression of dimension " + std::to_string(dimension_) +
                          " evaluated at a point of dimension " + std::to_string(x.size()));
  }
  return eval(*root_, x, t);
}

std::string Expr::to_string() const {
  std::string out;
  print(*root_, out);
  return out;
}

bool Expr::structurally_equal(const Expr& other) const {
  return dimension_ == other.dimension_ && equal(*root_, *other.root_);
}

double differentiate_fd(const Expr& e, std::span<const double> x, std::size_t i, double h) {
  if (i >= e.dimension()) throw InvalidArgument("differentiation index out of range");
  if (!(h > 0.0)) throw InvalidArgument("finite-difference step must be positive");
  std::vector<double> shifted(x.begin(), x.end());
  shifted[i] = x[i] + h;
  const double up = e.evaluate(shifted);
  shifted[i] = x[i] - h;
  const double down = e.evaluate(shifted);
  return (up - down) / (2.0 * h);
}

}  // namespace ergokit::dsl
