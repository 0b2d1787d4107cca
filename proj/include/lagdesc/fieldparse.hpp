#pragma once

// A small expression language for user supplied velocity components.
//
//   expr    := term   (('+' | '-') term)*
//   term    := unary  (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' unary)?          (right associative)
//   primary := number | variable | function '(' expr ')' | '(' expr ')'
//
// Variables: x, y, z, w1..w6, t.
// Functions: sin cos tan tanh exp ln atan sqrt abs.

#include <array>
#include <charconv>
#include <cmath>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <variant>

#include "lagdesc/error.hpp"

namespace lagdesc::fieldparse {

enum class Func { Sin, Cos, Tan, Tanh, Exp, Ln, Atan, Sqrt, Abs };
enum class BinOp { Add, Sub, Mul, Div, Pow };

inline constexpr std::array<std::string_view, 9> kFuncNames = {
    "sin", "cos", "tan", "tanh", "exp", "ln", "atan", "sqrt", "abs"};

inline constexpr std::array<std::string_view, 10> kVariableNames = {
    "x", "y", "z", "w1", "w2", "w3", "w4", "w5", "w6", "t"};

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Number { double value; };
struct Variable { std::string name; };
struct Negate { NodePtr operand; };
struct Binary { BinOp op; NodePtr lhs; NodePtr rhs; };
struct Call { Func func; NodePtr arg; };

struct Node {
  std::variant<Number, Variable, Negate, Binary, Call> data;
};

/// Immutable expression tree. Copies share structure.
class Expr {
 public:
  Expr() = default;
  explicit Expr(NodePtr root) : root_(std::move(root)) {}

  const Node& root() const { return *root_; }
  bool empty() const { return root_ == nullptr; }

 private:
  NodePtr root_;
};

namespace detail {

inline NodePtr make(auto&& payload) {
  return std::make_shared<const Node>(Node{std::forward<decltype(payload)>(payload)});
}

inline bool is_ident_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
inline bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }
inline bool is_digit(char c) { return c >= '0' && c <= '9'; }

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  NodePtr parse_all() {
    skip_ws();
    if (pos_ >= src_.size()) throw SyntaxError(pos_, "empty expression");
    NodePtr e = parse_expr();
    skip_ws();
    if (pos_ != src_.size()) throw SyntaxError(pos_, "unexpected character '" + std::string(1, src_[pos_]) + "'");
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' || src_[pos_] == '\r'))
      ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) throw SyntaxError(pos_, std::string("expected '") + c + "'");
  }

  NodePtr parse_expr() {
    NodePtr lhs = parse_term();
    for (;;) {
      if (accept('+')) lhs = make(Binary{BinOp::Add, lhs, parse_term()});
      else if (accept('-')) lhs = make(Binary{BinOp::Sub, lhs, parse_term()});
      else return lhs;
    }
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_unary();
    for (;;) {
      if (accept('*')) lhs = make(Binary{BinOp::Mul, lhs, parse_unary()});
      else if (accept('/')) lhs = make(Binary{BinOp::Div, lhs, parse_unary()});
      else return lhs;
    }
  }

  NodePtr parse_unary() {
    if (accept('-')) return make(Negate{parse_unary()});
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_primary();
    if (accept('^')) return make(Binary{BinOp::Pow, base, parse_unary()});
    return base;
  }

  NodePtr parse_primary() {
    skip_ws();
    if (pos_ >= src_.size()) throw SyntaxError(pos_, "unexpected end of input");
    const char c = src_[pos_];
    if (accept('(')) {
      NodePtr inner = parse_expr();
      expect(')');
      return inner;
    }
    if (is_digit(c) || c == '.') return parse_number();
    if (is_ident_start(c)) return parse_identifier();
    throw SyntaxError(pos_, "unexpected character '" + std::string(1, c) + "'");
  }

  NodePtr parse_number() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && (is_digit(src_[pos_]) || src_[pos_] == '.')) ++pos_;
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < src_.size() && (src_[look] == '+' || src_[look] == '-')) ++look;
      if (look < src_.size() && is_digit(src_[look])) {
        pos_ = look;
        while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
      }
    }
    double value = 0.0;
    const auto* first = src_.data() + start;
    const auto* last = src_.data() + pos_;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) throw SyntaxError(start, "malformed number");
    return make(Number{value});
  }

  NodePtr parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && is_ident_char(src_[pos_])) ++pos_;
    const std::string_view name = src_.substr(start, pos_ - start);
    for (std::size_t i = 0; i < kFuncNames.size(); ++i) {
      if (kFuncNames[i] == name) {
        if (!accept('(')) throw SyntaxError(pos_, "expected '(' after " + std::string(name));
        NodePtr arg = parse_expr();
        expect(')');
        return make(Call{static_cast<Func>(i), arg});
      }
    }
    for (auto v : kVariableNames)
      if (v == name) return make(Variable{std::string(name)});
    throw Error(ErrorKind::UnknownIdentifier, std::string(name));
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

inline double checked(double v, const char* what) {
  if (!std::isfinite(v)) throw Error(ErrorKind::EvalDomainError, std::string("non-finite result in ") + what);
  return v;
}

template <class Lookup>
double eval_node(const Node& n, const Lookup& lookup) {
  return std::visit(
      [&](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Number>) {
          return d.value;
        } else if constexpr (std::is_same_v<T, Variable>) {
          return lookup(d.name);
        } else if constexpr (std::is_same_v<T, Negate>) {
          return -eval_node(*d.operand, lookup);
        } else if constexpr (std::is_same_v<T, Binary>) {
          const double a = eval_node(*d.lhs, lookup);
          const double b = eval_node(*d.rhs, lookup);
          switch (d.op) {
            case BinOp::Add: return checked(a + b, "+");
            case BinOp::Sub: return checked(a - b, "-");
            case BinOp::Mul: return checked(a * b, "*");
            case BinOp::Div:
              if (b == 0.0) throw Error(ErrorKind::EvalDomainError, "division by zero");
              return checked(a / b, "/");
            case BinOp::Pow: return checked(std::pow(a, b), "^");
          }
          return 0.0;
        } else {
          const double a = eval_node(*d.arg, lookup);
          switch (d.func) {
            case Func::Sin: return checked(std::sin(a), "sin");
            case Func::Cos: return checked(std::cos(a), "cos");
            case Func::Tan: return checked(std::tan(a), "tan");
            case Func::Tanh: return std::tanh(a);
            case Func::Exp: return checked(std::exp(a), "exp");
            case Func::Ln:
              if (a <= 0.0) throw Error(ErrorKind::EvalDomainError, "ln of non-positive value");
              return std::log(a);
            case Func::Atan: return std::atan(a);
            case Func::Sqrt:
              if (a < 0.0) throw Error(ErrorKind::EvalDomainError, "sqrt of negative value");
              return std::sqrt(a);
            case Func::Abs: return std::abs(a);
          }
          return 0.0;
        }
      },
      n.data);
}

// Printing precedence: 1 additive, 2 multiplicative, 3 unary, 4 power, 5 atom.
inline int precedence(const Node& n) {
  return std::visit(
      [](const auto& d) -> int {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Negate>) return 3;
        else if constexpr (std::is_same_v<T, Binary>) {
          switch (d.op) {
            case BinOp::Add:
            case BinOp::Sub: return 1;
            case BinOp::Mul:
            case BinOp::Div: return 2;
            case BinOp::Pow: return 4;
          }
          return 0;
        } else return 5;
      },
      n.data);
}

inline std::string format_number(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

inline void print(const Node& n, std::string& out);

inline void print_wrapped(const Node& n, int min_prec, std::string& out) {
  if (precedence(n) < min_prec) {
    out += '(';
    print(n, out);
    out += ')';
  } else {
    print(n, out);
  }
}

inline void print(const Node& n, std::string& out) {
  std::visit(
      [&](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, Number>) {
          out += format_number(d.value);
        } else if constexpr (std::is_same_v<T, Variable>) {
          out += d.name;
        } else if constexpr (std::is_same_v<T, Negate>) {
          out += '-';
          print_wrapped(*d.operand, 3, out);
        } else if constexpr (std::is_same_v<T, Binary>) {
          switch (d.op) {
            case BinOp::Add:
            case BinOp::Sub:
              print_wrapped(*d.lhs, 1, out);
              out += d.op == BinOp::Add ? " + " : " - ";
              print_wrapped(*d.rhs, 2, out);
              break;
            case BinOp::Mul:
            case BinOp::Div:
              print_wrapped(*d.lhs, 2, out);
              out += d.op == BinOp::Mul ? "*" : "/";
              print_wrapped(*d.rhs, 3, out);
              break;
            case BinOp::Pow:
              print_wrapped(*d.lhs, 5, out);
              out += '^';
              print_wrapped(*d.rhs, 3, out);
              break;
          }
        } else {
          out += kFuncNames[static_cast<std::size_t>(d.func)];
          out += '(';
          print(*d.arg, out);
          out += ')';
        }
      },
      n.data);
}

inline bool equal(const Node& a, const Node& b) {
  if (a.data.index() != b.data.index()) return false;
  return std::visit(
      [&](const auto& da) -> bool {
        using T = std::decay_t<decltype(da)>;
        const auto& db = std::get<T>(b.data);
        if constexpr (std::is_same_v<T, Number>) return da.value == db.value;
        else if constexpr (std::is_same_v<T, Variable>) return da.name == db.name;
        else if constexpr (std::is_same_v<T, Negate>) return equal(*da.operand, *db.operand);
        else if constexpr (std::is_same_v<T, Binary>)
          return da.op == db.op && equal(*da.lhs, *db.lhs) && equal(*da.rhs, *db.rhs);
        else return da.func == db.func && equal(*da.arg, *db.arg);
      },
      a.data);
}

}  // namespace detail

inline Expr parse(std::string_view src) { return Expr(detail::Parser(src).parse_all()); }

/// Evaluates with a caller supplied name -> value lookup.
template <class Lookup>
double eval_with(const Expr& e, const Lookup& lookup) {
  return detail::checked(detail::eval_node(e.root(), lookup), "expression");
}

inline double eval(const Expr& e, const std::map<std::string, double>& bindings) {
  return eval_with(e, [&](const std::string& name) {
    auto it = bindings.find(name);
    if (it == bindings.end()) throw Error(ErrorKind::UnboundVariable, name);
    return it->second;
  });
}

/// Evaluates against parallel name/value spans; linear lookup, intended for a handful of names.
inline double eval(const Expr& e, std::span<const std::string> names, std::span<const double> values) {
  return eval_with(e, [&](const std::string& name) {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return values[i];
    throw Error(ErrorKind::UnboundVariable, name);
  });
}

inline std::string to_string(const Expr& e) {
  std::string out;
  detail::print(e.root(), out);
  return out;
}

inline bool structurally_equal(const Expr& a, const Expr& b) { return detail::equal(a.root(), b.root()); }

}  // namespace lagdesc::fieldparse
