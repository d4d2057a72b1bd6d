#include "pxeig/expr.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cctype>
#include <cmath>
#include <utility>

namespace pxeig {

ExprError::ExprError(const std::string& message, std::size_t position)
    : InputError(message + " at position " + std::to_string(position)), position_(position) {}

Expr Expr::number(double value) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Number;
  n->value = value;
  return Expr(std::move(n));
}

Expr Expr::var_x() {
  auto n = std::make_shared<Node>();
  n->kind = Kind::VarX;
  return Expr(std::move(n));
}

Expr Expr::var_y() {
  auto n = std::make_shared<Node>();
  n->kind = Kind::VarY;
  return Expr(std::move(n));
}

Expr Expr::negate(Expr operand) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Neg;
  n->children.push_back(std::move(operand));
  return Expr(std::move(n));
}

Expr Expr::binary(Kind op, Expr lhs, Expr rhs) {
  auto n = std::make_shared<Node>();
  n->kind = op;
  n->children.push_back(std::move(lhs));
  n->children.push_back(std::move(rhs));
  return Expr(std::move(n));
}

Expr Expr::call(Func f, std::vector<Expr> args) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Call;
  n->func = f;
  n->children = std::move(args);
  return Expr(std::move(n));
}

namespace {

struct FuncInfo {
  std::string_view name;
  Expr::Func func;
  std::size_t arity;
};

constexpr std::array<FuncInfo, 6> kFunctions{{
    {"sin", Expr::Func::Sin, 1},
    {"cos", Expr::Func::Cos, 1},
    {"exp", Expr::Func::Exp, 1},
    {"abs", Expr::Func::Abs, 1},
    {"min", Expr::Func::Min, 2},
    {"max", Expr::Func::Max, 2},
}};

std::string_view func_name(Expr::Func f) {
  for (const auto& info : kFunctions) {
    if (info.func == f) return info.name;
  }
  return "?";
}

double checked(double v, const char* what) {
  if (!std::isfinite(v)) throw DomainError(std::string("non-finite result in ") + what);
  return v;
}

}  // namespace

double Expr::eval(double x, double y) const {
  const Node& n = *node_;
  switch (n.kind) {
    case Kind::Number:
      return n.value;
    case Kind::VarX:
      return x;
    case Kind::VarY:
      return y;
    case Kind::Neg:
      return -n.children[0].eval(x, y);
    case Kind::Add:
      return checked(n.children[0].eval(x, y) + n.children[1].eval(x, y), "addition");
    case Kind::Sub:
      return checked(n.children[0].eval(x, y) - n.children[1].eval(x, y), "subtraction");
    case Kind::Mul:
      return checked(n.children[0].eval(x, y) * n.children[1].eval(x, y), "multiplication");
    case Kind::Div: {
      const double den = n.children[1].eval(x, y);
      if (den == 0.0) throw DomainError("division by zero");
      return checked(n.children[0].eval(x, y) / den, "division");
    }
    case Kind::Pow: {
      const double base = n.children[0].eval(x, y);
      const double expo = n.children[1].eval(x, y);
      if (base == 0.0 && expo < 0.0) throw DomainError("zero raised to a negative power");
      return checked(std::pow(base, expo), "power");
    }
    case Kind::Call: {
      const double a = n.children[0].eval(x, y);
      switch (n.func) {
        case Func::Sin:
          return std::sin(a);
        case Func::Cos:
          return std::cos(a);
        case Func::Exp:
          return checked(std::exp(a), "exp");
        case Func::Abs:
          return std::abs(a);
        case Func::Min:
          return std::min(a, n.children[1].eval(x, y));
        case Func::Max:
          return std::max(a, n.children[1].eval(x, y));
      }
    }
  }
  throw DomainError("corrupt expression node");
}

std::string Expr::to_string() const {
  const Node& n = *node_;
  auto bin = [&](char op) {
    return "(" + n.children[0].to_string() + " " + op + " " + n.children[1].to_string() + ")";
  };
  switch (n.kind) {
    case Kind::Number: {
      std::array<char, 64> buf{};
      auto res = std::to_chars(buf.data(), buf.data() + buf.size(), n.value);
      return std::string(buf.data(), res.ptr);
    }
    case Kind::VarX:
      return "x";
    case Kind::VarY:
      return "y";
    case Kind::Neg:
      return "(-" + n.children[0].to_string() + ")";
    case Kind::Add:
      return bin('+');
    case Kind::Sub:
      return bin('-');
    case Kind::Mul:
      return bin('*');
    case Kind::Div:
      return bin('/');
    case Kind::Pow:
      return bin('^');
    case Kind::Call: {
      std::string out(func_name(n.func));
      out += "(";
      for (std::size_t i = 0; i < n.children.size(); ++i) {
        if (i) out += ", ";
        out += n.children[i].to_string();
      }
      return out + ")";
    }
  }
  return "?";
}

bool Expr::uses_y() const {
  if (node_->kind == Kind::VarY) return true;
  for (const auto& c : node_->children) {
    if (c.uses_y()) return true;
  }
  return false;
}

bool operator==(const Expr& a, const Expr& b) {
  if (a.node_ == b.node_) return true;
  const auto& x = *a.node_;
  const auto& y = *b.node_;
  if (x.kind != y.kind || x.children.size() != y.children.size()) return false;
  if (x.kind == Expr::Kind::Number && x.value != y.value) return false;
  if (x.kind == Expr::Kind::Call && x.func != y.func) return false;
  for (std::size_t i = 0; i < x.children.size(); ++i) {
    if (!(x.children[i] == y.children[i])) return false;
  }
  return true;
}

namespace {

class Parser {
 public:
  Parser(std::string_view src, int dim) : src_(src), dim_(dim) {}

  Expr parse() {
    skip_ws();
    if (pos_ == src_.size()) throw ExprError("empty expression", pos_);
    Expr e = expr();
    skip_ws();
    if (pos_ != src_.size()) throw ExprError("unexpected character '" + std::string(1, src_[pos_]) + "'", pos_);
    return e;
  }

 private:
  Expr expr() {
    Expr lhs = term();
    for (;;) {
      skip_ws();
      if (accept('+')) {
        lhs = Expr::binary(Expr::Kind::Add, std::move(lhs), term());
      } else if (accept('-')) {
        lhs = Expr::binary(Expr::Kind::Sub, std::move(lhs), term());
      } else {
        return lhs;
      }
    }
  }

  Expr term() {
    Expr lhs = power();
    for (;;) {
      skip_ws();
      if (accept('*')) {
        lhs = Expr::binary(Expr::Kind::Mul, std::move(lhs), power());
      } else if (accept('/')) {
        lhs = Expr::binary(Expr::Kind::Div, std::move(lhs), power());
      } else {
        return lhs;
      }
    }
  }

  Expr power() {
    Expr base = unary();
    skip_ws();
    if (accept('^')) return Expr::binary(Expr::Kind::Pow, std::move(base), power());
    return base;
  }

  Expr unary() {
    skip_ws();
    if (accept('-')) return Expr::negate(unary());
    return primary();
  }

  Expr primary() {
    skip_ws();
    if (pos_ == src_.size()) throw ExprError("unexpected end of input", pos_);
    const char c = src_[pos_];
    if (accept('(')) {
      Expr inner = expr();
      expect(')');
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
    throw ExprError("unexpected character '" + std::string(1, c) + "'", pos_);
  }

  Expr number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    };
    digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      digits();
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t save = pos_++;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        digits();
      } else {
        pos_ = save;
      }
    }
    double value = 0.0;
    auto res = std::from_chars(src_.data() + start, src_.data() + pos_, value);
    if (res.ec != std::errc() || res.ptr != src_.data() + pos_) throw ExprError("malformed number", start);
    return Expr::number(value);
  }

  Expr identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) ++pos_;
    const std::string_view name = src_.substr(start, pos_ - start);
    if (name == "x") return Expr::var_x();
    if (name == "y" && dim_ >= 2) return Expr::var_y();
    for (const auto& info : kFunctions) {
      if (info.name != name) continue;
      skip_ws();
      if (!accept('(')) throw ExprError("expected '(' after function '" + std::string(name) + "'", pos_);
      std::vector<Expr> args;
      skip_ws();
      if (!accept(')')) {
        args.push_back(expr());
        skip_ws();
        while (accept(',')) {
          args.push_back(expr());
          skip_ws();
        }
        expect(')');
      }
      if (args.size() != info.arity) {
        throw ExprError("function '" + std::string(name) + "' expects " + std::to_string(info.arity) +
                            " argument(s), got " + std::to_string(args.size()),
                        start);
      }
      return Expr::call(info.func, std::move(args));
    }
    throw ExprError("unknown identifier '" + std::string(name) + "'", start);
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    skip_ws();
    if (!accept(c)) throw ExprError(std::string("expected '") + c + "'", pos_);
  }

  std::string_view src_;
  int dim_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse_expr(std::string_view source, int dim) { return Parser(source, dim).parse(); }

}  // namespace pxeig
