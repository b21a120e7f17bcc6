// Copyright 2026 The Coalflow Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef COALFLOW_EXPRESSION_HPP
#define COALFLOW_EXPRESSION_HPP

#include <cctype>
#include <cmath>
#include <cstdio>
#include <memory>
#include <string>
#include <string_view>

#include "coalflow/errors.hpp"

namespace coalflow {

// Tiny expression language for the coefficient fields a(t,x), b(t,x):
// numbers, variables t and x, pi, + - * /, unary -, sin, cos, exp, abs,
// min, max.  Deliberately closed under d/dx on its smooth subset so the
// spatial derivative of a diffusivity stays symbolic.
enum class ExprKind {
  number,
  var_t,
  var_x,
  pi_const,
  add,
  sub,
  mul,
  divide,
  neg,
  fn_sin,
  fn_cos,
  fn_exp,
  fn_abs,
  fn_min,
  fn_max,
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  ExprKind kind;
  double value = 0.0;  // number only
  ExprPtr a, b;
};

inline ExprPtr make_number(double v) {
  return std::make_shared<Expr>(Expr{ExprKind::number, v, nullptr, nullptr});
}

inline bool is_number(const ExprPtr& e, double v) {
  return e->kind == ExprKind::number && e->value == v;
}

namespace detail {

inline double apply_binary(ExprKind k, double x, double y) {
  switch (k) {
    case ExprKind::add:
      return x + y;
    case ExprKind::sub:
      return x - y;
    case ExprKind::mul:
      return x * y;
    case ExprKind::divide:
      return x / y;
    case ExprKind::fn_min:
      return std::min(x, y);
    case ExprKind::fn_max:
      return std::max(x, y);
    default:
      return 0.0;
  }
}

}  // namespace detail

// Node constructors fold when every child is a literal ("constant folding",
// nothing more); division by a literal zero is left unfolded so it still
// raises at evaluation time.
inline ExprPtr make_binary(ExprKind k, ExprPtr a, ExprPtr b) {
  if (a->kind == ExprKind::number && b->kind == ExprKind::number &&
      !(k == ExprKind::divide && b->value == 0.0)) {
    return make_number(detail::apply_binary(k, a->value, b->value));
  }
  return std::make_shared<Expr>(Expr{k, 0.0, std::move(a), std::move(b)});
}

inline ExprPtr make_unary(ExprKind k, ExprPtr a) {
  if (a->kind == ExprKind::number) {
    switch (k) {
      case ExprKind::neg:
        return make_number(-a->value);
      case ExprKind::fn_sin:
        return make_number(std::sin(a->value));
      case ExprKind::fn_cos:
        return make_number(std::cos(a->value));
      case ExprKind::fn_exp:
        return make_number(std::exp(a->value));
      case ExprKind::fn_abs:
        return make_number(std::abs(a->value));
      default:
        break;
    }
  }
  return std::make_shared<Expr>(Expr{k, 0.0, std::move(a), nullptr});
}

inline double evaluate_expr(const ExprPtr& e, double t, double x) {
  switch (e->kind) {
    case ExprKind::number:
      return e->value;
    case ExprKind::var_t:
      return t;
    case ExprKind::var_x:
      return x;
    case ExprKind::pi_const:
      return 3.14159265358979323846264338327950288;
    case ExprKind::neg:
      return -evaluate_expr(e->a, t, x);
    case ExprKind::fn_sin:
      return std::sin(evaluate_expr(e->a, t, x));
    case ExprKind::fn_cos:
      return std::cos(evaluate_expr(e->a, t, x));
    case ExprKind::fn_exp:
      return std::exp(evaluate_expr(e->a, t, x));
    case ExprKind::fn_abs:
      return std::abs(evaluate_expr(e->a, t, x));
    case ExprKind::divide: {
      double num = evaluate_expr(e->a, t, x);
      double den = evaluate_expr(e->b, t, x);
      if (den == 0.0) throw DivisionByZero("division by zero");
      return num / den;
    }
    default:
      return detail::apply_binary(e->kind, evaluate_expr(e->a, t, x),
                                  evaluate_expr(e->b, t, x));
  }
}

inline bool depends_on_x(const ExprPtr& e) {
  if (e->kind == ExprKind::var_x) return true;
  if (e->a && depends_on_x(e->a)) return true;
  if (e->b && depends_on_x(e->b)) return true;
  return false;
}

inline bool expr_equal(const ExprPtr& a, const ExprPtr& b) {
  if (a->kind != b->kind) return false;
  if (a->kind == ExprKind::number) return a->value == b->value;
  if ((a->a == nullptr) != (b->a == nullptr)) return false;
  if ((a->b == nullptr) != (b->b == nullptr)) return false;
  if (a->a && !expr_equal(a->a, b->a)) return false;
  if (a->b && !expr_equal(a->b, b->b)) return false;
  return true;
}

// Canonical printed form: every binary operation parenthesized, numbers
// printed so they parse back to the same double.
inline std::string print_expression(const ExprPtr& e) {
  switch (e->kind) {
    case ExprKind::number: {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", e->value);
      return buf;
    }
    case ExprKind::var_t:
      return "t";
    case ExprKind::var_x:
      return "x";
    case ExprKind::pi_const:
      return "pi";
    case ExprKind::add:
      return "(" + print_expression(e->a) + " + " + print_expression(e->b) + ")";
    case ExprKind::sub:
      return "(" + print_expression(e->a) + " - " + print_expression(e->b) + ")";
    case ExprKind::mul:
      return "(" + print_expression(e->a) + " * " + print_expression(e->b) + ")";
    case ExprKind::divide:
      return "(" + print_expression(e->a) + " / " + print_expression(e->b) + ")";
    case ExprKind::neg:
      return "(-" + print_expression(e->a) + ")";
    case ExprKind::fn_sin:
      return "sin(" + print_expression(e->a) + ")";
    case ExprKind::fn_cos:
      return "cos(" + print_expression(e->a) + ")";
    case ExprKind::fn_exp:
      return "exp(" + print_expression(e->a) + ")";
    case ExprKind::fn_abs:
      return "abs(" + print_expression(e->a) + ")";
    case ExprKind::fn_min:
      return "min(" + print_expression(e->a) + ", " + print_expression(e->b) + ")";
    case ExprKind::fn_max:
      return "max(" + print_expression(e->a) + ", " + print_expression(e->b) + ")";
  }
  return "";
}

namespace detail {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  ExprPtr parse() {
    if (text_.empty()) throw SyntaxError("empty expression", 0);
    ExprPtr e = parse_sum();
    skip_ws();
    if (pos_ != text_.size()) {
      throw SyntaxError("unexpected input", pos_);
    }
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
  }

  bool peek_is(char c) {
    skip_ws();
    return pos_ < text_.size() && text_[pos_] == c;
  }

  bool consume(char c) {
    if (peek_is(c)) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c, const char* what) {
    if (!consume(c)) throw SyntaxError(std::string("expected ") + what, pos_);
  }

  ExprPtr parse_sum() {
    ExprPtr e = parse_term();
    for (;;) {
      if (consume('+')) {
        e = make_binary(ExprKind::add, e, parse_term());
      } else if (consume('-')) {
        e = make_binary(ExprKind::sub, e, parse_term());
      } else {
        return e;
      }
    }
  }

  ExprPtr parse_term() {
    ExprPtr e = parse_factor();
    for (;;) {
      if (consume('*')) {
        e = make_binary(ExprKind::mul, e, parse_factor());
      } else if (consume('/')) {
        e = make_binary(ExprKind::divide, e, parse_factor());
      } else {
        return e;
      }
    }
  }

  ExprPtr parse_factor() {
    if (consume('-')) {
      return make_unary(ExprKind::neg, parse_factor());
    }
    return parse_primary();
  }

  ExprPtr parse_primary() {
    skip_ws();
    if (pos_ >= text_.size()) throw SyntaxError("unexpected end of input", pos_);
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      ExprPtr e = parse_sum();
      expect(')', "')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      return parse_number();
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      return parse_identifier();
    }
    throw SyntaxError("unexpected character", pos_);
  }

  ExprPtr parse_number() {
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) ||
            text_[pos_] == '.')) {
      ++pos_;
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t mark = pos_;
      ++pos_;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) {
        ++pos_;
      }
      if (pos_ < text_.size() &&
          std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        while (pos_ < text_.size() &&
               std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
          ++pos_;
        }
      } else {
        pos_ = mark;  // bare 'e' is not part of the number
      }
    }
    std::string token(text_.substr(start, pos_ - start));
    try {
      std::size_t used = 0;
      double v = std::stod(token, &used);
      if (used != token.size()) throw std::invalid_argument(token);
      return make_number(v);
    } catch (const std::exception&) {
      throw SyntaxError("bad number '" + token + "'", start);
    }
  }

  ExprPtr parse_identifier() {
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
            text_[pos_] == '_')) {
      ++pos_;
    }
    std::string name(text_.substr(start, pos_ - start));
    if (name == "t") return std::make_shared<Expr>(Expr{ExprKind::var_t});
    if (name == "x") return std::make_shared<Expr>(Expr{ExprKind::var_x});
    if (name == "pi") return std::make_shared<Expr>(Expr{ExprKind::pi_const});
    ExprKind k;
    int arity = 1;
    if (name == "sin") {
      k = ExprKind::fn_sin;
    } else if (name == "cos") {
      k = ExprKind::fn_cos;
    } else if (name == "exp") {
      k = ExprKind::fn_exp;
    } else if (name == "abs") {
      k = ExprKind::fn_abs;
    } else if (name == "min") {
      k = ExprKind::fn_min;
      arity = 2;
    } else if (name == "max") {
      k = ExprKind::fn_max;
      arity = 2;
    } else {
      throw UnknownIdentifier(name, start);
    }
    expect('(', "'(' after function name");
    ExprPtr a = parse_sum();
    if (arity == 2) {
      expect(',', "','");
      ExprPtr b = parse_sum();
      expect(')', "')'");
      return make_binary(k, a, b);
    }
    expect(')', "')'");
    return make_unary(k, a);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline ExprPtr parse_expression(std::string_view text) {
  return detail::Parser(text).parse();
}

// Symbolic d/dx.  abs/min/max over anything involving x is rejected; the
// consumers of derivatives (reversed drift, regime bounds) need smoothness.
inline ExprPtr differentiate_x(const ExprPtr& e) {
  switch (e->kind) {
    case ExprKind::number:
    case ExprKind::var_t:
    case ExprKind::pi_const:
      return make_number(0.0);
    case ExprKind::var_x:
      return make_number(1.0);
    case ExprKind::add:
    case ExprKind::sub: {
      ExprPtr da = differentiate_x(e->a);
      ExprPtr db = differentiate_x(e->b);
      if (is_number(da, 0.0)) {
        return e->kind == ExprKind::add ? db : make_unary(ExprKind::neg, db);
      }
      if (is_number(db, 0.0)) return da;
      return make_binary(e->kind, da, db);
    }
    case ExprKind::mul: {
      ExprPtr da = differentiate_x(e->a);
      ExprPtr db = differentiate_x(e->b);
      ExprPtr left = is_number(da, 0.0)
                         ? make_number(0.0)
                         : (is_number(da, 1.0) ? e->b
                                               : make_binary(ExprKind::mul, da, e->b));
      ExprPtr right = is_number(db, 0.0)
                          ? make_number(0.0)
                          : (is_number(db, 1.0)
                                 ? e->a
                                 : make_binary(ExprKind::mul, e->a, db));
      if (is_number(left, 0.0)) return right;
      if (is_number(right, 0.0)) return left;
      return make_binary(ExprKind::add, left, right);
    }
    case ExprKind::divide: {
      ExprPtr da = differentiate_x(e->a);
      ExprPtr db = differentiate_x(e->b);
      if (is_number(db, 0.0)) {
        if (is_number(da, 0.0)) return make_number(0.0);
        return make_binary(ExprKind::divide, da, e->b);
      }
      ExprPtr num = make_binary(
          ExprKind::sub, make_binary(ExprKind::mul, da, e->b),
          make_binary(ExprKind::mul, e->a, db));
      ExprPtr den = make_binary(ExprKind::mul, e->b, e->b);
      return make_binary(ExprKind::divide, num, den);
    }
    case ExprKind::neg:
      return make_unary(ExprKind::neg, differentiate_x(e->a));
    case ExprKind::fn_sin: {
      ExprPtr du = differentiate_x(e->a);
      if (is_number(du, 0.0)) return make_number(0.0);
      ExprPtr c = make_unary(ExprKind::fn_cos, e->a);
      return is_number(du, 1.0) ? c : make_binary(ExprKind::mul, c, du);
    }
    case ExprKind::fn_cos: {
      ExprPtr du = differentiate_x(e->a);
      if (is_number(du, 0.0)) return make_number(0.0);
      ExprPtr s =
          make_unary(ExprKind::neg, make_unary(ExprKind::fn_sin, e->a));
      return is_number(du, 1.0) ? s : make_binary(ExprKind::mul, s, du);
    }
    case ExprKind::fn_exp: {
      ExprPtr du = differentiate_x(e->a);
      if (is_number(du, 0.0)) return make_number(0.0);
      ExprPtr ex = make_unary(ExprKind::fn_exp, e->a);
      return is_number(du, 1.0) ? ex : make_binary(ExprKind::mul, ex, du);
    }
    case ExprKind::fn_abs:
    case ExprKind::fn_min:
    case ExprKind::fn_max: {
      bool smooth = !depends_on_x(e->a) && (!e->b || !depends_on_x(e->b));
      if (smooth) return make_number(0.0);
      throw NotDifferentiable("abs/min/max over an x-dependent expression");
    }
  }
  return make_number(0.0);
}

}  // namespace coalflow

#endif  // COALFLOW_EXPRESSION_HPP
