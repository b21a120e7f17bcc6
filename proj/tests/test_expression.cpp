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

#include <catch2/catch_amalgamated.hpp>

#include "coalflow/coefficient_field.hpp"
#include "coalflow/expression.hpp"

using namespace coalflow;
using Catch::Approx;

namespace {

const char* kSmoothCorpus[] = {
    "0",
    "1",
    "3.5",
    "x",
    "t",
    "pi",
    "1 + 0.3*sin(2*pi*x)",
    "2 - cos(2*pi*x)/3",
    "exp(sin(2*pi*x))",
    "0.5 + 0.25*sin(2*pi*x)*cos(2*pi*x)",
    "1 + 0.1*sin(2*pi*x) + 0.05*cos(4*pi*x)",
    "(1 + 0.2*cos(2*pi*x)) * (2 + sin(2*pi*x))/2",
    "1/(2 + sin(2*pi*x))",
    "t*0 + 3",
    "-sin(2*pi*x)",
    "exp(-t)*sin(2*pi*x)",
    "sin(2*pi*x - t)",
    "2 + sin(2*pi*(x - 0.25))",
    "min(t, 1) + 2",
    "max(1, 2) + abs(t)*0 + x*0 + 1",
};

double fd_derivative(const ExprPtr& e, double t, double x, double step = 1e-5) {
  return (evaluate_expr(e, t, x + step) - evaluate_expr(e, t, x - step)) /
         (2 * step);
}

}  // namespace

TEST_CASE("parse and evaluate basics") {
  CHECK(evaluate_expr(parse_expression("0"), 1.0, 2.0) == 0.0);
  CHECK(evaluate_expr(parse_expression("7"), 0.3, 0.4) == 7.0);
  CHECK(evaluate_expr(parse_expression("x - t"), 2.0, 5.0) == 3.0);
  CHECK(evaluate_expr(parse_expression("1 + 0.3*sin(2*pi*x)"), 0.0, 0.25) ==
        Approx(1.3).margin(1e-12));
  CHECK(evaluate_expr(parse_expression("min(t, x)"), 2.0, 1.0) == 1.0);
  CHECK(evaluate_expr(parse_expression("max(t, x)"), 2.0, 1.0) == 2.0);
  CHECK(evaluate_expr(parse_expression("abs(-x)"), 0.0, 0.5) == 0.5);
  CHECK(evaluate_expr(parse_expression("--x"), 0.0, 0.5) == 0.5);
}

TEST_CASE("syntax errors carry positions") {
  try {
    parse_expression("sin(");
    FAIL("expected SyntaxError");
  } catch (const SyntaxError& e) {
    CHECK(e.position == 4);
  }
  CHECK_THROWS_AS(parse_expression("1 + * 2"), SyntaxError);
  CHECK_THROWS_AS(parse_expression(""), SyntaxError);
  CHECK_THROWS_AS(parse_expression("foo(x)"), UnknownIdentifier);
  CHECK_THROWS_AS(parse_expression("1 + y"), UnknownIdentifier);
}

TEST_CASE("division by zero raises at evaluation") {
  ExprPtr e = parse_expression("1/(x-1)");
  CHECK(evaluate_expr(e, 0.0, 2.0) == 1.0);
  CHECK_THROWS_AS(evaluate_expr(e, 0.0, 1.0), DivisionByZero);
}

TEST_CASE("print-parse round trip is stable") {
  for (const char* s : kSmoothCorpus) {
    ExprPtr once = parse_expression(s);
    ExprPtr twice = parse_expression(print_expression(once));
    CHECK(expr_equal(once, twice));
    // And printing again is a fixed point.
    CHECK(print_expression(once) == print_expression(twice));
  }
}

TEST_CASE("symbolic derivative matches finite differences") {
  for (const char* s : kSmoothCorpus) {
    ExprPtr e = parse_expression(s);
    ExprPtr de = differentiate_x(e);
    for (double t : {0.0, 0.7}) {
      for (double x : {0.05, 0.3, 0.62, 0.9}) {
        double sym = evaluate_expr(de, t, x);
        double num = fd_derivative(e, t, x);
        double scale = std::max(1.0, std::abs(sym));
        CHECK(std::abs(sym - num) / scale < 1e-6);
      }
    }
  }
}

TEST_CASE("derivative of constants and the sin coefficient") {
  CHECK(evaluate_expr(differentiate_x(parse_expression("t*0 + 3")), 0, 0.3) ==
        0.0);
  ExprPtr d = differentiate_x(parse_expression("1 + 0.3*sin(2*pi*x)"));
  CHECK(evaluate_expr(d, 0.0, 0.0) ==
        Approx(0.6 * 3.14159265358979323846).margin(1e-12));
}

TEST_CASE("non-smooth terms over x are rejected") {
  CHECK_THROWS_AS(differentiate_x(parse_expression("abs(x)")),
                  NotDifferentiable);
  CHECK_THROWS_AS(differentiate_x(parse_expression("min(x, 0.5)")),
                  NotDifferentiable);
  CHECK_NOTHROW(differentiate_x(parse_expression("abs(t) + x")));
}

TEST_CASE("validate_field computes bounds") {
  CoefficientField f = validate_field("1", "0", 0.0, 1.0);
  CHECK(f.a_star == 1.0);
  CHECK(f.a_upper == 1.0);
  CHECK(f.b_upper == 0.0);

  CoefficientField g = validate_field("1+0.3*sin(2*pi*x)", "0", 0.0, 1.0, 256);
  CHECK(g.a_star == Approx(0.7).margin(1e-3));
  CHECK(g.a_upper == Approx(1.3).margin(1e-3));
  CHECK(g.a_prime_upper == Approx(0.6 * 3.14159265358979).margin(1e-2));
}

TEST_CASE("validate_field rejects bad fields") {
  CHECK_THROWS_AS(validate_field("x", "0", 0.0, 1.0), NotPeriodic);
  CHECK_THROWS_AS(validate_field("sin(2*pi*x)", "0", 0.0, 1.0),
                  NonPositiveDiffusivity);
  CHECK_THROWS_AS(validate_field("1", "x + t", 0.0, 1.0), NotPeriodic);
  CHECK_THROWS_AS(validate_field("1/(x - x)", "0", 0.0, 1.0),
                  DivisionByZero);
  CHECK_THROWS_AS(validate_field("1", "0", 0.0, 1.0, 4),
                  std::invalid_argument);
}

TEST_CASE("periodic corpus members validate") {
  for (const char* s :
       {"1 + 0.3*sin(2*pi*x)", "2 - cos(2*pi*x)/3", "exp(sin(2*pi*x))"}) {
    CHECK_NOTHROW(validate_field(s, "0.5*cos(2*pi*x)", 0.0, 1.0));
  }
}
