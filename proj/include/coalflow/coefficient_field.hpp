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

#ifndef COALFLOW_COEFFICIENT_FIELD_HPP
#define COALFLOW_COEFFICIENT_FIELD_HPP

#include <cmath>
#include <limits>
#include <string>
#include <string_view>

#include "coalflow/errors.hpp"
#include "coalflow/expression.hpp"

namespace coalflow {

// Validated drift/diffusivity pair.  a and b take (t, x), are period 1 in x,
// and a is bounded away from zero on the validation window; a_prime is the
// symbolic spatial derivative of a.  The bounds are grid extrema over the
// validation window, good enough to gate step sizes and disturbance regimes
// but not certified.
struct CoefficientField {
  ExprPtr a;
  ExprPtr b;
  ExprPtr a_prime;
  double lipschitz_estimate = 0.0;
  double a_star = 0.0;         // inf a
  double a_upper = 0.0;        // sup a
  double b_upper = 0.0;        // sup |b|
  double a_prime_upper = 0.0;  // sup |a'|
  double t_lo = 0.0;
  double t_hi = 0.0;

  double eval_a(double t, double x) const { return evaluate_expr(a, t, x); }
  double eval_b(double t, double x) const { return evaluate_expr(b, t, x); }
  double eval_a_prime(double t, double x) const {
    return evaluate_expr(a_prime, t, x);
  }
};

// Checks periodicity in x, positivity of a, and finiteness of a, b, a' on a
// (grid_n x grid_n) grid over [t_lo, t_hi] x [0, 1), and records the grid
// extrema and the largest spatial difference quotient.
inline CoefficientField validate_field(ExprPtr a, ExprPtr b, double t_lo,
                                       double t_hi, int grid_n = 64) {
  if (grid_n < 16) throw std::invalid_argument("grid_n must be >= 16");
  if (!(t_hi >= t_lo)) throw std::invalid_argument("bad validation window");

  CoefficientField f;
  f.a = std::move(a);
  f.b = std::move(b);
  f.a_prime = differentiate_x(f.a);
  f.t_lo = t_lo;
  f.t_hi = t_hi;

  const ExprPtr* exprs[3] = {&f.a, &f.b, &f.a_prime};
  const char* names[3] = {"a", "b", "a'"};

  double a_min = std::numeric_limits<double>::infinity();
  double a_max = -std::numeric_limits<double>::infinity();
  double b_max = 0.0;
  double ap_max = 0.0;
  double lip = 0.0;

  int nt = (t_hi > t_lo) ? grid_n : 1;
  double dx = 1.0 / grid_n;
  for (int it = 0; it < nt; ++it) {
    double t = (nt == 1) ? t_lo : t_lo + (t_hi - t_lo) * it / (nt - 1);
    double prev_a = 0.0, prev_b = 0.0;
    for (int ix = 0; ix <= grid_n; ++ix) {
      double x = ix * dx;
      for (int e = 0; e < 3; ++e) {
        double v = evaluate_expr(*exprs[e], t, x);
        double v1 = evaluate_expr(*exprs[e], t, x + 1.0);
        if (!std::isfinite(v) || !std::isfinite(v1)) {
          throw NotFinite(std::string(names[e]) + " is not finite on the grid");
        }
        if (std::abs(v1 - v) > 1e-9) {
          throw NotPeriodic(std::string(names[e]) +
                            " is not period-1 in x (checked at t=" +
                            std::to_string(t) + ", x=" + std::to_string(x) +
                            ")");
        }
      }
      double va = evaluate_expr(f.a, t, x);
      double vb = evaluate_expr(f.b, t, x);
      double vap = evaluate_expr(f.a_prime, t, x);
      a_min = std::min(a_min, va);
      a_max = std::max(a_max, va);
      b_max = std::max(b_max, std::abs(vb));
      ap_max = std::max(ap_max, std::abs(vap));
      if (ix > 0) {
        lip = std::max(lip, std::abs(va - prev_a) / dx);
        lip = std::max(lip, std::abs(vb - prev_b) / dx);
      }
      prev_a = va;
      prev_b = vb;
    }
  }

  if (!(a_min > 0.0)) {
    throw NonPositiveDiffusivity("a attains " + std::to_string(a_min) +
                                 " on the validation grid");
  }

  f.a_star = a_min;
  f.a_upper = a_max;
  f.b_upper = b_max;
  f.a_prime_upper = ap_max;
  f.lipschitz_estimate = lip;
  return f;
}

inline CoefficientField validate_field(std::string_view a_text,
                                       std::string_view b_text, double t_lo,
                                       double t_hi, int grid_n = 64) {
  return validate_field(parse_expression(a_text), parse_expression(b_text),
                        t_lo, t_hi, grid_n);
}

}  // namespace coalflow

#endif  // COALFLOW_COEFFICIENT_FIELD_HPP
