#pragma once

#include <cmath>
#include <functional>
#include <limits>

namespace lsr {

struct ScalarMinimum {
  double x = 0.0;
  double fx = 0.0;
  int evaluations = 0;
};

/// Bounded Brent minimization (golden section plus safeguarded parabolic
/// steps) on [lo, hi]. Stops once the bracket shrinks below `xatol`; never
/// evaluates outside the open interval.
template <typename F>
ScalarMinimum brent_minimize_bounded(F&& f, double lo, double hi, double xatol = 1e-3,
                                     int max_evaluations = 500) {
  const double sqrt_eps = std::sqrt(std::numeric_limits<double>::epsilon());
  const double golden = 0.5 * (3.0 - std::sqrt(5.0));
  double a = lo, b = hi;
  double v = a + golden * (b - a);  // second best
  double w = v;                     // previous w
  double x = v;                     // best so far
  double e = 0.0, step = 0.0;
  double fx = f(x);
  int evals = 1;
  double fv = fx, fw = fx;
  double xm = 0.5 * (a + b);
  double tol1 = sqrt_eps * std::abs(x) + xatol / 3.0;
  double tol2 = 2.0 * tol1;

  while (std::abs(x - xm) > tol2 - 0.5 * (b - a)) {
    bool take_golden = true;
    if (std::abs(e) > tol1) {
      take_golden = false;
      double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::abs(q);
      r = e;
      e = step;
      if (std::abs(p) < std::abs(0.5 * q * r) && p > q * (a - x) && p < q * (b - x)) {
        step = p / q;
        const double u = x + step;
        if (u - a < tol2 || b - u < tol2) step = xm - x >= 0 ? tol1 : -tol1;
      } else {
        take_golden = true;
      }
    }
    if (take_golden) {
      e = x >= xm ? a - x : b - x;
      step = golden * e;
    }
    const double sign = step >= 0 ? 1.0 : -1.0;
    const double u = x + sign * std::max(std::abs(step), tol1);
    const double fu = f(u);
    ++evals;
    if (fu <= fx) {
      if (u >= x)
        a = x;
      else
        b = x;
      v = w;
      fv = fw;
      w = x;
      fw = fx;
      x = u;
      fx = fu;
    } else {
      if (u < x)
        a = u;
      else
        b = u;
      if (fu <= fw || w == x) {
        v = w;
        fv = fw;
        w = u;
        fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u;
        fv = fu;
      }
    }
    xm = 0.5 * (a + b);
    tol1 = sqrt_eps * std::abs(x) + xatol / 3.0;
    tol2 = 2.0 * tol1;
    if (evals >= max_evaluations) break;
  }
  return {x, fx, evals};
}

}  // namespace lsr
