#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qam/errors.hpp"

namespace qam {

namespace detail {

inline bool bracket_collapsed(double lo, double hi) {
  const double mid = 0.5 * (lo + hi);
  return mid <= lo || mid >= hi ||
         hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() *
                        std::max({std::abs(lo), std::abs(hi), std::numeric_limits<double>::min()});
}

}  // namespace detail

// Solve phi(x) = y for x in [a, b], phi strictly monotone and continuous.
// Plain bisection: the bracket stays valid by monotonicity, so the answer
// satisfies |phi(x) - y| <= tol * max(1, |y|) or the bracket has shrunk to a
// few ulps around the solution.
template <class F>
double invert_monotone(const F& phi, double y, double a, double b, double tol = 1e-15) {
  if (a > b) std::swap(a, b);
  const double fa = phi(a);
  const double fb = phi(b);
  const double ymin = std::min(fa, fb);
  const double ymax = std::max(fa, fb);
  if (!(y >= ymin && y <= ymax)) {
    std::ostringstream os;
    os.precision(17);
    os << "invert_monotone: target " << y << " outside [" << ymin << ", " << ymax << "]";
    throw RangeError(os.str());
  }
  if (y == fa) return a;
  if (y == fb) return b;
  const bool increasing = fb > fa;
  const double scale = std::max(1.0, std::abs(y));
  double lo = a;
  double hi = b;
  double best = 0.5 * (lo + hi);
  while (!detail::bracket_collapsed(lo, hi)) {
    best = 0.5 * (lo + hi);
    const double r = phi(best) - y;
    if (std::abs(r) <= tol * scale) return best;
    if ((r < 0.0) == increasing) {
      lo = best;
    } else {
      hi = best;
    }
  }
  return 0.5 * (lo + hi);
}

// Root of g on [a, b] given g(a), g(b) of opposite sign, to absolute width xtol.
template <class F>
double bisect_root(const F& g, double a, double b, double xtol = 1e-12) {
  double ga = g(a);
  const double gb = g(b);
  if (ga == 0.0) return a;
  if (gb == 0.0) return b;
  if ((ga < 0.0) == (gb < 0.0)) throw RangeError("bisect_root: no sign change on bracket");
  while (b - a > xtol && !detail::bracket_collapsed(a, b)) {
    const double m = 0.5 * (a + b);
    const double gm = g(m);
    if (gm == 0.0) return m;
    if ((gm < 0.0) == (ga < 0.0)) {
      a = m;
      ga = gm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace qam
