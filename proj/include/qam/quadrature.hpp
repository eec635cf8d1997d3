#pragma once

#include <cmath>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>

#include "qam/errors.hpp"

namespace qam {

struct QuadratureOptions {
  double tol = 1e-10;
  int max_depth = 40;
};

namespace detail {

template <class F>
double checked_sample(const F& phi, double x) {
  const double y = phi(x);
  if (!std::isfinite(y)) {
    std::ostringstream os;
    os << "integrand is not finite at x=" << x;
    throw DomainError(os.str());
  }
  return y;
}

struct SimpsonState {
  int max_depth;
  bool exhausted = false;
};

template <class F>
double simpson_step(const F& phi, double a, double fa, double m, double fm, double b, double fb,
                    double whole, double tol, int depth, SimpsonState& st) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = checked_sample(phi, lm);
  const double frm = checked_sample(phi, rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double both = left + right;
  const double delta = both - whole;
  // Second clause stops refinement once the difference is pure roundoff.
  if (std::abs(delta) <= 15.0 * tol || std::abs(delta) <= 1e-15 * std::abs(both) ||
      !(lm > a && rm < b)) {
    return both + delta / 15.0;
  }
  if (depth >= st.max_depth) {
    st.exhausted = true;
    return both + delta / 15.0;
  }
  return simpson_step(phi, a, fa, lm, flm, m, fm, left, 0.5 * tol, depth + 1, st) +
         simpson_step(phi, m, fm, rm, frm, b, fb, right, 0.5 * tol, depth + 1, st);
}

}  // namespace detail

// Adaptive Simpson quadrature of phi over [a, b] with absolute tolerance.
// Callers split the range at known kinks of phi.
template <class F>
double integrate(const F& phi, double a, double b, QuadratureOptions opts = {}) {
  if (!(opts.tol > 0.0)) throw DomainError("integrate: tolerance must be positive");
  if (a == b) return 0.0;
  if (a > b) return -integrate(phi, b, a, opts);
  const double m = 0.5 * (a + b);
  const double fa = detail::checked_sample(phi, a);
  const double fm = detail::checked_sample(phi, m);
  const double fb = detail::checked_sample(phi, b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  detail::SimpsonState st{opts.max_depth};
  const double q = detail::simpson_step(phi, a, fa, m, fm, b, fb, whole, opts.tol, 0, st);
  if (st.exhausted) {
    std::ostringstream os;
    os << "integrate: subdivision depth " << opts.max_depth << " exhausted on [" << a << ", " << b
       << "]";
    throw AccuracyError(os.str(), q);
  }
  return q;
}

template <class F>
double integrate(const F& phi, double a, double b, double tol) {
  return integrate(phi, a, b, QuadratureOptions{tol, 40});
}

// Fixed 7-point Gauss-Legendre rule on a short, smooth cell.
template <class F>
double gauss_cell(const F& phi, double a, double b) {
  if (a == b) return 0.0;
  return boost::math::quadrature::gauss<double, 7>::integrate(phi, a, b);
}

}  // namespace qam
