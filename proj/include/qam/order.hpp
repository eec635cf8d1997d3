#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qam/errors.hpp"
#include "qam/generator.hpp"
#include "qam/interval.hpp"
#include "qam/quadrature.hpp"
#include "qam/root.hpp"

namespace qam {

inline constexpr double kVerdictTol = 1e-9;

enum class Verdict { Less, Greater, Equal, Incomparable };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Less:
      return "Less";
    case Verdict::Greater:
      return "Greater";
    case Verdict::Equal:
      return "Equal";
    case Verdict::Incomparable:
      return "Incomparable";
  }
  return "?";
}

// Outcome of a comparability test between generators f and g. `Less` means
// f ≺ g. `margin` is the minimum of the gap function d over the grid; d is
// always expressed in index units, approximately A_g - A_f.
struct ComparisonResult {
  Verdict verdict = Verdict::Equal;
  std::optional<double> witness;
  double margin = 0.0;
  std::vector<double> points;
  std::vector<double> gaps;
};

// Verdict from gap samples d_i at points x_i.
inline ComparisonResult classify(std::vector<double> xs, std::vector<double> d, double tol) {
  ComparisonResult r;
  if (d.empty()) throw DomainError("comparison needs at least one interior sample");
  bool any_pos = false;
  bool any_neg = false;
  std::size_t imin = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (std::isnan(d[i])) throw DomainError("comparison gap is NaN");
    any_pos = any_pos || d[i] > tol;
    any_neg = any_neg || d[i] < -tol;
    if (d[i] < d[imin]) imin = i;
  }
  r.margin = d[imin];
  if (any_pos && any_neg) {
    r.verdict = Verdict::Incomparable;
    r.witness = xs[imin];
  } else if (any_pos) {
    r.verdict = Verdict::Less;
  } else if (any_neg) {
    r.verdict = Verdict::Greater;
  } else {
    r.verdict = Verdict::Equal;
  }
  r.points = std::move(xs);
  r.gaps = std::move(d);
  return r;
}

namespace detail {

inline void require_same_interval(const Generator& f, const Generator& g) {
  if (!f.interval().same_as(g.interval())) {
    std::ostringstream os;
    os << "interval mismatch: " << f.name() << " on [" << f.interval().work_lo() << ", "
       << f.interval().work_hi() << "] vs " << g.name() << " on [" << g.interval().work_lo() << ", "
       << g.interval().work_hi() << "]";
    throw DomainError(os.str());
  }
}

inline Grid comparison_grid(const Generator& f, const Generator& g, const Grid& grid) {
  std::vector<double> k = f.kinks();
  const auto kg = g.kinks();
  k.insert(k.end(), kg.begin(), kg.end());
  return with_points(grid, k);
}

}  // namespace detail

// Mikusiński-type test: f ≺ g iff A_f <= A_g on the interval.
inline ComparisonResult compare_index(const Generator& f, const Generator& g, const Grid& grid,
                                      double tol = kVerdictTol) {
  require_sm(f, "compare_index");
  require_sm(g, "compare_index");
  detail::require_same_interval(f, g);
  const Grid pts = detail::comparison_grid(f, g, grid);
  std::vector<double> d(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) d[i] = g.index_at(pts[i]) - f.index_at(pts[i]);
  return classify(pts.points(), std::move(d), tol);
}

// f ≺ g iff g∘f^{-1} is convex (g increasing) or concave (g decreasing).
// Tested through slopes of g∘f^{-1} between consecutive image points
// y_i = f(x_i); no inversion is needed since f^{-1}(y_i) = x_i. The relative
// change in slope per unit x approximates A_g - A_f.
inline ComparisonResult compare_convexity(const Generator& f, const Generator& g, const Grid& grid,
                                          double tol = kVerdictTol) {
  detail::require_same_interval(f, g);
  const Grid pts = detail::comparison_grid(f, g, grid);
  if (pts.size() < 3) throw DomainError("compare_convexity needs at least 3 grid points");
  std::vector<double> xs = pts.points();
  if (!f.increasing()) std::reverse(xs.begin(), xs.end());  // ascending in y
  const std::size_t n = xs.size();
  std::vector<double> y(n), u(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = f.value(xs[i]);
    u[i] = g.value(xs[i]);
  }
  std::vector<double> slope(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) slope[i] = (u[i + 1] - u[i]) / (y[i + 1] - y[i]);
  const double kappa = g.increasing() ? 1.0 : -1.0;
  std::vector<double> at, d;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double scale = 0.5 * (std::abs(slope[i]) + std::abs(slope[i - 1]));
    const double dx = 0.5 * std::abs(xs[i + 1] - xs[i - 1]);
    const double diff = slope[i] - slope[i - 1];
    at.push_back(xs[i]);
    d.push_back(scale > 0.0 ? kappa * diff / (scale * dx) : 0.0);
  }
  if (!f.increasing()) {
    std::reverse(at.begin(), at.end());
    std::reverse(d.begin(), d.end());
  }
  return classify(std::move(at), std::move(d), tol);
}

// f ≺ g iff g'/f' is nondecreasing (same monotonicity) or nonincreasing
// (opposite monotonicity).
inline ComparisonResult compare_ratio(const Generator& f, const Generator& g, const Grid& grid,
                                      double tol = kVerdictTol) {
  for (const Generator* h : {&f, &g}) {
    if (!h->smoothness().has_deriv1() || !h->smoothness().nonvanishing)
      throw CapabilityError("compare_ratio: " + h->name() + " needs a nonvanishing first derivative");
  }
  detail::require_same_interval(f, g);
  const Grid pts = detail::comparison_grid(f, g, grid);
  if (pts.size() < 3) throw DomainError("compare_ratio needs at least 3 grid points");
  const std::size_t n = pts.size();
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = g.deriv1(pts[i]) / f.deriv1(pts[i]);
  const double sigma = f.increasing() == g.increasing() ? 1.0 : -1.0;
  std::vector<double> at, d;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    at.push_back(pts[i]);
    d.push_back(sigma * (r[i + 1] - r[i - 1]) / (std::abs(r[i]) * (pts[i + 1] - pts[i - 1])));
  }
  return classify(std::move(at), std::move(d), tol);
}

// ---------------------------------------------------------------------------
// Lower (bilateral) Dini derivative.

// A continuous, piecewise-C1 scalar function on the open domain (lo, hi).
// `derivative` is optional; without it one-sided derivatives are estimated by
// Richardson-extrapolated one-sided difference quotients.
struct KinkedFunction {
  std::function<double(double)> value;
  std::vector<double> kinks;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  std::function<double(double, Side)> derivative;

  double one_sided(double x, Side side) const {
    if (derivative) return derivative(x, side);
    const double h = 1e-5 * std::max(1.0, std::abs(x));
    const double s = side == Side::Left ? -1.0 : 1.0;
    auto q = [&](double step) { return (value(x + s * step) - value(x)) / (s * step); };
    return 2.0 * q(0.5 * h) - q(h);
  }
};

// liminf_{t -> x} (φ(t) - φ(x)) / (t - x). At a kink with finite one-sided
// derivatives this is the smaller of the two.
inline double lower_dini(const KinkedFunction& phi, double x) {
  if (!(x > phi.lo && x < phi.hi)) {
    std::ostringstream os;
    os << "lower_dini: x=" << x << " is not an interior point";
    throw DomainError(os.str());
  }
  const double tol = 1e-12 * std::max(1.0, std::abs(x));
  for (double z : phi.kinks) {
    if (std::abs(x - z) <= tol) return std::min(phi.one_sided(z, Side::Left), phi.one_sided(z, Side::Right));
  }
  if (phi.derivative) return phi.derivative(x, Side::Both);
  return std::min(phi.one_sided(x, Side::Left), phi.one_sided(x, Side::Right));
}

// k' of a generator as a kinked function (its own kinks are k's index kinks).
inline KinkedFunction derivative_function(const Generator& k) {
  const Interval& iv = k.interval();
  return KinkedFunction{[k](double x) { return k.deriv1(x); }, k.kinks(), iv.work_lo(), iv.work_hi(),
                        [k](double x, Side s) { return k.deriv2(x, s); }};
}

struct C2C1Result {
  bool holds = false;
  double margin = 0.0;  // min over points of Dk'/k' - A_f
  std::optional<double> worst_point;

  explicit operator bool() const noexcept { return holds; }
};

// Mixed-smoothness comparison: for f in S_m and an increasing C1 generator k
// with nonvanishing derivative, A^[f] <= A^[k] iff
// A_f(x) <= D(k')(x) / k'(x) everywhere, D the lower Dini derivative.
inline C2C1Result c2c1_compare(const Generator& f, const Generator& k, const Grid& grid,
                               double tol = kVerdictTol) {
  require_sm(f, "c2c1_compare");
  if (!k.smoothness().c1 || !k.smoothness().nonvanishing || !k.smoothness().has_deriv2())
    throw CapabilityError("c2c1_compare: " + k.name() +
                          " must be C1 with nonvanishing derivative and one-sided second derivatives");
  if (!k.increasing())
    throw CapabilityError("c2c1_compare: " + k.name() + " is decreasing; negate it first (affine(k, -1, 0))");
  detail::require_same_interval(f, k);
  const Grid pts = detail::comparison_grid(f, k, grid);
  const KinkedFunction dk = derivative_function(k);
  const Interval& iv = k.interval();
  C2C1Result r;
  r.margin = std::numeric_limits<double>::infinity();
  for (double x : pts) {
    double dini;
    if (x <= iv.work_lo()) {
      dini = k.deriv2(x, Side::Right);
    } else if (x >= iv.work_hi()) {
      dini = k.deriv2(x, Side::Left);
    } else {
      dini = lower_dini(dk, x);
    }
    const double gap = dini / k.deriv1(x) - f.index_at(x);
    if (gap < r.margin) {
      r.margin = gap;
      r.worst_point = x;
    }
  }
  r.holds = r.margin >= -tol;
  return r;
}

// ---------------------------------------------------------------------------
// Diagnostics.

struct PalesOptions {
  std::size_t subgrid = 12;
};

// max over distinct sub-grid triples (x, y, z) of
// |(f(x)-f(z))/(f(y)-f(z)) - (g(x)-g(z))/(g(y)-g(z))|. Zero iff f ~ g on the
// sub-grid; also used to witness convergence of means.
inline double pales_distance(const Generator& f, const Generator& g, const Grid& grid, PalesOptions opts = {}) {
  if (grid.size() < 3) throw DomainError("pales_distance needs at least 3 grid points");
  const std::size_t m = std::max<std::size_t>(3, std::min(opts.subgrid, grid.size()));
  std::vector<double> fx(m), gx(m);
  for (std::size_t j = 0; j < m; ++j) {
    const auto idx = static_cast<std::size_t>(
        std::llround(static_cast<double>(j) * static_cast<double>(grid.size() - 1) / static_cast<double>(m - 1)));
    fx[j] = f.value(grid[idx]);
    gx[j] = g.value(grid[idx]);
  }
  double worst = 0.0;
  for (std::size_t x = 0; x < m; ++x) {
    for (std::size_t y = 0; y < m; ++y) {
      for (std::size_t z = 0; z < m; ++z) {
        if (x == y || y == z || x == z) continue;
        const double rf = (fx[x] - fx[z]) / (fx[y] - fx[z]);
        const double rg = (gx[x] - gx[z]) / (gx[y] - gx[z]);
        worst = std::max(worst, std::abs(rf - rg));
      }
    }
  }
  return worst;
}

// Sign changes of `diff` between consecutive grid points, refined by
// bisection to `xtol`. With `touches`, isolated grid zeros without a sign
// change are reported too.
template <class F>
std::vector<double> find_crossings(const F& diff, const Grid& grid, double xtol = 1e-12, bool touches = false) {
  std::vector<double> out;
  std::vector<double> d(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) d[i] = diff(grid[i]);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (d[i] == 0.0) {
      const bool left_nz = i == 0 || d[i - 1] != 0.0;
      const bool right_nz = i + 1 == grid.size() || d[i + 1] != 0.0;
      const bool sign_change = i > 0 && i + 1 < grid.size() && (d[i - 1] < 0.0) != (d[i + 1] < 0.0);
      if (left_nz && right_nz && (touches || sign_change) && i > 0 && i + 1 < grid.size()) out.push_back(grid[i]);
      continue;
    }
    if (i + 1 < grid.size() && d[i + 1] != 0.0 && (d[i] < 0.0) != (d[i + 1] < 0.0)) {
      out.push_back(bisect_root(diff, grid[i], grid[i + 1], xtol));
    }
  }
  return out;
}

// ∫ |A_f - A_g| over the working interval; the range is split at kinks of
// either index and at sign changes of the difference.
inline double l1_index_distance(const Generator& f, const Generator& g, double tol = 1e-10) {
  require_sm(f, "l1_index_distance");
  require_sm(g, "l1_index_distance");
  detail::require_same_interval(f, g);
  const Interval& iv = f.interval();
  auto diff = [&](double x) { return f.index_at(x) - g.index_at(x); };
  std::vector<double> cuts = f.kinks();
  const auto kg = g.kinks();
  cuts.insert(cuts.end(), kg.begin(), kg.end());
  const auto cr = find_crossings(diff, make_grid(iv, 512));
  cuts.insert(cuts.end(), cr.begin(), cr.end());
  const Grid pieces = with_points(Grid({iv.work_lo(), iv.work_hi()}), cuts);
  const double local_tol = tol / static_cast<double>(pieces.size());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < pieces.size(); ++i) {
    total += integrate([&](double x) { return std::abs(diff(x)); }, pieces[i], pieces[i + 1], local_tol);
  }
  return total;
}

}  // namespace qam
