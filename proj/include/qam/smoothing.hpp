#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "qam/errors.hpp"
#include "qam/generator.hpp"
#include "qam/order.hpp"

namespace qam {

// Increasing piecewise generator whose derivative may jump at breakpoints.
// A breakpoint is a kink when the one-sided derivatives differ.
//
// Smoothing removes kinks one at a time: everything left of z is rescaled by
// s'_+(z) / s'_-(z) about (z, s(z)), which makes s differentiable at z and
// lowers s pointwise left of z.
class PiecewiseGenerator {
 public:
  explicit PiecewiseGenerator(PiecewiseData d) : gen_(piecewise(std::move(d))) { init(); }
  explicit PiecewiseGenerator(const Generator& g) : gen_(g) {
    if (g.kind() != Kind::Piecewise) {
      // A smooth generator is a piecewise generator without breakpoints.
      gen_ = piecewise(PiecewiseData{g.interval(), {}, {g}, {}, {}});
    }
    init();
  }

  const Generator& generator() const noexcept { return gen_; }
  const PiecewiseData& data() const { return static_cast<const detail::PiecewiseImpl&>(gen_.impl()).data(); }
  const Interval& interval() const noexcept { return gen_.interval(); }

  double value(double x) const { return gen_.value(x); }
  double left_derivative(double z) const { return gen_.deriv1(z, Side::Left); }
  double right_derivative(double z) const { return gen_.deriv1(z, Side::Right); }

  // Breakpoints with a derivative jump beyond relative `rel`.
  std::vector<double> kinks(double rel = 1e-12) const {
    std::vector<double> out;
    for (double z : data().breakpoints) {
      const double l = left_derivative(z);
      const double r = right_derivative(z);
      if (std::abs(r - l) > rel * std::max(std::abs(l), std::abs(r))) out.push_back(z);
    }
    return out;
  }

  double kink_ratio(double z) const { return right_derivative(z) / left_derivative(z); }

 private:
  void init() {
    if (!gen_.increasing()) throw DomainError("smoothing works on increasing generators; negate first");
    if (!gen_.smoothness().piecewise_c2) throw CapabilityError("smoothing needs piecewise-C2 pieces");
  }

  Generator gen_;
};

// Resolve the j-th kink (index into s.kinks()).
inline PiecewiseGenerator smooth_step(const PiecewiseGenerator& s, std::size_t j) {
  const auto ks = s.kinks();
  if (j >= ks.size()) throw DomainError("smooth_step: kink index out of range");
  const double z = ks[j];
  const double dl = s.left_derivative(z);
  const double dr = s.right_derivative(z);
  if (!(dl > 0.0) || !(dr > 0.0)) {
    std::ostringstream os;
    os << "smooth_step: one-sided derivatives at z=" << z << " must be positive (got " << dl << ", " << dr << ")";
    throw DomainError(os.str());
  }
  const double r = dr / dl;
  const double sz = s.value(z);
  PiecewiseData d = s.data();
  for (std::size_t k = 0; k < d.breakpoints.size() && d.breakpoints[k] <= z; ++k) {
    // piece k lies left of breakpoint k
    d.scales[k] *= r;
    d.offsets[k] = r * (d.offsets[k] - sz) + sz;
  }
  return PiecewiseGenerator(std::move(d));
}

// s ∈ U_f, decided through the lower Dini derivative of s'/f': away from
// kinks A_f <= D(s')/s'; at a kink the derivative may only jump upwards.
struct MembershipResult {
  bool holds = true;
  double margin = std::numeric_limits<double>::infinity();
  std::optional<double> worst_point;
  std::string detail;

  explicit operator bool() const noexcept { return holds; }
};

inline MembershipResult membership_check(const PiecewiseGenerator& s, const Generator& f, std::size_t grid_size = 512,
                                         double tol = kVerdictTol) {
  require_sm(f, "membership_check");
  const Generator& g = s.generator();
  detail::require_same_interval(f, g);
  const auto kinks = s.kinks();
  std::vector<double> bps = s.data().breakpoints;
  const Grid pts = with_points(make_grid(s.interval(), grid_size), bps);
  const Interval& iv = s.interval();
  MembershipResult res;
  auto record = [&](double gap, double x, const std::string& what) {
    if (gap < res.margin) {
      res.margin = gap;
      res.worst_point = x;
      if (gap < -tol) res.detail = what;
    }
  };
  for (double x : pts) {
    const bool is_kink = std::any_of(kinks.begin(), kinks.end(), [&](double z) { return z == x; });
    if (is_kink) {
      const double dl = g.deriv1(x, Side::Left);
      const double dr = g.deriv1(x, Side::Right);
      std::ostringstream os;
      os << "derivative jumps down at kink x=" << x << " (s'_-=" << dl << " > s'_+=" << dr << ")";
      record((dr - dl) / std::max(dl, dr), x, os.str());
      continue;
    }
    std::vector<Side> sides;
    if (x <= iv.work_lo()) {
      sides = {Side::Right};
    } else if (x >= iv.work_hi()) {
      sides = {Side::Left};
    } else if (std::find(bps.begin(), bps.end(), x) != bps.end()) {
      sides = {Side::Left, Side::Right};
    } else {
      sides = {Side::Both};
    }
    double q = std::numeric_limits<double>::infinity();
    for (Side sd : sides) q = std::min(q, g.deriv2(x, sd) / g.deriv1(x, sd));
    std::ostringstream os;
    os << "A_" << f.name() << "(x) > D(s')/s' at x=" << x;
    record(q - f.index_at(x), x, os.str());
  }
  res.holds = res.margin >= -tol;
  return res;
}

struct SmoothingStep {
  std::size_t step;
  double kink;
  double ratio;
  double max_drop;  // max over the grid of s_n(x) - s_{n+1}(x)
};

struct SmoothingResult {
  Generator k;
  PiecewiseGenerator final_state;
  std::vector<PiecewiseGenerator> states;  // s_1, ..., s_final
  std::vector<SmoothingStep> steps;
};

// Resolve all kinks of s left to right. Requires s ∈ U_f ∩ U_g; the result
// k is differentiable with k ≺ s and f, g ≺ k.
inline SmoothingResult smooth_all(const PiecewiseGenerator& s, const Generator& f, const Generator& g,
                                  std::size_t max_steps = 64, std::size_t grid_size = 512) {
  for (const Generator* op : {&f, &g}) {
    const auto m = membership_check(s, *op, grid_size);
    if (!m) throw PreconditionError("smooth_all: s is not an upper bound of " + op->name() + ": " + m.detail);
  }
  if (s.kinks().size() > max_steps) throw DomainError("smooth_all: more kinks than max_steps");

  const Grid grid = with_points(make_grid(s.interval(), grid_size), s.data().breakpoints);
  SmoothingResult out{s.generator(), s, {s}, {}};
  PiecewiseGenerator cur = s;
  std::size_t step = 0;
  while (!cur.kinks().empty()) {
    const double z = cur.kinks().front();
    const double r = cur.kink_ratio(z);
    PiecewiseGenerator next = smooth_step(cur, 0);
    double drop = 0.0;
    for (double x : grid) drop = std::max(drop, cur.value(x) - next.value(x));
    out.steps.push_back({++step, z, r, drop});
    out.states.push_back(next);
    cur = std::move(next);
  }

  const Generator& k = cur.generator();
  for (double x : grid) {
    if (k.value(x) > s.value(x) + 1e-12 * std::max(1.0, std::abs(s.value(x))))
      throw std::logic_error("smooth_all: result exceeds s pointwise");
  }
  for (const Generator* op : {&f, &g}) {
    if (!c2c1_compare(*op, k, grid)) throw std::logic_error("smooth_all: result left U_" + op->name());
  }
  const Verdict v = compare_convexity(k, s.generator(), grid).verdict;
  if (v != Verdict::Less && v != Verdict::Equal) throw std::logic_error("smooth_all: result is not below s");
  out.k = k;
  out.final_state = cur;
  return out;
}

}  // namespace qam
