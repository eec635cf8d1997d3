#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qam/generator.hpp"
#include "qam/lattice.hpp"
#include "qam/mean.hpp"
#include "qam/order.hpp"
#include "qam/quadrature.hpp"
#include "qam/root.hpp"
#include "qam/smoothing.hpp"

// Property suites shared by the `verify` subcommand and the test binaries.

namespace qam::verify {

struct Config {
  unsigned long seed = 42;
  std::size_t grid = 512;
};

struct SuiteResult {
  std::string name;
  bool passed = true;
  std::size_t checks = 0;
  std::string counterexample;
};

// Records checks and keeps the first failure.
class Recorder {
 public:
  explicit Recorder(std::string name) { r_.name = std::move(name); }

  bool check(bool ok, const std::function<std::string()>& describe) {
    ++r_.checks;
    if (!ok && r_.passed) {
      r_.passed = false;
      r_.counterexample = describe();
    }
    return ok;
  }

  SuiteResult result() const { return r_; }

 private:
  SuiteResult r_;
};

inline std::string fmt_num(double x) {
  std::ostringstream os;
  os.precision(12);
  os << x;
  return os.str();
}

using Rng = std::mt19937_64;

inline SampleVector random_vector(Rng& rng, const Interval& iv, std::size_t min_len = 2, std::size_t max_len = 6) {
  std::uniform_int_distribution<std::size_t> len(min_len, max_len);
  std::uniform_real_distribution<double> x(iv.work_lo(), iv.work_hi());
  SampleVector v(len(rng));
  for (double& e : v) e = x(rng);
  return v;
}

inline std::vector<SampleVector> random_vectors(Rng& rng, const Interval& iv, std::size_t count,
                                                std::size_t min_len = 2, std::size_t max_len = 6) {
  std::vector<SampleVector> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(random_vector(rng, iv, min_len, max_len));
  return out;
}

inline std::string show(const SampleVector& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt_num(v[i]);
  return s + ")";
}

// Every S_m catalog entry on a natural interval.
inline std::vector<Generator> catalog_sm() {
  const double h = std::numbers::pi / 2;
  return {Generator::identity(Interval(-2.0, 3.0)),
          Generator::power(2.0, Interval(0.1, 10.0)),
          Generator::power(3.0, Interval(0.1, 10.0)),
          Generator::power(-1.0, Interval(0.1, 10.0)),
          Generator::power(0.5, Interval(0.1, 10.0)),
          Generator::log(Interval(0.1, 10.0)),
          Generator::exp_scaled(1.0, Interval(-2.0, 2.0)),
          Generator::exp_scaled(-2.5, Interval(-1.0, 1.0)),
          Generator::sin(Interval(-h, h, 0.01)),
          Generator::tan(Interval(-h, h, 0.01)),
          Generator::cube(Interval(0.5, 2.0))};
}

// The seven generators compared pairwise, all on (0.1, 1.5).
inline std::vector<Generator> comparison_family() {
  const Interval iv(0.1, 1.5);
  return {Generator::identity(iv), Generator::power(2.0, iv), Generator::power(3.0, iv), Generator::log(iv),
          Generator::exp_scaled(1.0, iv), Generator::sin(iv), Generator::tan(iv)};
}

// Max grid deviation between reconstruct(arrow_pratt(f)) and the normalized
// form (f(x) - f(x0)) / f'(x0).
inline double round_trip_error(const Generator& f, std::size_t grid = 512) {
  const Interval& iv = f.interval();
  const double x0 = iv.midpoint();
  const Generator h = reconstruct(arrow_pratt(f), iv, x0);
  const double f0 = f.value(x0);
  const double d0 = f.deriv1(x0);
  double worst = 0.0;
  for (double x : make_grid(iv, grid)) worst = std::max(worst, std::abs(h.value(x) - (f.value(x) - f0) / d0));
  return worst;
}

// 3-kink upper bound of log on (0.5, 4): slope_k * log(x) on consecutive
// segments, i.e. a convex piecewise-linear function of log.
inline PiecewiseGenerator log_kinked_bound() {
  const Interval iv(0.5, 4.0);
  const Generator lg = Generator::log(iv);
  PiecewiseData d{iv, {1.0, 2.0, 3.0}, {lg, lg, lg, lg}, {1.0, 1.5, 2.5, 4.0}, {}};
  return PiecewiseGenerator(std::move(d));
}

// ---------------------------------------------------------------------------

inline SuiteResult interval_suite(const Config& cfg) {
  Recorder rec("interval-core");
  Rng rng(cfg.seed);
  const double tol = 1e-10;
  std::vector<std::pair<std::string, std::function<double(double)>>> fns = {
      {"cos", [](double x) { return std::cos(x); }},
      {"exp", [](double x) { return std::exp(x); }},
      {"x^2", [](double x) { return x * x; }}};
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int t = 0; t < 30; ++t) {
    double p[3] = {u(rng), u(rng), u(rng)};
    std::sort(p, p + 3);
    for (const auto& [name, fn] : fns) {
      const double whole = integrate(fn, p[0], p[2], tol);
      const double parts = integrate(fn, p[0], p[1], tol) + integrate(fn, p[1], p[2], tol);
      rec.check(std::abs(whole - parts) <= 3 * tol, [&, n = name] { return "integrate additivity fails for " + n; });
    }
  }
  const Grid grid = make_grid(Interval(-1.5, 1.5, 0.0), std::max<std::size_t>(cfg.grid, 8));
  for (double x : grid) {
    const double y = std::sin(x);
    const double back = invert_monotone([](double t) { return std::sin(t); }, y, -1.5, 1.5, 1e-14);
    rec.check(std::abs(back - x) <= 1e-10, [&] { return "invert_monotone(sin) at x=" + fmt_num(x); });
  }
  for (std::size_t n : {2u, 3u, 8u, 17u}) {
    const Grid g = make_grid(Interval(0.0, 1.0, 0.0), n);
    rec.check(g.size() == n && g.front() == 0.0 && g.back() == 1.0, [&] { return "make_grid size/endpoints"; });
  }
  return rec.result();
}

inline SuiteResult generator_suite(const Config& cfg) {
  Recorder rec("generator");
  for (const auto& f : catalog_sm()) {
    const double err = round_trip_error(f, cfg.grid);
    rec.check(err <= 1e-6, [&] { return "round trip of " + f.name() + " off by " + fmt_num(err); });

    const Grid g = make_grid(f.interval(), std::max<std::size_t>(cfg.grid, 8));
    for (std::size_t i = 1; i + 1 < g.size(); ++i) {
      const double x = g[i];
      const double h = 1e-5 * std::max(1.0, std::abs(x));
      const double fd1 = (f.value(x + h) - f.value(x - h)) / (2 * h);
      const double fd2 = (f.deriv1(x + h) - f.deriv1(x - h)) / (2 * h);
      const double d1 = f.deriv1(x);
      const double d2 = f.deriv2(x);
      rec.check(std::abs(fd1 - d1) <= 1e-5 * std::max(1.0, std::abs(d1)),
                [&] { return "deriv1 of " + f.name() + " at " + fmt_num(x); });
      rec.check(std::abs(fd2 - d2) <= 1e-5 * std::max(1.0, std::abs(d2)),
                [&] { return "deriv2 of " + f.name() + " at " + fmt_num(x); });
    }

    const Generator r = reflect(f);
    const ArrowPrattIndex ar = arrow_pratt(r);
    const ArrowPrattIndex af = arrow_pratt(f);
    for (double x : make_grid(r.interval(), cfg.grid)) {
      rec.check(std::abs(ar(x) + af(-x)) <= 1e-8, [&] { return "reflection index of " + f.name(); });
    }
    const ArrowPrattIndex aa = arrow_pratt(affine(f, -7.0, 1.0));
    for (double x : make_grid(f.interval(), cfg.grid)) {
      rec.check(aa(x) == af(x), [&] { return "affine index of " + f.name() + " at " + fmt_num(x); });
    }
  }
  return rec.result();
}

inline SuiteResult mean_suite(const Config& cfg) {
  Recorder rec("mean");
  Rng rng(cfg.seed + 1);
  for (const auto& f : catalog_sm()) {
    const auto vs = random_vectors(rng, f.interval(), 100);
    for (const auto& v : vs) {
      const double m = qa_mean(f, v);
      const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
      rec.check(m >= *mn && m <= *mx, [&] { return "internality of " + f.name() + " on " + show(v); });

      SampleVector w = v;
      std::shuffle(w.begin(), w.end(), rng);
      rec.check(qa_mean(f, w) == m, [&] { return "symmetry of " + f.name() + " on " + show(v); });

      SampleVector up = v;
      std::uniform_int_distribution<std::size_t> pick(0, v.size() - 1);
      const std::size_t j = pick(rng);
      up[j] = up[j] + std::uniform_real_distribution<double>(0.0, 1.0)(rng) * (f.interval().work_hi() - up[j]);
      rec.check(qa_mean(f, up) >= m - 1e-9, [&] { return "monotonicity of " + f.name() + " on " + show(v); });

      const SampleVector same(v.size(), v[0]);
      rec.check(std::abs(qa_mean(f, same) - v[0]) <= 1e-12 * std::max(1.0, std::abs(v[0])),
                [&] { return "idempotency of " + f.name(); });
    }
    for (double a : {-3.0, 0.5, 10.0}) {
      for (double b : {-1.0, 0.0, 7.0}) {
        const Generator fa = affine(f, a, b);
        for (std::size_t i = 0; i < 10; ++i) {
          const auto& v = vs[i];
          rec.check(std::abs(qa_mean(fa, v) - qa_mean(f, v)) <= 1e-8,
                    [&] { return "affine invariance of " + f.name() + " on " + show(v); });
        }
      }
    }
  }
  return rec.result();
}

inline SuiteResult order_suite(const Config& cfg) {
  Recorder rec("order");
  Rng rng(cfg.seed + 2);
  const auto fam = comparison_family();
  const Grid grid = make_grid(fam.front().interval(), cfg.grid);
  for (std::size_t i = 0; i < fam.size(); ++i) {
    for (std::size_t j = i + 1; j < fam.size(); ++j) {
      const auto& f = fam[i];
      const auto& g = fam[j];
      const Verdict vi = compare_index(f, g, grid).verdict;
      const Verdict vc = compare_convexity(f, g, grid).verdict;
      const Verdict vr = compare_ratio(f, g, grid).verdict;
      rec.check(vi == vc && vi == vr, [&] {
        return f.name() + " vs " + g.name() + ": index=" + to_string(vi) + " convexity=" + to_string(vc) +
               " ratio=" + to_string(vr);
      });
      if (vi == Verdict::Less || vi == Verdict::Greater) {
        const Generator& lo = vi == Verdict::Less ? f : g;
        const Generator& hi = vi == Verdict::Less ? g : f;
        for (const auto& v : random_vectors(rng, f.interval(), 1000)) {
          rec.check(qa_mean(lo, v) <= qa_mean(hi, v) + 1e-8,
                    [&] { return "soundness " + lo.name() + " <= " + hi.name() + " fails on " + show(v); });
        }
      }
      const bool eq = vi == Verdict::Equal;
      rec.check((pales_distance(f, g, grid) <= 1e-6) == eq, [&] { return "pales/Equal mismatch " + f.name() + "," + g.name(); });
    }
    const Generator a = affine(fam[i], -2.0, 5.0);
    rec.check(compare_index(fam[i], a, grid).verdict == Verdict::Equal && pales_distance(fam[i], a, grid) <= 1e-6,
              [&] { return "affine copy of " + fam[i].name() + " not Equal"; });
  }

  // Nondecreasing piecewise-C1 functions have nonnegative lower Dini derivative.
  std::uniform_real_distribution<double> slope(0.0, 3.0);
  for (int t = 0; t < 50; ++t) {
    const double s1 = slope(rng);
    const double s2 = slope(rng);
    const double z = std::uniform_real_distribution<double>(-0.5, 0.5)(rng);
    KinkedFunction phi{[=](double x) { return x < z ? s1 * (x - z) + std::pow(x - z, 3) : s2 * (x - z) + std::pow(x - z, 3); },
                       {z}, -1.0, 1.0, {}};
    for (double x : make_grid(Interval(-1.0, 1.0, 0.05), 33)) {
      rec.check(lower_dini(phi, x) >= -1e-6, [&] { return "lower_dini negative at " + fmt_num(x); });
    }
    rec.check(lower_dini(phi, z) >= -1e-6, [&] { return "lower_dini negative at kink"; });
  }
  return rec.result();
}

inline SuiteResult lattice_suite(const Config& cfg) {
  Recorder rec("lattice");
  Rng rng(cfg.seed + 3);
  const double hp = std::numbers::pi / 2;
  const Interval iv(-hp, hp, 0.01);
  const Generator s = Generator::sin(iv);
  const Generator t = Generator::tan(iv);
  const Generator e = Generator::exp_scaled(0.7, iv);
  const Grid grid = make_grid(iv, cfg.grid);
  LatticeOptions opts;
  opts.grid = std::max<std::size_t>(cfg.grid, 64);

  const auto j = join({s, t}, iv, opts);
  const auto m = meet({s, t}, iv, opts);
  for (const auto& v : random_vectors(rng, iv, 1000)) {
    const double mj = qa_mean(j.generator, v);
    const double mm = qa_mean(m.generator, v);
    const double ms = qa_mean(s, v);
    const double mt = qa_mean(t, v);
    rec.check(mj >= std::max(ms, mt) - 1e-8, [&] { return "join below operand on " + show(v); });
    rec.check(mm <= std::min(ms, mt) + 1e-8, [&] { return "meet above operand on " + show(v); });
  }

  const auto jts = join({t, s}, iv, opts);
  rec.check(pales_distance(j.generator, jts.generator, grid) <= 1e-6, [] { return "join not commutative"; });
  rec.check(pales_distance(join({s, s}, iv, opts).generator, s, grid) <= 1e-6, [] { return "join not idempotent"; });
  const auto left = join({s, join({t, e}, iv, opts).generator}, iv, opts);
  const auto right = join({j.generator, e}, iv, opts);
  rec.check(pales_distance(left.generator, right.generator, grid) <= 1e-6, [] { return "join not associative"; });
  rec.check(pales_distance(meet({s, j.generator}, iv, opts).generator, s, grid) <= 1e-6,
            [] { return "absorption meet(f, join(f,g)) fails"; });

  const Interval piv(0.1, 10.0);
  std::vector<Generator> fam{Generator::power(-1.0, piv), Generator::log(piv), Generator::power(2.0, piv),
                             Generator::exp_scaled(0.3, piv), Generator::power(0.5, piv)};
  for (std::size_t n = 3; n <= fam.size(); ++n) {
    const std::span<const Generator> sub(fam.data(), n);
    const auto nary = join(sub, piv, opts);
    const auto folded = fold(LatticeKind::Join, sub, piv, opts);
    for (double x : make_grid(piv, cfg.grid)) {
      rec.check(nary.index(x) == folded.generator.index_at(x), [&] { return "n-ary vs folded join index at " + fmt_num(x); });
    }
  }

  const auto jr = join({reflect(s), reflect(t)}, iv.reflected(), opts);
  for (const auto& v : random_vectors(rng, iv, 200)) {
    SampleVector neg = v;
    for (double& x : neg) x = -x;
    const double d = qa_mean(m.generator, v) + qa_mean(jr.generator, neg);
    rec.check(std::abs(d) <= 1e-8, [&] { return "duality identity fails on " + show(v); });
  }
  for (const auto& f : {s, t}) {
    const Verdict v = compare_index(f, j.generator, grid).verdict;
    rec.check(v == Verdict::Less || v == Verdict::Equal, [&] { return "operand not below join: " + f.name(); });
  }
  return rec.result();
}

inline SuiteResult smoothing_suite(const Config& cfg) {
  Recorder rec("smoothing");
  const PiecewiseGenerator s = log_kinked_bound();
  const Generator f = Generator::log(s.interval());
  const auto res = smooth_all(s, f, f, 64, cfg.grid);
  const Grid grid = with_points(make_grid(s.interval(), cfg.grid), s.data().breakpoints);
  for (std::size_t i = 1; i < res.states.size(); ++i) {
    const auto& prev = res.states[i - 1];
    const auto& next = res.states[i];
    for (double x : grid) {
      rec.check(next.value(x) <= prev.value(x) + 1e-12, [&] { return "step " + std::to_string(i) + " increased s at " + fmt_num(x); });
    }
    rec.check(static_cast<bool>(membership_check(next, f, cfg.grid)), [&] { return "step " + std::to_string(i) + " left U_f"; });
    const Verdict v = compare_convexity(next.generator(), prev.generator(), grid).verdict;
    rec.check(v == Verdict::Less || v == Verdict::Equal, [&] { return "step " + std::to_string(i) + " not below previous"; });
  }
  rec.check(res.final_state.kinks().empty(), [] { return "kinks remain after smooth_all"; });
  for (double z : s.data().breakpoints) {
    const double h = 1e-7;
    const double l = (res.k.value(z) - res.k.value(z - h)) / h;
    const double r = (res.k.value(z + h) - res.k.value(z)) / h;
    rec.check(std::abs(r - l) <= 1e-5 * std::max(std::abs(l), std::abs(r)),
              [&] { return "derivative jump remains at " + fmt_num(z); });
  }
  for (double x : grid) rec.check(std::abs(res.k.deriv1(x)) > 0.0, [&] { return "k' vanishes at " + fmt_num(x); });
  return rec.result();
}

inline std::vector<SuiteResult> run_all(const Config& cfg) {
  return {interval_suite(cfg), generator_suite(cfg), mean_suite(cfg),
          order_suite(cfg),    lattice_suite(cfg),   smoothing_suite(cfg)};
}

}  // namespace qam::verify

namespace qam::verify {

// Fit alpha*h + beta to `ref` at xa, xb and return the max deviation over `grid`.
inline double aligned_deviation(const Generator& h, const std::function<double(double)>& ref, const Grid& grid,
                                double xa, double xb) {
  const double ha = h.value(xa);
  const double hb = h.value(xb);
  const double alpha = (ref(xb) - ref(xa)) / (hb - ha);
  const double beta = ref(xa) - alpha * ha;
  double worst = 0.0;
  for (double x : grid) worst = std::max(worst, std::abs(alpha * h.value(x) + beta - ref(x)));
  return worst;
}

}  // namespace qam::verify
