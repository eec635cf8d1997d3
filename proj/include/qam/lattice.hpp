#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "qam/errors.hpp"
#include "qam/generator.hpp"
#include "qam/mean.hpp"
#include "qam/order.hpp"

namespace qam {

inline constexpr std::size_t kMaxLatticeOperands = 16;

enum class LatticeKind { Join, Meet };

inline const char* to_string(LatticeKind k) { return k == LatticeKind::Join ? "join" : "meet"; }

struct LatticeOptions {
  std::size_t grid = 512;        // crossing search grid
  double crossing_tol = 1e-12;   // bisection width for crossings
  ReconstructOptions table{};
};

// Supremum (join) or infimum (meet) of a finite family of S_m generators.
// `index` is the pointwise max/min of the operand indices, with crossing
// points listed as kinks; `generator` solves h''/h' = index.
struct LatticeResult {
  Generator generator;
  ArrowPrattIndex index;
  std::vector<Generator> operands;
  LatticeKind kind;
  Interval interval;
};

namespace detail {

inline void check_operands(std::span<const Generator> fs, const Interval& iv, LatticeKind kind) {
  if (fs.empty()) throw DomainError(std::string(to_string(kind)) + ": operand list is empty");
  if (fs.size() > kMaxLatticeOperands) {
    std::ostringstream os;
    os << to_string(kind) << ": at most " << kMaxLatticeOperands << " operands supported";
    throw DomainError(os.str());
  }
  for (const auto& f : fs) {
    if (!f.smoothness().in_sm()) {
      const char* what = kind == LatticeKind::Join ? "supremum is max(v)" : "infimum is min(v)";
      throw CapabilityError(std::string(to_string(kind)) + ": operand " + f.name() +
                            " is not C2 with nonvanishing derivative on the interval; " + what +
                            "; not a quasi-arithmetic mean");
    }
    if (!f.interval().contains(iv)) {
      std::ostringstream os;
      os << to_string(kind) << ": operand " << f.name() << " is not defined on [" << iv.work_lo() << ", "
         << iv.work_hi() << "]";
      throw DomainError(os.str());
    }
  }
}

inline json lattice_origin(LatticeKind kind, std::span<const Generator> fs, const Interval& iv) {
  json ops = json::array();
  for (const auto& f : fs) ops.push_back(f.spec());
  return json{{"kind", to_string(kind)},
              {"operands", ops},
              {"interval", interval_json(iv)},
              {"margin", iv.margin()}};
}

// Pointwise max of the indices: crossing points where the top index changes,
// plus the operands' own kinks.
inline ArrowPrattIndex max_index(const std::vector<ArrowPrattIndex>& idx, const Interval& iv, const LatticeOptions& opts) {
  auto eval = [idx](double x) {
    double m = idx.front()(x);
    for (std::size_t i = 1; i < idx.size(); ++i) m = std::max(m, idx[i](x));
    return m;
  };
  std::vector<double> kinks;
  for (const auto& a : idx) {
    for (double z : a.kinks) {
      if (z > iv.work_lo() && z < iv.work_hi()) kinks.push_back(z);
    }
  }
  const Grid grid = make_grid(iv, opts.grid);
  for (std::size_t a = 0; a < idx.size(); ++a) {
    for (std::size_t b = a + 1; b < idx.size(); ++b) {
      auto diff = [&](double x) { return idx[a](x) - idx[b](x); };
      for (double z : find_crossings(diff, grid, opts.crossing_tol, true)) {
        const double top = eval(z);
        const double near = 1e-9 * (1.0 + std::abs(top));
        if (top - idx[a](z) <= near && top - idx[b](z) <= near) kinks.push_back(z);
      }
    }
  }
  std::sort(kinks.begin(), kinks.end());
  kinks.erase(std::unique(kinks.begin(), kinks.end()), kinks.end());
  return ArrowPrattIndex{eval, kinks};
}

}  // namespace detail

// h with h''/h' = max_i A_i, normalized h(mid) = 0, h'(mid) = 1.
inline LatticeResult join(std::span<const Generator> fs, const Interval& iv, const LatticeOptions& opts = {}) {
  detail::check_operands(fs, iv, LatticeKind::Join);
  std::vector<ArrowPrattIndex> idx;
  for (const auto& f : fs) idx.push_back(arrow_pratt(f));
  ArrowPrattIndex combined = detail::max_index(idx, iv, opts);
  Generator h = reconstruct(combined, iv, iv.midpoint(), opts.table);
  try {
    h = h.with_origin(detail::lattice_origin(LatticeKind::Join, fs, iv));
  } catch (const CapabilityError&) {
    // an operand has no serializable form; the result stays anonymous
  }
  return LatticeResult{h, combined, std::vector<Generator>(fs.begin(), fs.end()), LatticeKind::Join, iv};
}

inline LatticeResult join(std::initializer_list<Generator> fs, const Interval& iv, const LatticeOptions& opts = {}) {
  return join(std::span<const Generator>(fs.begin(), fs.size()), iv, opts);
}

// Infimum through reflection: meet(F) = reflect(join(reflect F)) on -I. The
// reflected result's index is checked against the direct pointwise min.
inline LatticeResult meet(std::span<const Generator> fs, const Interval& iv, const LatticeOptions& opts = {}) {
  detail::check_operands(fs, iv, LatticeKind::Meet);
  std::vector<Generator> refl;
  for (const auto& f : fs) refl.push_back(reflect(f));
  const LatticeResult up = join(refl, iv.reflected(), opts);
  Generator k = reflect(up.generator);

  std::vector<ArrowPrattIndex> idx;
  for (const auto& f : fs) idx.push_back(arrow_pratt(f));
  auto eval = [idx](double x) {
    double m = idx.front()(x);
    for (std::size_t i = 1; i < idx.size(); ++i) m = std::min(m, idx[i](x));
    return m;
  };
  for (double x : make_grid(iv, opts.grid)) {
    const double direct = eval(x);
    if (std::abs(k.index_at(x) - direct) > 1e-8 * (1.0 + std::abs(direct))) {
      std::ostringstream os;
      os << "meet: reflected join index disagrees with pointwise min at x=" << x;
      throw std::logic_error(os.str());
    }
  }
  try {
    k = k.with_origin(detail::lattice_origin(LatticeKind::Meet, fs, iv));
  } catch (const CapabilityError&) {
  }
  return LatticeResult{k, ArrowPrattIndex{eval, k.kinks()}, std::vector<Generator>(fs.begin(), fs.end()),
                       LatticeKind::Meet, iv};
}

inline LatticeResult meet(std::initializer_list<Generator> fs, const Interval& iv, const LatticeOptions& opts = {}) {
  return meet(std::span<const Generator>(fs.begin(), fs.size()), iv, opts);
}

// Left fold of binary joins/meets. Exists for associativity checks; the n-ary
// operations evaluate the extremum directly.
inline LatticeResult fold(LatticeKind kind, std::span<const Generator> fs, const Interval& iv,
                          const LatticeOptions& opts = {}) {
  if (fs.empty()) throw DomainError("fold: operand list is empty");
  auto op = [&](std::initializer_list<Generator> pair) {
    return kind == LatticeKind::Join ? join(pair, iv, opts) : meet(pair, iv, opts);
  };
  if (fs.size() == 1) return op({fs[0]});
  LatticeResult acc = op({fs[0], fs[1]});
  for (std::size_t i = 2; i < fs.size(); ++i) acc = op({acc.generator, fs[i]});
  return acc;
}

// ---------------------------------------------------------------------------

struct LubReport {
  bool passed = true;
  std::size_t checks = 0;
  double worst_bound_gap = std::numeric_limits<double>::infinity();    // min of bound side slack
  double worst_operand_gap = std::numeric_limits<double>::infinity();  // min of operand side slack
  std::string first_failure;
};

// Sampled least-upper-bound check. For a join with result h and each bound
// index B >= max_i A_i:  M_h(v) <= M_B(v) + tol  and  M_h(v) >= max_i M_i(v) - tol.
// Meets are checked with every inequality reversed.
inline LubReport verify_lub(const LatticeResult& result, const std::vector<ArrowPrattIndex>& bounds,
                            const std::vector<SampleVector>& vs, double tol, std::size_t grid_size = 512) {
  const Interval& iv = result.interval;
  const bool is_join = result.kind == LatticeKind::Join;
  const double sgn = is_join ? 1.0 : -1.0;
  const Grid grid = make_grid(iv, grid_size);
  std::vector<Generator> bound_gens;
  for (std::size_t b = 0; b < bounds.size(); ++b) {
    for (double x : grid) {
      const double gap = sgn * (bounds[b](x) - result.index(x));
      if (gap < -tol) {
        std::ostringstream os;
        os << "verify_lub: candidate bound " << b << " is " << (is_join ? "below the max" : "above the min")
           << " of operand indices at x=" << x << " (gap " << gap << ")";
        throw PreconditionError(os.str());
      }
    }
    ArrowPrattIndex bi = bounds[b];
    for (double z : result.index.kinks) bi.kinks.push_back(z);
    std::sort(bi.kinks.begin(), bi.kinks.end());
    bi.kinks.erase(std::unique(bi.kinks.begin(), bi.kinks.end()), bi.kinks.end());
    bound_gens.push_back(reconstruct(bi, iv));
  }

  LubReport rep;
  auto fail = [&](const std::string& msg) {
    if (rep.passed) rep.first_failure = msg;
    rep.passed = false;
  };
  for (const auto& v : vs) {
    const double mh = qa_mean(result.generator, v);
    double extreme = is_join ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
    for (const auto& f : result.operands) {
      const double m = qa_mean(f, v);
      extreme = is_join ? std::max(extreme, m) : std::min(extreme, m);
    }
    const double og = sgn * (mh - extreme);
    rep.worst_operand_gap = std::min(rep.worst_operand_gap, og);
    ++rep.checks;
    if (og < -tol) {
      std::ostringstream os;
      os.precision(17);
      os << "result mean " << mh << " is not an upper/lower bound of operand mean " << extreme;
      fail(os.str());
    }
    for (std::size_t b = 0; b < bound_gens.size(); ++b) {
      const double mb = qa_mean(bound_gens[b], v);
      const double bg = sgn * (mb - mh);
      rep.worst_bound_gap = std::min(rep.worst_bound_gap, bg);
      ++rep.checks;
      if (bg < -tol) {
        std::ostringstream os;
        os.precision(17);
        os << "bound " << b << " mean " << mb << " beats result mean " << mh;
        fail(os.str());
      }
    }
  }
  return rep;
}

}  // namespace qam
