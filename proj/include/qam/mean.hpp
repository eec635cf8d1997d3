#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <sstream>
#include <vector>

#include "qam/errors.hpp"
#include "qam/generator.hpp"
#include "qam/root.hpp"

namespace qam {

using SampleVector = std::vector<double>;

// Quasi-arithmetic mean f^{-1}((f(v_1) + ... + f(v_n)) / n).
//
// The transformed entries are summed in ascending order of magnitude, so the
// result does not depend on the order of v. Inversion brackets on
// [min v, max v], which contains the mean.
inline double qa_mean(const Generator& f, std::span<const double> v) {
  if (v.empty()) throw DomainError("qa_mean: sample vector is empty");
  const Interval& iv = f.interval();
  for (double x : v) {
    if (!std::isfinite(x) || !iv.contains(x)) {
      std::ostringstream os;
      os.precision(17);
      os << "qa_mean: entry " << x << " outside working interval [" << iv.work_lo() << ", "
         << iv.work_hi() << "] of " << f.name();
      throw DomainError(os.str());
    }
  }
  const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
  const double lo = *mn;
  const double hi = *mx;
  if (lo == hi) return lo;

  std::vector<double> fv(v.size());
  std::transform(v.begin(), v.end(), fv.begin(), [&](double x) { return f.value(x); });
  std::sort(fv.begin(), fv.end(), [](double a, double b) {
    return std::abs(a) < std::abs(b) || (std::abs(a) == std::abs(b) && a < b);
  });
  double sum = 0.0;
  for (double y : fv) sum += y;
  double target = sum / static_cast<double>(fv.size());

  const double flo = f.value(lo);
  const double fhi = f.value(hi);
  target = std::clamp(target, std::min(flo, fhi), std::max(flo, fhi));
  return invert_monotone([&](double x) { return f.value(x); }, target, lo, hi);
}

inline double qa_mean(const Generator& f, std::initializer_list<double> v) {
  return qa_mean(f, std::span<const double>(v.begin(), v.size()));
}

inline std::vector<double> mean_table(const Generator& f, const std::vector<SampleVector>& vs) {
  std::vector<double> out;
  out.reserve(vs.size());
  for (const auto& v : vs) out.push_back(qa_mean(f, v));
  return out;
}

}  // namespace qam
