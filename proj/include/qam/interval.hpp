#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <vector>

#include "qam/errors.hpp"

namespace qam {

// Infinite endpoints are clamped to this magnitude before anything is evaluated.
inline constexpr double kEndpointClamp = 1e8;

// Open interval (lo, hi) together with an interior safety margin. Generators
// are only ever evaluated on the closed working interval
// [lo + margin, hi - margin].
class Interval {
 public:
  // Default margin is 1e-3 of the width.
  Interval(double lo, double hi, std::optional<double> margin = std::nullopt)
      : lo_(clamp_endpoint(lo)), hi_(clamp_endpoint(hi)) {
    if (std::isnan(lo) || std::isnan(hi) || !(lo_ < hi_)) {
      std::ostringstream os;
      os << "interval requires lo < hi, got (" << lo << ", " << hi << ")";
      throw DomainError(os.str());
    }
    margin_ = margin.value_or(1e-3 * (hi_ - lo_));
    if (!std::isfinite(margin_) || margin_ < 0.0 || !(lo_ + margin_ < hi_ - margin_)) {
      std::ostringstream os;
      os << "margin " << margin_ << " leaves an empty working interval inside (" << lo_
         << ", " << hi_ << ")";
      throw DomainError(os.str());
    }
  }

  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  double margin() const noexcept { return margin_; }
  double work_lo() const noexcept { return lo_ + margin_; }
  double work_hi() const noexcept { return hi_ - margin_; }
  double width() const noexcept { return work_hi() - work_lo(); }
  double midpoint() const noexcept { return 0.5 * work_lo() + 0.5 * work_hi(); }

  // Slack absorbs roundoff when points are produced by arithmetic on the
  // endpoints (reflections, grids).
  double slack() const noexcept { return 1e-12 * std::max(1.0, std::abs(width())); }

  bool contains(double x) const noexcept {
    return x >= work_lo() - slack() && x <= work_hi() + slack();
  }

  bool contains(const Interval& other) const noexcept {
    return contains(other.work_lo()) && contains(other.work_hi());
  }

  // Interval of x -> -x.
  Interval reflected() const { return Interval(-hi_, -lo_, margin_); }

  bool same_as(const Interval& other) const noexcept {
    const double s = std::max(slack(), other.slack());
    return std::abs(work_lo() - other.work_lo()) <= s && std::abs(work_hi() - other.work_hi()) <= s;
  }

  friend bool operator==(const Interval&, const Interval&) = default;

 private:
  static double clamp_endpoint(double v) { return std::clamp(v, -kEndpointClamp, kEndpointClamp); }

  double lo_;
  double hi_;
  double margin_{0.0};
};

// Strictly increasing sample points.
class Grid {
 public:
  explicit Grid(std::vector<double> points) : points_(std::move(points)) {
    if (points_.empty()) throw DomainError("grid must contain at least one point");
    for (std::size_t i = 1; i < points_.size(); ++i) {
      if (!(points_[i - 1] < points_[i])) throw DomainError("grid points must be strictly increasing");
    }
  }

  const std::vector<double>& points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }
  double operator[](std::size_t i) const { return points_[i]; }
  double front() const { return points_.front(); }
  double back() const { return points_.back(); }
  auto begin() const noexcept { return points_.begin(); }
  auto end() const noexcept { return points_.end(); }

 private:
  std::vector<double> points_;
};

// n equally spaced points spanning the working interval, endpoints included.
inline Grid make_grid(const Interval& iv, std::size_t n) {
  if (n < 2) throw DomainError("make_grid needs n >= 2");
  const double a = iv.work_lo();
  const double b = iv.work_hi();
  std::vector<double> pts(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(n - 1);
    pts[i] = a * (1.0 - t) + b * t;
  }
  pts.front() = a;
  pts.back() = b;
  return Grid(std::move(pts));
}

// Grid with extra points merged in. Extras outside [front, back] are dropped;
// points closer than `merge_tol` to an existing point are not duplicated.
inline Grid with_points(const Grid& grid, std::span<const double> extra, double merge_tol = -1.0) {
  const double lo = grid.front();
  const double hi = grid.back();
  if (merge_tol < 0.0) merge_tol = 1e-12 * std::max(1.0, hi - lo);
  std::vector<double> pts(grid.begin(), grid.end());
  for (double x : extra) {
    if (x >= lo && x <= hi) pts.push_back(x);
  }
  std::sort(pts.begin(), pts.end());
  std::vector<double> out;
  out.reserve(pts.size());
  for (double x : pts) {
    if (out.empty() || x - out.back() > merge_tol) out.push_back(x);
  }
  return Grid(std::move(out));
}

}  // namespace qam
