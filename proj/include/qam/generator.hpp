#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "qam/errors.hpp"
#include "qam/interval.hpp"
#include "qam/quadrature.hpp"

namespace qam {

using json = nlohmann::json;

// Which one-sided limit to take at a breakpoint. `Both` means the function is
// treated as smooth there; piecewise generators resolve it to the right piece.
enum class Side { Both, Left, Right };

inline Side flip(Side s) noexcept {
  switch (s) {
    case Side::Left:
      return Side::Right;
    case Side::Right:
      return Side::Left;
    default:
      return Side::Both;
  }
}

enum class Kind { Catalog, IndexDefined, Piecewise, Affine, Reflected };

inline const char* to_string(Kind k) {
  switch (k) {
    case Kind::Catalog:
      return "catalog";
    case Kind::IndexDefined:
      return "index-defined";
    case Kind::Piecewise:
      return "piecewise";
    case Kind::Affine:
      return "affine";
    case Kind::Reflected:
      return "reflect";
  }
  return "?";
}

// Smoothness properties of a generator on its working interval.
//   monotone      continuous and strictly monotone (always set)
//   c1, c2        globally C1 / C2
//   piecewise_c2  C2 between finitely many breakpoints, one-sided limits there
//   nonvanishing  |f'| > 0 everywhere (one-sided at breakpoints)
struct Smoothness {
  bool monotone = true;
  bool c1 = false;
  bool c2 = false;
  bool piecewise_c2 = false;
  bool nonvanishing = false;

  bool in_sm() const noexcept { return c2 && nonvanishing; }
  bool has_deriv1() const noexcept { return c1 || piecewise_c2; }
  bool has_deriv2() const noexcept { return c2 || piecewise_c2; }

  std::string describe() const {
    std::string s = "C0-monotone";
    if (c1) s += ", C1";
    if (c2) s += ", C2";
    if (piecewise_c2 && !c2) s += ", piecewise-C2";
    if (nonvanishing) s += ", derivative-nonvanishing";
    return s;
  }
};

// The function x -> f''(x)/f'(x), plus the points where it may fail to be
// differentiable (it stays continuous there for S_m generators).
struct ArrowPrattIndex {
  std::function<double(double)> eval;
  std::vector<double> kinks;

  double operator()(double x) const { return eval(x); }
};

namespace detail {

class GeneratorImpl {
 public:
  explicit GeneratorImpl(Interval iv) : interval_(iv) {}
  virtual ~GeneratorImpl() = default;

  virtual Kind kind() const = 0;
  virtual std::string name() const = 0;
  virtual double value(double x) const = 0;
  virtual double deriv1(double x, Side side) const = 0;
  virtual double deriv2(double x, Side side) const = 0;
  virtual double index(double x, Side side) const = 0;
  virtual std::vector<double> kinks() const { return {}; }
  virtual json spec() const = 0;

  const Interval& interval() const noexcept { return interval_; }
  const Smoothness& smoothness() const noexcept { return flags_; }

 protected:
  Interval interval_;
  Smoothness flags_;
};

inline json interval_json(const Interval& iv) { return json::array({iv.lo(), iv.hi()}); }

}  // namespace detail

// A generator of a quasi-arithmetic mean: a continuous strictly monotone
// function on an interval. Immutable value type; copies share state.
class Generator {
 public:
  explicit Generator(std::shared_ptr<const detail::GeneratorImpl> impl) : impl_(std::move(impl)) {
    check_monotone();
  }

  // Catalog entries.
  static Generator identity(const Interval& iv);
  static Generator power(double p, const Interval& iv);
  static Generator log(const Interval& iv);
  static Generator exp_scaled(double alpha, const Interval& iv);
  static Generator sin(const Interval& iv);
  static Generator tan(const Interval& iv);
  static Generator cube(const Interval& iv);

  Kind kind() const noexcept { return impl_->kind(); }
  std::string name() const { return impl_->name(); }
  const Interval& interval() const noexcept { return impl_->interval(); }
  const Smoothness& smoothness() const noexcept { return impl_->smoothness(); }
  bool increasing() const { return increasing_; }

  double value(double x) const {
    check_domain(x);
    return impl_->value(x);
  }

  double deriv1(double x, Side side = Side::Both) const {
    if (!smoothness().has_deriv1()) throw CapabilityError(name() + ": first derivative unavailable");
    check_domain(x);
    return impl_->deriv1(x, side);
  }

  double deriv2(double x, Side side = Side::Both) const {
    if (!smoothness().has_deriv2()) throw CapabilityError(name() + ": second derivative unavailable");
    check_domain(x);
    return impl_->deriv2(x, side);
  }

  // f''(x)/f'(x) without capability checks; use arrow_pratt() for the checked form.
  double index_at(double x, Side side = Side::Both) const {
    check_domain(x);
    return impl_->index(x, side);
  }

  // Points where the index (or, for kinked generators, the derivative) breaks.
  std::vector<double> kinks() const { return impl_->kinks(); }

  json spec() const { return origin_ ? *origin_ : impl_->spec(); }

  // Copy that serializes as `origin` (lattice results name their operation).
  Generator with_origin(json origin) const {
    Generator g = *this;
    g.origin_ = std::move(origin);
    return g;
  }

  const detail::GeneratorImpl& impl() const noexcept { return *impl_; }
  const std::shared_ptr<const detail::GeneratorImpl>& impl_ptr() const noexcept { return impl_; }

 private:
  void check_domain(double x) const {
    if (!interval().contains(x)) {
      std::ostringstream os;
      os.precision(17);
      os << name() << ": x=" << x << " outside working interval [" << interval().work_lo() << ", "
         << interval().work_hi() << "]";
      throw DomainError(os.str());
    }
  }

  void check_monotone() {
    const Grid g = make_grid(interval(), 65);
    double prev = impl_->value(g[0]);
    const double last = impl_->value(g.back());
    increasing_ = last > prev;
    for (std::size_t i = 1; i < g.size(); ++i) {
      const double cur = impl_->value(g[i]);
      if (!std::isfinite(cur) || (increasing_ ? !(cur > prev) : !(cur < prev))) {
        std::ostringstream os;
        os << name() << " is not strictly monotone on the working interval (near x=" << g[i] << ")";
        throw DomainError(os.str());
      }
      prev = cur;
    }
  }

  std::shared_ptr<const detail::GeneratorImpl> impl_;
  std::optional<json> origin_;
  bool increasing_ = true;
};

// ---------------------------------------------------------------------------
// Catalog

namespace detail {

enum class CatalogName { Identity, Power, Log, ExpScaled, Sin, Tan, Cube };

class CatalogImpl final : public GeneratorImpl {
 public:
  CatalogImpl(CatalogName n, double param, const Interval& iv) : GeneratorImpl(iv), n_(n), p_(param) {
    validate();
    flags_.c1 = true;
    flags_.c2 = true;
    flags_.piecewise_c2 = true;
    flags_.nonvanishing = true;
    if (n_ == CatalogName::Cube && iv.work_lo() <= 0.0 && iv.work_hi() >= 0.0) flags_.nonvanishing = false;
  }

  Kind kind() const override { return Kind::Catalog; }

  std::string name() const override {
    std::ostringstream os;
    switch (n_) {
      case CatalogName::Identity:
        return "identity";
      case CatalogName::Power:
        os << "power(" << p_ << ")";
        return os.str();
      case CatalogName::Log:
        return "log";
      case CatalogName::ExpScaled:
        os << "exp-scaled(" << p_ << ")";
        return os.str();
      case CatalogName::Sin:
        return "sin";
      case CatalogName::Tan:
        return "tan";
      case CatalogName::Cube:
        return "cube";
    }
    return "?";
  }

  double value(double x) const override {
    switch (n_) {
      case CatalogName::Identity:
        return x;
      case CatalogName::Power:
        return std::pow(x, p_);
      case CatalogName::Log:
        return std::log(x);
      case CatalogName::ExpScaled:
        return std::exp(p_ * x);
      case CatalogName::Sin:
        return std::sin(x);
      case CatalogName::Tan:
        return std::tan(x);
      case CatalogName::Cube:
        return x * x * x;
    }
    return 0.0;
  }

  double deriv1(double x, Side) const override {
    switch (n_) {
      case CatalogName::Identity:
        return 1.0;
      case CatalogName::Power:
        return p_ * std::pow(x, p_ - 1.0);
      case CatalogName::Log:
        return 1.0 / x;
      case CatalogName::ExpScaled:
        return p_ * std::exp(p_ * x);
      case CatalogName::Sin:
        return std::cos(x);
      case CatalogName::Tan: {
        const double t = std::tan(x);
        return 1.0 + t * t;
      }
      case CatalogName::Cube:
        return 3.0 * x * x;
    }
    return 0.0;
  }

  double deriv2(double x, Side) const override {
    switch (n_) {
      case CatalogName::Identity:
        return 0.0;
      case CatalogName::Power:
        return p_ * (p_ - 1.0) * std::pow(x, p_ - 2.0);
      case CatalogName::Log:
        return -1.0 / (x * x);
      case CatalogName::ExpScaled:
        return p_ * p_ * std::exp(p_ * x);
      case CatalogName::Sin:
        return -std::sin(x);
      case CatalogName::Tan: {
        const double t = std::tan(x);
        return 2.0 * t * (1.0 + t * t);
      }
      case CatalogName::Cube:
        return 6.0 * x;
    }
    return 0.0;
  }

  double index(double x, Side) const override {
    switch (n_) {
      case CatalogName::Identity:
        return 0.0;
      case CatalogName::Power:
        return (p_ - 1.0) / x;
      case CatalogName::Log:
        return -1.0 / x;
      case CatalogName::ExpScaled:
        return p_;
      case CatalogName::Sin:
        return -std::tan(x);
      case CatalogName::Tan:
        return 2.0 * std::tan(x);
      case CatalogName::Cube:
        return 2.0 / x;
    }
    return 0.0;
  }

  json spec() const override {
    json j{{"kind", "catalog"}};
    switch (n_) {
      case CatalogName::Identity:
        j["name"] = "identity";
        break;
      case CatalogName::Power:
        j["name"] = "power";
        j["p"] = p_;
        break;
      case CatalogName::Log:
        j["name"] = "log";
        break;
      case CatalogName::ExpScaled:
        j["name"] = "exp-scaled";
        j["alpha"] = p_;
        break;
      case CatalogName::Sin:
        j["name"] = "sin";
        break;
      case CatalogName::Tan:
        j["name"] = "tan";
        break;
      case CatalogName::Cube:
        j["name"] = "cube";
        break;
    }
    j["interval"] = interval_json(interval_);
    j["margin"] = interval_.margin();
    return j;
  }

 private:
  void validate() const {
    const double a = interval_.work_lo();
    const double b = interval_.work_hi();
    auto fail = [&](const std::string& why) { throw DomainError(name() + ": " + why); };
    switch (n_) {
      case CatalogName::Power:
        if (p_ == 0.0 || !std::isfinite(p_)) fail("exponent must be finite and nonzero (use log for p=0)");
        if (a <= 0.0) fail("working interval must lie in (0, inf)");
        break;
      case CatalogName::Log:
        if (a <= 0.0) fail("working interval must lie in (0, inf)");
        break;
      case CatalogName::ExpScaled:
        if (p_ == 0.0 || !std::isfinite(p_)) fail("alpha must be finite and nonzero");
        break;
      case CatalogName::Sin:
      case CatalogName::Tan:
        if (!(a > -std::numbers::pi / 2) || !(b < std::numbers::pi / 2))
          fail("working interval must lie inside (-pi/2, pi/2)");
        break;
      default:
        break;
    }
  }

  CatalogName n_;
  double p_;
};

}  // namespace detail

inline Generator Generator::identity(const Interval& iv) {
  return Generator(std::make_shared<detail::CatalogImpl>(detail::CatalogName::Identity, 0.0, iv));
}
inline Generator Generator::power(double p, const Interval& iv) {
  return Generator(std::make_shared<detail::CatalogImpl>(detail::CatalogName::Power, p, iv));
}
inline Generator Generator::log(const Interval& iv) {
  return Generator(std::make_shared<detail::CatalogImpl>(detail::CatalogName::Log, 0.0, iv));
}
inline Generator Generator::exp_scaled(double alpha, const Interval& iv) {
  return Generator(std::make_shared<detail::CatalogImpl>(detail::CatalogName::ExpScaled, alpha, iv));
}
inline Generator Generator::sin(const Interval& iv) {
  return Generator(std::make_shared<detail::CatalogImpl>(detail::CatalogName::Sin, 0.0, iv));
}
inline Generator Generator::tan(const Interval& iv) {
  return Generator(std::make_shared<detail::CatalogImpl>(detail::CatalogName::Tan, 0.0, iv));
}
inline Generator Generator::cube(const Interval& iv) {
  return Generator(std::make_shared<detail::CatalogImpl>(detail::CatalogName::Cube, 0.0, iv));
}

// ---------------------------------------------------------------------------
// Index-defined generators: the normalized solution of h''/h' = A with
// h(anchor) = 0, h'(anchor) = 1.
//
// A node table holds L(x_i) = int_{anchor}^{x_i} A and V(x_i) = h(x_i). Kinks
// of A and the anchor are nodes, so A is smooth inside every cell and a
// Gauss-Legendre rule per cell is accurate to roundoff. Off-node evaluation
// integrates only inside the containing cell, which keeps value() O(1).

struct ReconstructOptions {
  std::size_t table_size = 4096;
};

namespace detail {

class IndexDefinedImpl final : public GeneratorImpl {
 public:
  IndexDefinedImpl(ArrowPrattIndex a, const Interval& iv, double anchor, ReconstructOptions opts)
      : GeneratorImpl(iv), a_(std::move(a)), anchor_(anchor) {
    if (!iv.contains(anchor)) throw DomainError("reconstruct: anchor outside working interval");
    if (opts.table_size < 2) throw DomainError("reconstruct: table needs at least 2 nodes");
    anchor_ = std::clamp(anchor_, iv.work_lo(), iv.work_hi());
    std::vector<double> extra = a_.kinks;
    extra.push_back(anchor_);
    nodes_ = with_points(make_grid(iv, opts.table_size), extra).points();
    kinks_.clear();
    for (double k : a_.kinks) {
      if (k > iv.work_lo() && k < iv.work_hi()) kinks_.push_back(k);
    }
    std::sort(kinks_.begin(), kinks_.end());
    build();
    flags_.c1 = true;
    flags_.c2 = true;
    flags_.piecewise_c2 = true;
    flags_.nonvanishing = true;
  }

  Kind kind() const override { return Kind::IndexDefined; }
  std::string name() const override { return "index-defined"; }

  double value(double x) const override {
    const std::size_t i = cell(x);
    if (x == nodes_[i]) return v_[i];
    const double xi = nodes_[i];
    const double li = l_[i];
    auto d = [&](double t) { return std::exp(li + gauss_cell(a_.eval, xi, t)); };
    return v_[i] + gauss_cell(d, xi, x);
  }

  double deriv1(double x, Side) const override {
    const std::size_t i = cell(x);
    if (x == nodes_[i]) return std::exp(l_[i]);
    return std::exp(l_[i] + gauss_cell(a_.eval, nodes_[i], x));
  }

  double deriv2(double x, Side side) const override { return index(x, side) * deriv1(x, side); }
  double index(double x, Side) const override { return a_.eval(x); }
  std::vector<double> kinks() const override { return kinks_; }

  json spec() const override {
    throw CapabilityError(
        "index-defined generator has no serializable form unless produced by join/meet");
  }

  double anchor() const noexcept { return anchor_; }
  const ArrowPrattIndex& source_index() const noexcept { return a_; }

 private:
  std::size_t cell(double x) const {
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
    if (it == nodes_.begin()) return 0;
    std::size_t i = static_cast<std::size_t>(it - nodes_.begin()) - 1;
    if (i + 1 >= nodes_.size()) i = nodes_.size() - 2;
    return i;
  }

  void build() {
    const std::size_t n = nodes_.size();
    l_.assign(n, 0.0);
    v_.assign(n, 0.0);
    const auto ia = static_cast<std::size_t>(
        std::lower_bound(nodes_.begin(), nodes_.end(), anchor_) - nodes_.begin());
    for (double x : nodes_) sample_check(x);
    auto cell_int = [&](std::size_t i) {
      const double xi = nodes_[i];
      const double li = l_[i];
      auto d = [&](double t) { return std::exp(li + gauss_cell(a_.eval, xi, t)); };
      return gauss_cell(d, xi, nodes_[i + 1]);
    };
    for (std::size_t i = ia + 1; i < n; ++i) {
      l_[i] = l_[i - 1] + gauss_cell(a_.eval, nodes_[i - 1], nodes_[i]);
      v_[i] = v_[i - 1] + cell_int(i - 1);
      finite_check(i);
    }
    for (std::size_t i = ia; i-- > 0;) {
      l_[i] = l_[i + 1] - gauss_cell(a_.eval, nodes_[i], nodes_[i + 1]);
      v_[i] = v_[i + 1] - cell_int(i);
      finite_check(i);
    }
  }

  void sample_check(double x) const {
    if (!std::isfinite(a_.eval(x))) {
      std::ostringstream os;
      os << "reconstruct: index is not finite at x=" << x;
      throw DomainError(os.str());
    }
  }

  void finite_check(std::size_t i) const {
    if (!std::isfinite(l_[i]) || !std::isfinite(v_[i]) || !std::isfinite(std::exp(l_[i]))) {
      std::ostringstream os;
      os << "reconstruct: generator overflows near x=" << nodes_[i];
      throw DomainError(os.str());
    }
  }

  ArrowPrattIndex a_;
  double anchor_;
  std::vector<double> nodes_;
  std::vector<double> l_;
  std::vector<double> v_;
  std::vector<double> kinks_;
};

// ---------------------------------------------------------------------------

class AffineImpl final : public GeneratorImpl {
 public:
  AffineImpl(Generator base, double alpha, double beta)
      : GeneratorImpl(base.interval()), base_(std::move(base)), alpha_(alpha), beta_(beta) {
    if (alpha == 0.0 || !std::isfinite(alpha) || !std::isfinite(beta))
      throw DomainError("affine: alpha must be finite and nonzero, beta finite");
    flags_ = base_.smoothness();
  }

  Kind kind() const override { return Kind::Affine; }
  std::string name() const override {
    std::ostringstream os;
    os << alpha_ << "*" << base_.name() << "+" << beta_;
    return os.str();
  }
  double value(double x) const override { return alpha_ * base_.impl().value(x) + beta_; }
  double deriv1(double x, Side s) const override { return alpha_ * base_.impl().deriv1(x, s); }
  double deriv2(double x, Side s) const override { return alpha_ * base_.impl().deriv2(x, s); }
  double index(double x, Side s) const override { return base_.impl().index(x, s); }
  std::vector<double> kinks() const override { return base_.kinks(); }
  json spec() const override {
    return json{{"kind", "affine"}, {"alpha", alpha_}, {"beta", beta_}, {"base", base_.spec()}};
  }

 private:
  Generator base_;
  double alpha_;
  double beta_;
};

class ReflectedImpl final : public GeneratorImpl {
 public:
  explicit ReflectedImpl(Generator base)
      : GeneratorImpl(base.interval().reflected()), base_(std::move(base)) {
    flags_ = base_.smoothness();
  }

  Kind kind() const override { return Kind::Reflected; }
  std::string name() const override { return "reflect(" + base_.name() + ")"; }
  double value(double x) const override { return base_.impl().value(-x); }
  double deriv1(double x, Side s) const override { return -base_.impl().deriv1(-x, flip(s)); }
  double deriv2(double x, Side s) const override { return base_.impl().deriv2(-x, flip(s)); }
  double index(double x, Side s) const override { return -base_.impl().index(-x, flip(s)); }
  std::vector<double> kinks() const override {
    std::vector<double> k = base_.kinks();
    for (double& z : k) z = -z;
    std::reverse(k.begin(), k.end());
    return k;
  }
  json spec() const override { return json{{"kind", "reflect"}, {"base", base_.spec()}}; }

  const Generator& base() const noexcept { return base_; }

 private:
  Generator base_;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Piecewise generators: pieces glued at breakpoints b_1 < ... < b_m. On the
// segment between b_k and b_{k+1} the value is scale_k * piece_k(x) + offset_k.

struct PiecewiseData {
  Interval interval;
  std::vector<double> breakpoints;
  std::vector<Generator> pieces;
  std::vector<double> scales;
  std::vector<double> offsets;

  std::size_t segment(double x, Side side) const {
    const double tol = interval.slack();
    for (std::size_t j = 0; j < breakpoints.size(); ++j) {
      if (std::abs(x - breakpoints[j]) <= tol) return side == Side::Left ? j : j + 1;
      if (x < breakpoints[j]) return j;
    }
    return breakpoints.size();
  }

  double value(double x) const {
    const std::size_t k = segment(x, Side::Both);
    return scales[k] * pieces[k].impl().value(x) + offsets[k];
  }
  double deriv1(double x, Side side) const {
    const std::size_t k = segment(x, side);
    return scales[k] * pieces[k].impl().deriv1(x, side);
  }
  double deriv2(double x, Side side) const {
    const std::size_t k = segment(x, side);
    return scales[k] * pieces[k].impl().deriv2(x, side);
  }
  double index(double x, Side side) const {
    const std::size_t k = segment(x, side);
    return pieces[k].impl().index(x, side);
  }
};

namespace detail {

inline bool close_rel(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

class PiecewiseImpl final : public GeneratorImpl {
 public:
  explicit PiecewiseImpl(PiecewiseData d) : GeneratorImpl(d.interval), d_(std::move(d)) {
    const auto m = d_.breakpoints.size();
    if (d_.pieces.size() != m + 1) throw DomainError("piecewise: need exactly one more piece than breakpoints");
    if (d_.scales.empty()) d_.scales.assign(m + 1, 1.0);
    if (d_.scales.size() != m + 1) throw DomainError("piecewise: scales must match pieces");
    for (double s : d_.scales) {
      if (s == 0.0 || !std::isfinite(s)) throw DomainError("piecewise: piece scales must be finite and nonzero");
    }
    for (std::size_t j = 0; j < m; ++j) {
      const double b = d_.breakpoints[j];
      if (!(b > interval_.work_lo() && b < interval_.work_hi()))
        throw DomainError("piecewise: breakpoints must lie strictly inside the working interval");
      if (j > 0 && !(d_.breakpoints[j - 1] < b)) throw DomainError("piecewise: breakpoints must increase");
    }
    for (std::size_t k = 0; k <= m; ++k) {
      const double a = k == 0 ? interval_.work_lo() : d_.breakpoints[k - 1];
      const double b = k == m ? interval_.work_hi() : d_.breakpoints[k];
      const Interval& piv = d_.pieces[k].interval();
      if (!piv.contains(a) || !piv.contains(b)) throw DomainError("piecewise: piece does not cover its segment");
    }
    if (d_.offsets.empty()) {
      d_.offsets.assign(m + 1, 0.0);
      for (std::size_t j = 0; j < m; ++j) {
        const double b = d_.breakpoints[j];
        const double left = d_.scales[j] * d_.pieces[j].impl().value(b) + d_.offsets[j];
        d_.offsets[j + 1] = left - d_.scales[j + 1] * d_.pieces[j + 1].impl().value(b);
      }
    }
    if (d_.offsets.size() != m + 1) throw DomainError("piecewise: offsets must match pieces");
    for (std::size_t j = 0; j < m; ++j) {
      const double b = d_.breakpoints[j];
      const double left = d_.scales[j] * d_.pieces[j].impl().value(b) + d_.offsets[j];
      const double right = d_.scales[j + 1] * d_.pieces[j + 1].impl().value(b) + d_.offsets[j + 1];
      if (!close_rel(left, right, 1e-9)) {
        std::ostringstream os;
        os << "piecewise: value is discontinuous at breakpoint " << b;
        throw DomainError(os.str());
      }
    }
    derive_flags();
  }

  Kind kind() const override { return Kind::Piecewise; }
  std::string name() const override { return "piecewise"; }
  double value(double x) const override { return d_.value(x); }
  double deriv1(double x, Side s) const override { return d_.deriv1(x, s); }
  double deriv2(double x, Side s) const override { return d_.deriv2(x, s); }
  double index(double x, Side s) const override { return d_.index(x, s); }

  std::vector<double> kinks() const override {
    std::vector<double> k = d_.breakpoints;
    for (const auto& p : d_.pieces) {
      for (double z : p.kinks()) k.push_back(z);
    }
    std::sort(k.begin(), k.end());
    k.erase(std::unique(k.begin(), k.end()), k.end());
    return k;
  }

  json spec() const override {
    json pieces = json::array();
    for (const auto& p : d_.pieces) pieces.push_back(p.spec());
    return json{{"kind", "piecewise"},
                {"interval", interval_json(interval_)},
                {"margin", interval_.margin()},
                {"breakpoints", d_.breakpoints},
                {"pieces", pieces},
                {"scales", d_.scales},
                {"offsets", d_.offsets}};
  }

  const PiecewiseData& data() const noexcept { return d_; }

 private:
  void derive_flags() {
    bool pw = true;
    bool nonvanishing = true;
    for (const auto& p : d_.pieces) {
      pw = pw && p.smoothness().has_deriv2() && p.smoothness().has_deriv1();
      nonvanishing = nonvanishing && p.smoothness().nonvanishing;
    }
    flags_.piecewise_c2 = pw;
    flags_.nonvanishing = nonvanishing;
    bool c1 = pw;
    bool c2 = pw && std::all_of(d_.pieces.begin(), d_.pieces.end(),
                                [](const Generator& p) { return p.smoothness().c2; });
    for (double b : d_.breakpoints) {
      if (!c1) break;
      c1 = close_rel(d_.deriv1(b, Side::Left), d_.deriv1(b, Side::Right), 1e-9);
      c2 = c2 && c1 && close_rel(d_.deriv2(b, Side::Left), d_.deriv2(b, Side::Right), 1e-9);
    }
    flags_.c1 = c1;
    flags_.c2 = c1 && c2;
  }

  PiecewiseData d_;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Free-function surface.

inline double value(const Generator& f, double x) { return f.value(x); }
inline double deriv1(const Generator& f, double x, Side side = Side::Both) { return f.deriv1(x, side); }
inline double deriv2(const Generator& f, double x, Side side = Side::Both) { return f.deriv2(x, side); }

inline void require_sm(const Generator& f, const std::string& op) {
  if (!f.smoothness().in_sm()) {
    throw CapabilityError(op + ": " + f.name() + " is not C2 with nonvanishing derivative (has " +
                          f.smoothness().describe() + ")");
  }
}

inline ArrowPrattIndex arrow_pratt(const Generator& f) {
  require_sm(f, "arrow_pratt");
  return ArrowPrattIndex{[f](double x) { return f.index_at(x); }, f.kinks()};
}

inline Generator reconstruct(ArrowPrattIndex a, const Interval& iv, double anchor,
                             ReconstructOptions opts = {}) {
  return Generator(std::make_shared<detail::IndexDefinedImpl>(std::move(a), iv, anchor, opts));
}

inline Generator reconstruct(ArrowPrattIndex a, const Interval& iv) {
  return reconstruct(std::move(a), iv, iv.midpoint());
}

inline Generator affine(const Generator& f, double alpha, double beta) {
  return Generator(std::make_shared<detail::AffineImpl>(f, alpha, beta));
}

inline Generator reflect(const Generator& f) {
  if (f.kind() == Kind::Reflected) {
    return static_cast<const detail::ReflectedImpl&>(f.impl()).base();
  }
  return Generator(std::make_shared<detail::ReflectedImpl>(f));
}

inline Generator piecewise(PiecewiseData d) {
  return Generator(std::make_shared<detail::PiecewiseImpl>(std::move(d)));
}

// Glue `pieces` at `breakpoints` with unit scales; later pieces are shifted
// so the value is continuous.
inline Generator piecewise(const Interval& iv, std::vector<double> breakpoints, std::vector<Generator> pieces) {
  return piecewise(PiecewiseData{iv, std::move(breakpoints), std::move(pieces), {}, {}});
}

}  // namespace qam
