#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "qam/qam.hpp"
#include "qam/verify.hpp"

using namespace qam;

namespace {

constexpr double kHalfPi = std::numbers::pi / 2;
constexpr double kEquivTol = 1e-6;

Interval half_turn() { return Interval(-kHalfPi, kHalfPi, 0.01); }
Interval positive_reals() { return Interval(0.1, 10.0); }

double sin_then_tan(double x) { return x <= 0.0 ? std::sin(x) : std::tan(x); }
double tan_then_sin(double x) { return x <= 0.0 ? std::tan(x) : std::sin(x); }

}  // namespace

// --- join ---------------------------------------------------------------------------

TEST(Join, SinTanIndexAndShape) {
  const Interval iv = half_turn();
  const LatticeResult r = join({Generator::sin(iv), Generator::tan(iv)}, iv);
  EXPECT_EQ(r.kind, LatticeKind::Join);
  ASSERT_EQ(r.index.kinks.size(), 1u);
  EXPECT_NEAR(r.index.kinks[0], 0.0, 1e-12);
  for (double x : make_grid(iv, 512)) {
    ASSERT_EQ(r.index(x), std::max(-std::tan(x), 2.0 * std::tan(x)));
  }
  const Grid g = make_grid(iv, 512);
  EXPECT_LE(verify::aligned_deviation(r.generator, sin_then_tan, g, -0.5, 0.5), 1e-6);
  EXPECT_TRUE(r.generator.smoothness().in_sm());
  EXPECT_TRUE(r.generator.increasing());
}

TEST(Join, SingletonIsEquivalentToOperand) {
  const Interval iv = positive_reals();
  const Generator f = Generator::power(3.0, iv);
  const LatticeResult r = join({f}, iv);
  EXPECT_LE(pales_distance(r.generator, f, make_grid(iv, 512)), kEquivTol);
  EXPECT_TRUE(r.index.kinks.empty());
}

TEST(Join, PowersGivePowerOfLargerExponent) {
  const Interval iv = positive_reals();
  const Grid g = make_grid(iv, 512);
  const LatticeResult r = join({Generator::power(-1.0, iv), Generator::power(2.0, iv)}, iv);
  for (double x : g) ASSERT_DOUBLE_EQ(r.index(x), 1.0 / x);
  EXPECT_LE(pales_distance(r.generator, Generator::power(2.0, iv), g), kEquivTol);
}

TEST(Join, CubeThroughZeroSaysMaxIsNotAMean) {
  const Interval iv(-1.0, 1.0, 0.01);
  try {
    (void)join({Generator::identity(iv), Generator::cube(iv)}, iv);
    FAIL() << "expected CapabilityError";
  } catch (const CapabilityError& e) {
    EXPECT_NE(std::string(e.what()).find("supremum is max(v); not a quasi-arithmetic mean"), std::string::npos)
        << e.what();
  }
  EXPECT_THROW(meet({Generator::identity(iv), Generator::cube(iv)}, iv), CapabilityError);
}

TEST(Join, OperandCountAndCoverage) {
  const Interval iv = positive_reals();
  EXPECT_THROW(join(std::vector<Generator>{}, iv), DomainError);
  std::vector<Generator> many(kMaxLatticeOperands + 1, Generator::log(iv));
  EXPECT_THROW(join(many, iv), DomainError);
  EXPECT_THROW(join({Generator::log(Interval(1.0, 2.0))}, iv), DomainError);
}

TEST(Join, ResultSpecNamesTheOperation) {
  const Interval iv = half_turn();
  const LatticeResult r = join({Generator::sin(iv), Generator::tan(iv)}, iv);
  const json s = r.generator.spec();
  EXPECT_EQ(s["kind"], "join");
  EXPECT_EQ(s["operands"].size(), 2u);
}

// --- meet ------------------------------------------------------------------------------

TEST(Meet, SinTanIsTanThenSin) {
  const Interval iv = half_turn();
  const LatticeResult r = meet({Generator::sin(iv), Generator::tan(iv)}, iv);
  for (double x : make_grid(iv, 512)) ASSERT_EQ(r.index(x), std::min(-std::tan(x), 2.0 * std::tan(x)));
  EXPECT_LE(verify::aligned_deviation(r.generator, tan_then_sin, make_grid(iv, 512), -0.5, 0.5), 1e-6);
}

TEST(Meet, SingletonAndPowers) {
  const Interval iv = positive_reals();
  const Grid g = make_grid(iv, 512);
  const Generator lg = Generator::log(iv);
  EXPECT_LE(pales_distance(meet({lg}, iv).generator, lg, g), kEquivTol);
  const LatticeResult r = meet({Generator::power(0.5, iv), Generator::power(3.0, iv)}, iv);
  EXPECT_LE(pales_distance(r.generator, Generator::power(0.5, iv), g), kEquivTol);
}

// --- algebraic laws up to equivalence ----------------------------------------------------

TEST(LatticeLaws, CommutativeAssociativeIdempotent) {
  const Interval iv = half_turn();
  const Generator f = Generator::sin(iv);
  const Generator g = Generator::tan(iv);
  const Generator k = Generator::exp_scaled(0.7, iv);
  const Grid grid = make_grid(iv, 512);
  EXPECT_LE(pales_distance(join({f, g}, iv).generator, join({g, f}, iv).generator, grid), kEquivTol);
  const Generator left = join({f, join({g, k}, iv).generator}, iv).generator;
  const Generator right = join({join({f, g}, iv).generator, k}, iv).generator;
  EXPECT_LE(pales_distance(left, right, grid), kEquivTol);
  EXPECT_LE(pales_distance(join({f, f}, iv).generator, f, grid), kEquivTol);
}

TEST(LatticeLaws, Absorption) {
  const Interval iv = half_turn();
  const Generator f = Generator::sin(iv);
  const Generator g = Generator::tan(iv);
  const Grid grid = make_grid(iv, 512);
  EXPECT_LE(pales_distance(meet({f, join({f, g}, iv).generator}, iv).generator, f, grid), kEquivTol);
  EXPECT_LE(pales_distance(join({f, meet({f, g}, iv).generator}, iv).generator, f, grid), kEquivTol);
}

TEST(LatticeLaws, NaryIndexEqualsBinaryFold) {
  const Interval iv(0.1, 1.5);
  const auto fam = verify::comparison_family();
  const Grid grid = make_grid(iv, 512);
  for (std::size_t n = 3; n <= 5; ++n) {
    const std::vector<Generator> ops(fam.begin(), fam.begin() + static_cast<long>(n));
    for (LatticeKind kind : {LatticeKind::Join, LatticeKind::Meet}) {
      const LatticeResult direct = kind == LatticeKind::Join ? join(ops, iv) : meet(ops, iv);
      const LatticeResult folded = fold(kind, ops, iv);
      for (double x : grid) {
        double ext = ops[0].index_at(x);
        for (const auto& f : ops) ext = kind == LatticeKind::Join ? std::max(ext, f.index_at(x)) : std::min(ext, f.index_at(x));
        ASSERT_EQ(direct.index(x), ext) << "n=" << n << " x=" << x;
        ASSERT_NEAR(folded.index(x), ext, 1e-8 * (1 + std::abs(ext))) << "n=" << n << " x=" << x;
      }
    }
  }
}

TEST(LatticeLaws, OperandsAreBelowJoinAndAboveMeet) {
  const auto fam = verify::comparison_family();
  const Interval& iv = fam[0].interval();
  const Grid grid = make_grid(iv, 512);
  for (std::size_t i = 0; i < fam.size(); ++i) {
    for (std::size_t j = i + 1; j < fam.size(); ++j) {
      const LatticeResult up = join({fam[i], fam[j]}, iv);
      const LatticeResult down = meet({fam[i], fam[j]}, iv);
      for (const Generator* f : {&fam[i], &fam[j]}) {
        const Verdict vu = compare_index(*f, up.generator, grid).verdict;
        const Verdict vd = compare_index(down.generator, *f, grid).verdict;
        EXPECT_TRUE(vu == Verdict::Less || vu == Verdict::Equal) << f->name() << " " << to_string(vu);
        EXPECT_TRUE(vd == Verdict::Less || vd == Verdict::Equal) << f->name() << " " << to_string(vd);
      }
    }
  }
}

TEST(LatticeLaws, SampledUpperBoundProperty) {
  const Interval iv = half_turn();
  const Generator f = Generator::sin(iv);
  const Generator g = Generator::tan(iv);
  const Generator h = join({f, g}, iv).generator;
  const Generator k = meet({f, g}, iv).generator;
  verify::Rng rng(42);
  for (const auto& v : verify::random_vectors(rng, iv, 1000)) {
    const double mf = qa_mean(f, v);
    const double mg = qa_mean(g, v);
    ASSERT_GE(qa_mean(h, v), std::max(mf, mg) - 1e-8) << verify::show(v);
    ASSERT_LE(qa_mean(k, v), std::min(mf, mg) + 1e-8) << verify::show(v);
  }
}

TEST(LatticeLaws, ReflectionDuality) {
  const Interval iv = half_turn();
  const Generator f = Generator::sin(iv);
  const Generator g = Generator::tan(iv);
  const Generator k = meet({f, g}, iv).generator;
  const Generator h_hat = join({reflect(f), reflect(g)}, iv.reflected()).generator;
  verify::Rng rng(42);
  for (auto v : verify::random_vectors(rng, iv, 200)) {
    const double m = qa_mean(k, v);
    for (double& x : v) x = -x;
    ASSERT_LE(std::abs(m + qa_mean(h_hat, v)), 1e-8);
  }
}

// --- verify_lub ---------------------------------------------------------------------------

TEST(VerifyLub, MaxIndexItselfIsTight) {
  const Interval iv = half_turn();
  const LatticeResult r = join({Generator::sin(iv), Generator::tan(iv)}, iv);
  verify::Rng rng(42);
  const auto vs = verify::random_vectors(rng, iv, 100);
  const LubReport rep = verify_lub(r, {r.index}, vs, 1e-7);
  EXPECT_TRUE(rep.passed) << rep.first_failure;
  EXPECT_NEAR(rep.worst_bound_gap, 0.0, 1e-7);
}

TEST(VerifyLub, BumpedBoundsHold) {
  const Interval iv = half_turn();
  const LatticeResult r = join({Generator::sin(iv), Generator::tan(iv)}, iv);
  const auto top = r.index;
  const ArrowPrattIndex plus_half{[top](double x) { return top(x) + 0.5; }, top.kinks};
  const ArrowPrattIndex plus_bump{[top](double x) { return top(x) + 1.0 / (1.0 + x * x); }, top.kinks};
  verify::Rng rng(42);
  const auto vs = verify::random_vectors(rng, iv, 200);
  const LubReport rep = verify_lub(r, {plus_half, plus_bump}, vs, 1e-7);
  EXPECT_TRUE(rep.passed) << rep.first_failure;
  EXPECT_EQ(rep.checks, 200u * 3u);
}

TEST(VerifyLub, OperandAsBoundIsRejected) {
  const Interval iv = half_turn();
  const Generator s = Generator::sin(iv);
  const LatticeResult r = join({s, Generator::tan(iv)}, iv);
  EXPECT_THROW(verify_lub(r, {arrow_pratt(s)}, {{0.1, 0.2}}, 1e-7), PreconditionError);
}

TEST(VerifyLub, MeetUsesReversedInequalities) {
  const Interval iv = positive_reals();
  const LatticeResult r = meet({Generator::power(2.0, iv), Generator::log(iv)}, iv);
  const auto bottom = r.index;
  const ArrowPrattIndex lower{[bottom](double x) { return bottom(x) - 0.3; }, {}};
  verify::Rng rng(1);
  const LubReport rep = verify_lub(r, {bottom, lower}, verify::random_vectors(rng, iv, 100), 1e-7);
  EXPECT_TRUE(rep.passed) << rep.first_failure;
}
