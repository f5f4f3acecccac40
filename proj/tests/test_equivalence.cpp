#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "multishift/equivalence.hpp"
#include "multishift/error.hpp"
#include "multishift/kernelgen.hpp"
#include "multishift/sampling.hpp"

using namespace multishift;

namespace {

const CMatrix kSwap(2, 2, {0.0, 1.0, 1.0, 0.0});

MomentSystem scaled(const MomentSystem& m, double log_factor) {
  std::vector<HermPD> g;
  for (const auto& x : m.grams()) g.push_back(x.scaled_log(log_factor));
  return MomentSystem(m.truncation_ptr(), m.fiber_dim(), std::move(g));
}

PairGenerator pochhammer_pair(PochhammerPair p, PochhammerPair q, std::size_t d) {
  return [=](int n) { return std::make_pair(pochhammer_moments(p, d, n), pochhammer_moments(q, d, n)); };
}

}  // namespace

TEST(Sandwich, IdenticalSystems) {
  const auto m = random_moment_system(2, 3, 2, 1);
  const auto r = sandwich_ratio(m, m, CMatrix::identity(2));
  EXPECT_NEAR(r.log_m1, 0.0, 1e-12);
  EXPECT_NEAR(r.log_m2, 0.0, 1e-12);
  EXPECT_NEAR(r.log_ratio, 0.0, 1e-12);
}

TEST(Sandwich, GlobalScaling) {
  const auto m = random_moment_system(2, 3, 2, 2);
  const auto r = sandwich_ratio(m, scaled(m, std::log(2.0)), CMatrix::identity(2));
  EXPECT_NEAR(r.m1(), 2.0, 1e-12);
  EXPECT_NEAR(r.m2(), 2.0, 1e-12);
  EXPECT_NEAR(r.log_ratio, 0.0, 1e-12);
}

TEST(Sandwich, PochhammerSwap) {
  const auto r = sandwich_ratio(pochhammer_moments({1, 2}, 2, 12), pochhammer_moments({2, 1}, 2, 12), kSwap);
  EXPECT_NEAR(r.m1(), 1.0, 1e-12);
  EXPECT_NEAR(r.m2(), 1.0, 1e-12);
}

TEST(Sandwich, SingularCThrows) {
  const auto m = random_moment_system(1, 3, 2, 3);
  const CMatrix rank_one(2, 2, {1.0, 1.0, 1.0, 1.0});
  try {
    sandwich_ratio(m, m, rank_one);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingularC);
  }
  EXPECT_TRUE(std::isinf(SandwichEvaluator(m, m).log_ratio(rank_one)));
}

TEST(Sandwich, RejectsMismatchedSystems) {
  EXPECT_THROW(sandwich_ratio(random_moment_system(2, 3, 2, 1), random_moment_system(2, 4, 2, 1),
                              CMatrix::identity(2)),
               Error);
  EXPECT_THROW(sandwich_ratio(random_moment_system(2, 3, 2, 1), random_moment_system(2, 3, 3, 1),
                              CMatrix::identity(2)),
               Error);
}

TEST(SandwichProperty, LogRatioInvariantUnderScalingC) {
  const auto m = random_moment_system(2, 3, 2, 4);
  const auto mt = random_moment_system(2, 3, 2, 5);
  Rng rng(6);
  const CMatrix c = random_gaussian(2, 2, rng);
  const auto base = sandwich_ratio(m, mt, c);
  for (Complex s : {Complex(2.0), Complex(0.125), Complex(-3.7, 1.1)}) {
    const auto r = sandwich_ratio(m, mt, c * s);
    EXPECT_NEAR(r.log_ratio, base.log_ratio, 1e-12);
    EXPECT_NEAR(r.log_m1, base.log_m1 - 2 * std::log(std::abs(s)), 1e-12);
    EXPECT_NEAR(r.log_m2, base.log_m2 - 2 * std::log(std::abs(s)), 1e-12);
  }
}

TEST(SandwichProperty, CongruenceInvariance) {
  const auto m = random_moment_system(2, 3, 2, 7);
  const auto mt = random_moment_system(2, 3, 2, 8);
  Rng rng(9);
  const CMatrix p = random_gaussian(2, 2, rng);
  const CMatrix c = random_gaussian(2, 2, rng);
  const auto a = sandwich_ratio(m, mt, c);
  const auto b = sandwich_ratio(m.congruent(p), mt, solve(p, c));
  EXPECT_NEAR(a.log_m1, b.log_m1, 1e-10);
  EXPECT_NEAR(a.log_m2, b.log_m2, 1e-10);
}

TEST(SandwichProperty, SerialMatchesParallel) {
  const auto m = random_moment_system(3, 4, 3, 10);
  const auto mt = random_moment_system(3, 4, 3, 11);
  Rng rng(12);
  const CMatrix c = random_gaussian(3, 3, rng);
  const auto s = SandwichEvaluator(m, mt, Exec::Serial).evaluate(c);
  const auto p = SandwichEvaluator(m, mt, Exec::Parallel).evaluate(c);
  EXPECT_EQ(s.log_m1, p.log_m1);
  EXPECT_EQ(s.log_m2, p.log_m2);
  EXPECT_EQ(s.argmin, p.argmin);
  EXPECT_EQ(s.argmax, p.argmax);
}

TEST(Verify, IdenticalSystemsZeroMargins) {
  const auto m = random_moment_system(2, 3, 2, 13);
  const auto r = verify_certificate(m, m, {CMatrix::identity(2), 0.0, 0.0}, 1e-10);
  EXPECT_TRUE(r.passed);
  EXPECT_NEAR(r.worst_lower, 0.0, 1e-13);
  EXPECT_NEAR(r.worst_upper, 0.0, 1e-13);
  EXPECT_EQ(r.lower_margins.size(), m.size());
}

TEST(Verify, IdentityFailsForDifferentPochhammer) {
  const auto m = pochhammer_moments({1, 2}, 2, 16);
  const auto mt = pochhammer_moments({1, 3}, 2, 16);
  const auto r = verify_certificate(m, mt, {CMatrix::identity(2), 0.0, 0.0}, 1e-9);
  EXPECT_FALSE(r.passed);
  // Every index above the origin violates the lower bound, including the top degree.
  for (std::size_t pos = 1; pos < m.size(); ++pos) EXPECT_LT(r.lower_margins[pos], -1e-9);
  EXPECT_GE(r.upper_margins[m.size() - 1], 0.0);
}

TEST(Verify, SwapCertificate) {
  const auto r = verify_certificate(pochhammer_moments({1, 2}, 2, 20), pochhammer_moments({2, 1}, 2, 20),
                                    {kSwap, 0.0, 0.0}, 1e-10);
  EXPECT_TRUE(r.passed);
}

TEST(Verify, RejectsInvertedBounds) {
  const auto m = random_moment_system(1, 3, 2, 14);
  EXPECT_FALSE(verify_certificate(m, m, {CMatrix::identity(2), 0.1, -0.1}, 1e-9).passed);
}

TEST(VerifyProperty, CertificateSymmetry) {
  const auto k = pochhammer_kernel({1, 2}, 2, 10);
  Rng rng(15);
  std::map<MultiIndex, HermPD> repl;
  for (const auto& a : enumerate(2, 2)) repl.emplace(a, random_pd(2, rng));
  const auto p = perturb_kernel(k, repl);
  const auto m = k.moments();
  const auto mt = p.kernel.moments();
  ASSERT_TRUE(verify_certificate(m, mt, p.certificate, 1e-9).passed);
  const SimilarityCertificate back{inverse(p.certificate.c), -p.certificate.log_m2, -p.certificate.log_m1};
  EXPECT_TRUE(verify_certificate(mt, m, back, 1e-9).passed);
}

TEST(Optimize, IdenticalSystems) {
  const auto m = random_moment_system(2, 4, 2, 16);
  const auto cert = optimize_C(m, m);
  EXPECT_LE(cert.log_ratio(), 1e-10);
  EXPECT_TRUE(verify_certificate(m, m, cert, 1e-8).passed);
}

TEST(Optimize, PochhammerSwapRecovered) {
  const auto m = pochhammer_moments({1, 2}, 2, 24);
  const auto mt = pochhammer_moments({2, 1}, 2, 24);
  const auto cert = optimize_C(m, mt);
  EXPECT_LE(cert.log_ratio(), 1e-6);
  // Column-proportional to the swap: the diagonal is negligible.
  const double off = std::abs(cert.c(0, 1)) + std::abs(cert.c(1, 0));
  const double diag = std::abs(cert.c(0, 0)) + std::abs(cert.c(1, 1));
  EXPECT_LE(diag / off, 1e-3);
  EXPECT_TRUE(verify_certificate(m, mt, cert, 1e-8).passed);
}

TEST(Optimize, NonSimilarLowerBound) {
  const auto cert = optimize_C(pochhammer_moments({1, 2}, 2, 24), pochhammer_moments({1, 3}, 2, 24));
  EXPECT_GE(cert.log_ratio(), std::log(13.0) - 1e-9);
}

TEST(Optimize, SerialMatchesParallel) {
  const auto m = random_moment_system(2, 3, 2, 17);
  const auto mt = random_moment_system(2, 3, 2, 18);
  OptimizeOptions serial;
  serial.exec = Exec::Serial;
  serial.iterations = 40;
  OptimizeOptions parallel = serial;
  parallel.exec = Exec::Parallel;
  const auto a = optimize_C(m, mt, serial);
  const auto b = optimize_C(m, mt, parallel);
  EXPECT_EQ(a.log_m1, b.log_m1);
  EXPECT_EQ(a.log_m2, b.log_m2);
  EXPECT_TRUE(std::equal(a.c.entries().begin(), a.c.entries().end(), b.c.entries().begin()));
}

TEST(FitLine, ExactAndFlat) {
  const std::vector<double> x{1, 2, 3, 4};
  const std::vector<double> y{3, 5, 7, 9};
  const auto f = fit_line(x, y);
  EXPECT_NEAR(f.slope, 2.0, 1e-14);
  EXPECT_NEAR(f.intercept, 1.0, 1e-14);
  EXPECT_NEAR(f.r_squared, 1.0, 1e-14);
  const std::vector<double> flat{2, 2, 2, 2};
  const auto g = fit_line(x, flat);
  EXPECT_EQ(g.slope, 0.0);
  EXPECT_EQ(g.r_squared, 1.0);
}

TEST(Growth, SimilarPair) {
  const std::vector<int> degrees{8, 16, 24, 32};
  const auto g = growth_diagnostic(pochhammer_pair({1, 2}, {2, 1}, 2), degrees);
  EXPECT_EQ(g.verdict, GrowthVerdict::SimilarEvidence);
  EXPECT_LE(std::abs(g.fit.slope), 0.1);
  ASSERT_EQ(g.rows.size(), 4u);
}

TEST(Growth, NonSimilarPair) {
  const std::vector<int> degrees{8, 16, 24, 32};
  const auto g = growth_diagnostic(pochhammer_pair({1, 2}, {1, 3}, 2), degrees);
  EXPECT_EQ(g.verdict, GrowthVerdict::NotSimilarEvidence);
  EXPECT_GE(g.fit.slope, 0.8);
  EXPECT_LE(g.fit.slope, 1.2);
  // The optimal ratio for this pair is (N+2)/2.
  for (const auto& row : g.rows) EXPECT_NEAR(row.log_ratio, std::log((row.degree + 2) / 2.0), 1e-6);
}

TEST(Growth, IdenticalSystems) {
  const std::vector<int> degrees{2, 3, 4, 5};
  const auto g = growth_diagnostic(
      [](int n) {
        const auto m = random_moment_system(2, n, 2, 19);
        return std::make_pair(m, m);
      },
      degrees);
  EXPECT_EQ(g.verdict, GrowthVerdict::SimilarEvidence);
  EXPECT_NEAR(g.fit.slope, 0.0, 1e-9);
  EXPECT_NEAR(g.max_log_ratio, 0.0, 1e-9);
}

TEST(Growth, SlopeTracksParameterGap) {
  // Predicted slopes over these degrees are 0.975 and 1.938.
  const std::vector<int> degrees{32, 64, 128, 256};
  const auto one = growth_diagnostic(pochhammer_pair({1, 2}, {1, 3}, 1), degrees);
  const auto two = growth_diagnostic(pochhammer_pair({1, 2}, {1, 4}, 1), degrees);
  EXPECT_NEAR(one.fit.slope, 1.0, 0.1);
  EXPECT_NEAR(two.fit.slope, 2.0, 0.2);
  EXPECT_EQ(two.verdict, GrowthVerdict::NotSimilarEvidence);
}

TEST(Growth, RejectsBadDegrees) {
  const std::vector<int> unsorted{8, 4, 16, 32};
  EXPECT_THROW(growth_diagnostic(pochhammer_pair({1, 2}, {2, 1}, 1), unsorted), Error);
  const std::vector<int> few{8, 16, 32};
  EXPECT_THROW(growth_diagnostic(pochhammer_pair({1, 2}, {2, 1}, 1), few), Error);
}

TEST(Unitary, IdenticalSystems) {
  const auto m = random_moment_system(2, 4, 3, 20);
  const auto r = test_unitary_equivalence(m, m, 1e-8);
  EXPECT_TRUE(r.equivalent);
  ASSERT_TRUE(r.v.has_value());
  EXPECT_LE((*r.v - CMatrix::identity(3)).max_abs(), 1e-10);
}

TEST(Unitary, ScaledSystemHasWitnessAtOrigin) {
  const auto m = random_moment_system(2, 4, 3, 21);
  const auto r = test_unitary_equivalence(m, scaled(m, std::log(2.0)), 1e-8);
  EXPECT_FALSE(r.equivalent);
  ASSERT_TRUE(r.witness_pos.has_value());
  EXPECT_EQ(*r.witness_pos, 0u);
  EXPECT_GT(r.witness_gap, 0.1);
}

TEST(Unitary, RecoversHiddenUnitary) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto m = random_moment_system(2, 4, 3, seed);
    Rng rng(seed + 100);
    const CMatrix v0 = random_unitary(3, rng);
    const auto mt = m.congruent(v0);
    const auto r = test_unitary_equivalence(m, mt, 1e-8, seed);
    ASSERT_TRUE(r.equivalent) << r.reason;
    EXPECT_LE(r.max_residual, 1e-8);
    EXPECT_LE((adjoint_times(*r.v, *r.v) - CMatrix::identity(3)).max_abs(), 1e-10);
    // Unitary equivalence gives a similarity certificate with m1 = m2 = 1.
    const auto s = sandwich_ratio(m, mt, *r.v);
    EXPECT_NEAR(s.log_m1, 0.0, 1e-8);
    EXPECT_NEAR(s.log_m2, 0.0, 1e-8);
  }
}

TEST(Unitary, IndependentSystemsAreNotEquivalent) {
  const auto r = test_unitary_equivalence(random_moment_system(2, 4, 3, 30), random_moment_system(2, 4, 3, 31), 1e-8);
  EXPECT_FALSE(r.equivalent);
  EXPECT_TRUE(r.witness_pos.has_value());
}

TEST(Unitary, CongruenceResidual) {
  const auto m = random_moment_system(2, 3, 2, 32);
  EXPECT_NEAR(congruence_residual(m, m, CMatrix::identity(2)), 0.0, 1e-15);
  EXPECT_NEAR(congruence_residual(m, scaled(m, std::log(3.0)), CMatrix::identity(2)), 2.0, 1e-12);
}
