#include <gtest/gtest.h>

#include <cmath>

#include "multishift/error.hpp"
#include "multishift/intertwiner.hpp"
#include "multishift/kernelgen.hpp"
#include "multishift/sampling.hpp"

using namespace multishift;

namespace {

MomentSystem scalar_moments(int max_degree, double log_growth) {
  std::vector<HermPD> grams;
  for (int k = 0; k <= max_degree; ++k) {
    const double ld[] = {log_growth * k};
    grams.push_back(HermPD::from_log_diagonal(ld));
  }
  return MomentSystem::create(1, max_degree, 1, std::move(grams));
}

// Entries of X in the span, as a row-major list over the full 2x2 matrix.
CMatrix span_of(const IntertwinerBasis& basis) {
  CMatrix out(4, basis.dimension());
  std::size_t col = 0;
  for (const auto& comp : basis.components()) {
    for (std::size_t k = 0; k < comp.basis.cols(); ++k, ++col)
      for (std::size_t r = 0; r < comp.unknowns.size(); ++r) out(comp.unknowns[r], col) = comp.basis(r, k);
  }
  return out;
}

CMatrix two_by_two(Complex a, Complex b, Complex c, Complex d) { return CMatrix(2, 2, {a, b, c, d}); }

}  // namespace

TEST(DiagonalIntertwiner, IdenticalSystemsGiveIdentity) {
  const auto m = random_moment_system(2, 3, 2, 1);
  const auto x = diagonal_intertwiner(m, m, CMatrix::identity(2));
  EXPECT_LE((x.x - CMatrix::identity(x.x.rows())).max_abs(), 1e-12);
  EXPECT_LE(intertwining_residual(x, m, m), 1e-14);
}

TEST(DiagonalIntertwiner, SwapBlocksAreUnitary) {
  const auto m = pochhammer_moments({1, 2}, 2, 10);
  const auto mt = pochhammer_moments({2, 1}, 2, 10);
  const auto x = diagonal_intertwiner(m, mt, CMatrix(2, 2, {0.0, 1.0, 1.0, 0.0}));
  const auto [lo, hi] = block_singular_range(x);
  EXPECT_NEAR(lo, 1.0, 1e-12);
  EXPECT_NEAR(hi, 1.0, 1e-12);
  EXPECT_LE(intertwining_residual(x, m, mt), 1e-12);
}

TEST(DiagonalIntertwiner, GeometricBlocksBlowUp) {
  const auto m = scalar_moments(10, 0.0);
  const auto mt = scalar_moments(10, std::log(4.0));
  const auto x = diagonal_intertwiner(m, mt, CMatrix::identity(1));
  for (int k = 0; k <= 10; ++k) EXPECT_NEAR(x.x(k, k).real(), std::pow(2.0, k), 1e-12 * std::pow(2.0, k));
  EXPECT_LE(intertwining_residual(x, m, mt), 1e-13);
  const auto [lo, hi] = block_singular_range(x);
  EXPECT_NEAR(hi / lo, 1024.0, 1e-9);
}

TEST(DiagonalIntertwiner, SingularCThrows) {
  const auto m = random_moment_system(1, 2, 2, 2);
  try {
    diagonal_intertwiner(m, m, CMatrix(2, 2, {1.0, 2.0, 2.0, 4.0}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingularC);
  }
}

TEST(BruteForce, UnweightedShiftCommutant) {
  const auto m = scalar_moments(1, 0.0);
  const auto basis = brute_force_intertwiner(m, m);
  EXPECT_EQ(basis.dimension(), 2u);
  // Span is {[[a,0],[b,a]]}: x01 = 0 and x00 = x11.
  const CMatrix span = span_of(basis);
  EXPECT_LE(basis.membership_residual(two_by_two(1.0, 0.0, 0.0, 1.0)), 1e-14);
  EXPECT_LE(basis.membership_residual(two_by_two(0.0, 0.0, 1.0, 0.0)), 1e-14);
  EXPECT_NEAR(basis.membership_residual(two_by_two(1.0, 0.0, 0.0, 0.0)), std::sqrt(0.5), 1e-14);
  EXPECT_NEAR(basis.membership_residual(two_by_two(0.0, 1.0, 0.0, 0.0)), 1.0, 1e-14);
  for (std::size_t k = 0; k < span.cols(); ++k) EXPECT_EQ(std::abs(span(1, k)), 0.0);
}

TEST(BruteForce, WeightedShiftForcesScaledDiagonal) {
  // Weights 1 and 2: G_1 = 1 against G~_1 = 4.
  const auto m = scalar_moments(1, 0.0);
  const auto mt = scalar_moments(1, std::log(4.0));
  const auto basis = brute_force_intertwiner(m, mt);
  EXPECT_EQ(basis.dimension(), 2u);
  EXPECT_LE(basis.membership_residual(two_by_two(1.0, 0.0, 0.0, 2.0)), 1e-14);
  EXPECT_LE(basis.membership_residual(two_by_two(0.0, 0.0, 1.0, 0.0)), 1e-14);
  EXPECT_GT(basis.membership_residual(two_by_two(1.0, 0.0, 0.0, 1.0)), 0.1);
}

TEST(BruteForce, DimensionIsFiberSquaredTimesSize) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto m = random_moment_system(2, 3, 2, seed);
    const auto mt = random_moment_system(2, 3, 2, seed + 50);
    const auto basis = brute_force_intertwiner(m, mt);
    EXPECT_EQ(basis.dimension(), 4u * m.size());
    EXPECT_EQ(basis.total_dim(), 20u);
  }
}

TEST(BruteForce, SamplesIntertwine) {
  const auto m = random_moment_system(2, 3, 2, 3);
  const auto mt = random_moment_system(2, 3, 2, 4);
  const auto basis = brute_force_intertwiner(m, mt);
  const auto x = basis.sample(5);
  EXPECT_LE(intertwining_residual(x, m, mt), 1e-12);
  EXPECT_LE(basis.membership_residual(x.x), 1e-12);
  const auto again = basis.sample(5);
  EXPECT_TRUE(std::equal(x.x.entries().begin(), x.x.entries().end(), again.x.entries().begin()));
}

TEST(BruteForce, UnitaryCongruenceLiesInSpan) {
  const auto m = random_moment_system(2, 3, 2, 6);
  Rng rng(7);
  const CMatrix v0 = random_unitary(2, rng);
  const auto mt = m.congruent(v0);
  const auto r = test_unitary_equivalence(m, mt, 1e-8);
  ASSERT_TRUE(r.equivalent);
  const auto x = diagonal_intertwiner(m, mt, *r.v);
  EXPECT_LE(brute_force_intertwiner(m, mt).membership_residual(x.x), 1e-9);
}

TEST(BruteForce, DimensionCap) {
  const auto m = random_moment_system(2, 20, 3, 8);
  try {
    brute_force_intertwiner(m, m);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionCap);
  }
}

TEST(Structure, SampledIntertwinersFollowRecursion) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto m = random_moment_system(2, 3, 2, seed + 10);
    const auto mt = random_moment_system(2, 3, 2, seed + 20);
    const auto x = brute_force_intertwiner(m, mt).sample(seed);
    const auto s = check_intertwiner_structure(m, mt, x, 1e-8);
    EXPECT_LE(s.level0_residual, 1e-9);
    EXPECT_LE(s.recursion_residual, 1e-9);
    EXPECT_NEAR(s.certificate.log_m2, 2 * std::log(s.norm), 1e-12);
    EXPECT_NEAR(s.certificate.log_m1, -2 * std::log(s.inverse_norm), 1e-12);
    EXPECT_TRUE(s.verification.passed);
  }
}

TEST(Structure, DiagonalIntertwinerOfSwap) {
  const auto m = pochhammer_moments({1, 2}, 2, 3);
  const auto mt = pochhammer_moments({2, 1}, 2, 3);
  const auto x = diagonal_intertwiner(m, mt, CMatrix(2, 2, {0.0, 1.0, 1.0, 0.0}));
  const auto s = check_intertwiner_structure(m, mt, x, 1e-10);
  EXPECT_NEAR(s.norm, 1.0, 1e-12);
  EXPECT_NEAR(s.inverse_norm, 1.0, 1e-12);
  EXPECT_TRUE(s.verification.passed);
}
