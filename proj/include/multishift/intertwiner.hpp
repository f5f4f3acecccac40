#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "multishift/equivalence.hpp"
#include "multishift/shiftcore.hpp"

namespace multishift {

/// Operator X between two truncated spaces, in orthonormal coordinates,
/// blocked by levels of the graded order.
struct IntertwinerMatrix {
  std::shared_ptr<const Truncation> truncation;
  std::size_t fiber_dim = 0;
  CMatrix x;

  CMatrix block(std::size_t row_pos, std::size_t col_pos) const {
    return x.block(row_pos * fiber_dim, col_pos * fiber_dim, fiber_dim, fiber_dim);
  }
};

/// Block diagonal X with level blocks G~_a^{1/2} C^{-1} G_a^{-1/2}.
IntertwinerMatrix diagonal_intertwiner(const MomentSystem& m, const MomentSystem& m_tilde, const CMatrix& c,
                                       Exec exec = Exec::Parallel);

/// max_j ||X M_j - M~_j X|| over interior columns, relative to
/// ||X|| * max_j ||M_j||. Frobenius norms.
double intertwining_residual(const IntertwinerMatrix& x, const MomentSystem& m, const MomentSystem& m_tilde);

/// {smallest, largest} singular value over the diagonal level blocks.
std::pair<double, double> block_singular_range(const IntertwinerMatrix& x);

constexpr std::size_t kOracleDimensionCap = 512;

/// Null space of X M_j - M~_j X = 0 (all j, interior columns only), solved
/// as a plain sparse linear system split into independent components.
class IntertwinerBasis {
 public:
  struct Component {
    std::vector<std::size_t> unknowns;  // row-major entry indices of X
    CMatrix basis;                      // unknowns.size() x nullity, orthonormal columns
  };

  IntertwinerBasis(std::shared_ptr<const Truncation> truncation, std::size_t fiber_dim,
                   std::vector<Component> components);

  std::size_t total_dim() const noexcept { return fiber_dim_ * truncation_->size(); }
  std::size_t dimension() const noexcept { return dimension_; }
  const std::vector<Component>& components() const noexcept { return components_; }

  /// Random element with seeded complex Gaussian coefficients.
  IntertwinerMatrix sample(std::uint64_t seed) const;
  /// ||x - P x|| / ||x|| with P the orthogonal projector onto the span.
  double membership_residual(const CMatrix& x) const;

 private:
  std::shared_ptr<const Truncation> truncation_;
  std::size_t fiber_dim_;
  std::vector<Component> components_;
  std::size_t dimension_ = 0;
};

/// Throws DimensionCap above kOracleDimensionCap.
IntertwinerBasis brute_force_intertwiner(const MomentSystem& m, const MomentSystem& m_tilde);

/// Structural facts of an invertible intertwiner: the level-0 row vanishes
/// off the diagonal, the diagonal blocks follow the path recursion, and the
/// level-0 block of X^{-1} yields a certificate with m1 = 1/||X^{-1}||^2 and
/// m2 = ||X||^2.
struct IntertwinerStructure {
  double level0_residual = 0.0;
  double recursion_residual = 0.0;
  double norm = 0.0;
  double inverse_norm = 0.0;
  SimilarityCertificate certificate;
  VerificationReport verification;
};

IntertwinerStructure check_intertwiner_structure(const MomentSystem& m, const MomentSystem& m_tilde,
                                                 const IntertwinerMatrix& x, double tol);

}  // namespace multishift
