#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "multishift/lattice.hpp"
#include "multishift/numerics.hpp"
#include "multishift/parallel.hpp"

namespace multishift {

/// Gram data G_a = B_a^* B_a on the simplex |a| <= N, one HermPD per index
/// in graded order.
class MomentSystem {
 public:
  MomentSystem(std::shared_ptr<const Truncation> truncation, std::size_t fiber_dim,
               std::vector<HermPD> grams);
  static MomentSystem create(std::size_t d, int max_degree, std::size_t fiber_dim,
                             std::vector<HermPD> grams);

  std::size_t dim() const noexcept { return truncation_->dim(); }
  int max_degree() const noexcept { return truncation_->max_degree(); }
  std::size_t fiber_dim() const noexcept { return fiber_dim_; }
  std::size_t size() const noexcept { return grams_.size(); }

  const Truncation& truncation() const noexcept { return *truncation_; }
  const std::shared_ptr<const Truncation>& truncation_ptr() const noexcept { return truncation_; }

  const HermPD& gram(std::size_t pos) const { return grams_[pos]; }
  const HermPD& gram(const MultiIndex& a) const { return grams_[truncation_->position(a)]; }
  const std::vector<HermPD>& grams() const noexcept { return grams_; }

  /// The same system on the smaller simplex |a| <= degree.
  MomentSystem restricted(int degree) const;
  /// G_a -> P^* G_a P for every a.
  MomentSystem congruent(const CMatrix& p) const;

  friend bool operator==(const MomentSystem& a, const MomentSystem& b) {
    return a.fiber_dim_ == b.fiber_dim_ && a.dim() == b.dim() &&
           a.max_degree() == b.max_degree() && a.grams_ == b.grams_;
  }

 private:
  std::shared_ptr<const Truncation> truncation_;
  std::size_t fiber_dim_;
  std::vector<HermPD> grams_;
};

/// Operator weights A^{(j)}_a for |a| <= N-1 and every direction j.
class WeightSystem {
 public:
  /// `weights[pos * d + j]` for each position pos of degree <= N-1.
  WeightSystem(std::shared_ptr<const Truncation> truncation, std::size_t fiber_dim,
               std::vector<CMatrix> weights);
  static WeightSystem create(std::size_t d, int max_degree, std::size_t fiber_dim,
                             std::vector<CMatrix> weights);
  /// Weights constant in the index: A^{(j)}_a = per_direction[j].
  static WeightSystem constant(std::size_t d, int max_degree, const std::vector<CMatrix>& per_direction);

  std::size_t dim() const noexcept { return truncation_->dim(); }
  int max_degree() const noexcept { return truncation_->max_degree(); }
  std::size_t fiber_dim() const noexcept { return fiber_dim_; }
  const Truncation& truncation() const noexcept { return *truncation_; }
  const std::shared_ptr<const Truncation>& truncation_ptr() const noexcept { return truncation_; }
  std::size_t stored_positions() const noexcept { return weights_.size() / dim(); }

  const CMatrix& weight(std::size_t pos, std::size_t j) const { return weights_[pos * dim() + j]; }
  const CMatrix& weight(const MultiIndex& a, std::size_t j) const;
  CMatrix& weight(std::size_t pos, std::size_t j) { return weights_[pos * dim() + j]; }

 private:
  std::shared_ptr<const Truncation> truncation_;
  std::size_t fiber_dim_;
  std::vector<CMatrix> weights_;
};

struct ValidationReport {
  bool passed = true;
  double max_commutation_residual = 0.0;
  double min_singular_ratio = 1.0;  // smallest sigma_min / sigma_max over weights
  double max_norm = 0.0;            // sup of spectral norms over stored weights
  std::optional<MultiIndex> worst_index;
  std::string message;
};

constexpr double kCommutationTol = 1e-10;
constexpr double kInvertibilityTol = 1e-12;

ValidationReport validate_weights(const WeightSystem& w, Exec exec = Exec::Parallel);

/// Product of the weights along `path` (last step leftmost), with the scale
/// factored out: value = exp(logscale) * matrix.
struct ScaledMatrix {
  CMatrix matrix;
  double logscale = 0.0;
  CMatrix value() const { return matrix * Complex(std::exp(logscale)); }
};
ScaledMatrix path_product(const WeightSystem& w, const std::vector<PathStep>& path);

/// G_a = P_a^* G0 P_a with P_a the canonical path product. Throws
/// ValidationFailed when the weights fail validate_weights.
MomentSystem moments_from_weights(const WeightSystem& w, const HermPD& g0, Exec exec = Exec::Parallel);

/// A^{(j)}_a = G_{a+e_j}^{1/2} G_a^{-1/2}.
WeightSystem canonical_weights(const MomentSystem& m, Exec exec = Exec::Parallel);

/// Block form of M_{z_j} on the truncation in orthonormal coordinates.
struct TruncatedMz {
  std::size_t direction = 0;
  std::shared_ptr<const Truncation> truncation;
  std::size_t fiber_dim = 0;
  /// blocks[pos] maps level pos to level pos + e_j; empty at the top degree.
  std::vector<std::optional<CMatrix>> blocks;
  double norm_estimate = 0.0;
  /// Smallest singular value over all present blocks.
  double min_singular_value = 0.0;

  std::size_t total_dim() const { return fiber_dim * truncation->size(); }
  CMatrix dense() const;
};

/// Square roots and inverse square roots of every G_a, shared by the
/// orthonormal-coordinate builders.
struct GramRoots {
  std::vector<HermPD> sqrt;
  std::vector<HermPD> inv_sqrt;
};
GramRoots gram_roots(const MomentSystem& m, Exec exec = Exec::Parallel);

TruncatedMz build_mz(const MomentSystem& m, std::size_t j, Exec exec = Exec::Parallel);
TruncatedMz build_mz(const MomentSystem& m, const GramRoots& roots, std::size_t j,
                     Exec exec = Exec::Parallel);

/// Largest relative block residual between the conjugate transpose of
/// build_mz and the closed-form adjoint G_{a-e_j}^{-1} G_a.
double check_adjoint_formula(const MomentSystem& m, std::size_t j, Exec exec = Exec::Parallel);

}  // namespace multishift
