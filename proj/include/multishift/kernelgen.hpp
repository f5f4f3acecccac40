#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "multishift/equivalence.hpp"
#include "multishift/lattice.hpp"
#include "multishift/numerics.hpp"
#include "multishift/shiftcore.hpp"

namespace multishift {

/// log Gamma(x) for x > 0. Lanczos (g = 7, 9 terms) for x >= 0.5 and the
/// recurrence log Gamma(x) = log Gamma(x + 1) - log x below.
double log_gamma(double x);

/// log (x)_n = log Gamma(x + n) - log Gamma(x).
double log_pochhammer(double x, int n);

/// log a! = sum_k log a_k!.
double log_factorial(const MultiIndex& a);

struct PochhammerPair {
  double lambda = 1.0;
  double mu = 1.0;
};

enum class KernelProvenance { Pochhammer, Homogeneous, Perturbed, Explicit };
const char* to_string(KernelProvenance p);

/// Coefficients C_a of a diagonal kernel sum_a C_a z^a conj(w)^a.
struct KernelSpec {
  std::shared_ptr<const Truncation> truncation;
  std::size_t fiber_dim = 0;
  std::vector<HermPD> coeffs;
  KernelProvenance provenance = KernelProvenance::Explicit;

  std::size_t dim() const { return truncation->dim(); }
  int max_degree() const { return truncation->max_degree(); }
  const HermPD& coeff(const MultiIndex& a) const { return coeffs[truncation->position(a)]; }

  /// G_a = C_a^{-1}.
  MomentSystem moments(Exec exec = Exec::Parallel) const;
};

KernelSpec explicit_kernel(std::size_t d, int max_degree, std::vector<HermPD> coeffs);

/// C_a = diag((lambda)_|a|, (mu)_|a|) / a!.
KernelSpec pochhammer_kernel(const PochhammerPair& p, std::size_t d, int max_degree);
MomentSystem pochhammer_moments(const PochhammerPair& p, std::size_t d, int max_degree,
                                Exec exec = Exec::Parallel);

/// Similar iff {lambda, mu} == {lambda~, mu~}.
bool pochhammer_ground_truth(const PochhammerPair& p, const PochhammerPair& q);

/// C_a = (|a|! / a!) A_|a|, for a = 0..A.size()-1 in degree.
KernelSpec homogeneous_kernel(const std::vector<HermPD>& a_by_degree, std::size_t d);

struct Perturbation {
  KernelSpec kernel;
  SimilarityCertificate certificate;  // (I, min{1, c1}, max{1, c2})
  double c1 = 1.0;
  double c2 = 1.0;
};

/// Replaces C_a by D_a for the given indices. Throws IndexOutOfRange for
/// indices outside the truncation and DimMismatch for wrong sizes.
Perturbation perturb_kernel(const KernelSpec& k, const std::map<MultiIndex, HermPD>& replacements);

/// max_a sqrt(||C_a^{-1/2} C_{a-e_j} C_a^{-1/2}||) with C_{a-e_j} = 0 when a_j = 0.
double boundedness_estimate(const KernelSpec& k, std::size_t j);

}  // namespace multishift
