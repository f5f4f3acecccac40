#pragma once

#include <cstdint>
#include <random>

#include "multishift/numerics.hpp"
#include "multishift/shiftcore.hpp"

namespace multishift {

/// Seeded generator with platform-independent uniform and normal draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform();  // [0, 1)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();   // Box-Muller
  Complex complex_normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

CMatrix random_gaussian(std::size_t rows, std::size_t cols, Rng& rng);
/// Haar-distributed unitary (polar factor of a Ginibre matrix).
CMatrix random_unitary(std::size_t n, Rng& rng);
/// Q diag(exp(u)) Q^* with u uniform in [-spread, spread].
HermPD random_pd(std::size_t n, Rng& rng, double spread = 1.0);

/// Independent random PD grams with a random per-degree log growth.
MomentSystem random_moment_system(std::size_t d, int max_degree, std::size_t n, std::uint64_t seed);

}  // namespace multishift
