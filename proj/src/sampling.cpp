#include "multishift/sampling.hpp"

#include <cmath>
#include <numbers>

namespace multishift {

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double phi = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(phi);
  has_spare_ = true;
  return r * std::cos(phi);
}

Complex Rng::complex_normal() {
  const double re = normal();
  const double im = normal();
  return {re * std::numbers::sqrt2 / 2.0, im * std::numbers::sqrt2 / 2.0};
}

CMatrix random_gaussian(std::size_t rows, std::size_t cols, Rng& rng) {
  CMatrix m(rows, cols);
  for (auto& z : m.entries()) z = rng.complex_normal();
  return m;
}

CMatrix random_unitary(std::size_t n, Rng& rng) {
  for (;;) {
    const CMatrix g = random_gaussian(n, n, rng);
    const auto sv = singular_values(g);
    if (sv.front() > 1e-6 * sv.back()) return polar_unitary(g);
  }
}

HermPD random_pd(std::size_t n, Rng& rng, double spread) {
  const CMatrix q = random_unitary(n, rng);
  std::vector<double> d(n);
  for (auto& x : d) x = std::exp(rng.uniform(-spread, spread));
  return HermPD::from_matrix(q * CMatrix::diagonal(std::span<const double>(d)) * q.adjoint());
}

MomentSystem random_moment_system(std::size_t d, int max_degree, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  auto t = std::make_shared<const Truncation>(d, max_degree);
  const double growth = rng.uniform(-1.0, 1.0);
  std::vector<HermPD> grams;
  grams.reserve(t->size());
  for (const MultiIndex& a : t->indices())
    grams.push_back(random_pd(n, rng).scaled_log(growth * a.degree()));
  return MomentSystem(std::move(t), n, std::move(grams));
}

}  // namespace multishift
