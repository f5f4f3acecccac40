#include "multishift/kernelgen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "multishift/error.hpp"

namespace multishift {

namespace {

constexpr double kLanczosG = 7.0;
constexpr std::array<double, 9> kLanczosCoeffs = {
    0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7,
};

}  // namespace

double log_gamma(double x) {
  if (!(x > 0.0)) throw Error(ErrorCode::IndexOutOfRange, "log_gamma: argument must be positive");
  if (x < 0.5) return log_gamma(x + 1.0) - std::log(x);
  const double z = x - 1.0;
  double series = kLanczosCoeffs[0];
  for (std::size_t i = 1; i < kLanczosCoeffs.size(); ++i) series += kLanczosCoeffs[i] / (z + static_cast<double>(i));
  const double t = z + kLanczosG + 0.5;
  return 0.5 * std::log(2.0 * std::numbers::pi) + (z + 0.5) * std::log(t) - t + std::log(series);
}

double log_pochhammer(double x, int n) {
  if (!(x > 0.0)) throw Error(ErrorCode::IndexOutOfRange, "log_pochhammer: x must be positive");
  if (n < 0) throw Error(ErrorCode::IndexOutOfRange, "log_pochhammer: n must be non-negative");
  if (n == 0) return 0.0;
  return log_gamma(x + n) - log_gamma(x);
}

double log_factorial(const MultiIndex& a) {
  double s = 0.0;
  for (int k : a.components())
    if (k > 1) s += log_gamma(k + 1.0);
  return s;
}

const char* to_string(KernelProvenance p) {
  switch (p) {
    case KernelProvenance::Pochhammer: return "pochhammer";
    case KernelProvenance::Homogeneous: return "homogeneous";
    case KernelProvenance::Perturbed: return "perturbed";
    case KernelProvenance::Explicit: return "explicit";
  }
  return "explicit";
}

MomentSystem KernelSpec::moments(Exec exec) const {
  std::vector<HermPD> grams(coeffs.size());
  detail::for_each_index(coeffs.size(), exec, [&](std::size_t p) { grams[p] = inverse_pd(coeffs[p]); });
  return MomentSystem(truncation, fiber_dim, std::move(grams));
}

KernelSpec explicit_kernel(std::size_t d, int max_degree, std::vector<HermPD> coeffs) {
  KernelSpec k;
  k.truncation = std::make_shared<const Truncation>(d, max_degree);
  if (coeffs.size() != k.truncation->size())
    throw Error(ErrorCode::DimMismatch, "explicit_kernel: coefficient count does not match the simplex");
  k.fiber_dim = coeffs.front().dim();
  for (const auto& c : coeffs)
    if (c.dim() != k.fiber_dim) throw Error(ErrorCode::DimMismatch, "explicit_kernel: coefficient size");
  k.coeffs = std::move(coeffs);
  return k;
}

KernelSpec pochhammer_kernel(const PochhammerPair& p, std::size_t d, int max_degree) {
  if (!(p.lambda > 0.0) || !(p.mu > 0.0))
    throw Error(ErrorCode::IndexOutOfRange, "pochhammer_kernel: parameters must be strictly positive");
  KernelSpec k;
  k.truncation = std::make_shared<const Truncation>(d, max_degree);
  k.fiber_dim = 2;
  k.provenance = KernelProvenance::Pochhammer;
  k.coeffs.reserve(k.truncation->size());
  for (const MultiIndex& a : k.truncation->indices()) {
    const double lf = log_factorial(a);
    const std::array<double, 2> logs = {log_pochhammer(p.lambda, a.degree()) - lf,
                                        log_pochhammer(p.mu, a.degree()) - lf};
    k.coeffs.push_back(HermPD::from_log_diagonal(logs));
  }
  return k;
}

MomentSystem pochhammer_moments(const PochhammerPair& p, std::size_t d, int max_degree, Exec exec) {
  return pochhammer_kernel(p, d, max_degree).moments(exec);
}

bool pochhammer_ground_truth(const PochhammerPair& p, const PochhammerPair& q) {
  return (p.lambda == q.lambda && p.mu == q.mu) || (p.lambda == q.mu && p.mu == q.lambda);
}

KernelSpec homogeneous_kernel(const std::vector<HermPD>& a_by_degree, std::size_t d) {
  if (a_by_degree.empty()) throw Error(ErrorCode::DimMismatch, "homogeneous_kernel: empty sequence");
  const std::size_t n = a_by_degree.front().dim();
  for (const auto& a : a_by_degree)
    if (a.dim() != n) throw Error(ErrorCode::DimMismatch, "homogeneous_kernel: A_m dimensions differ");
  KernelSpec k;
  k.truncation = std::make_shared<const Truncation>(d, static_cast<int>(a_by_degree.size()) - 1);
  k.fiber_dim = n;
  k.provenance = KernelProvenance::Homogeneous;
  k.coeffs.reserve(k.truncation->size());
  for (const MultiIndex& a : k.truncation->indices()) {
    const int m = a.degree();
    const double log_multinomial = (m > 1 ? log_gamma(m + 1.0) : 0.0) - log_factorial(a);
    k.coeffs.push_back(a_by_degree[static_cast<std::size_t>(m)].scaled_log(log_multinomial));
  }
  return k;
}

Perturbation perturb_kernel(const KernelSpec& k, const std::map<MultiIndex, HermPD>& replacements) {
  Perturbation out;
  out.kernel = k;
  out.kernel.provenance = KernelProvenance::Perturbed;
  out.certificate.c = CMatrix::identity(k.fiber_dim);

  // log c1 = min -log ||C^{-1/2} D C^{-1/2}||, log c2 = max log ||C^{1/2} D^{-1} C^{1/2}||.
  double log_c1 = HUGE_VAL;
  double log_c2 = -HUGE_VAL;
  for (const auto& [a, d] : replacements) {
    if (a.dim() != k.dim()) throw Error(ErrorCode::IndexOutOfRange, "perturb_kernel: index dimension");
    const auto pos = k.truncation->find(a);
    if (!pos) throw Error(ErrorCode::IndexOutOfRange, "perturb_kernel: " + to_string(a) + " outside truncation");
    if (d.dim() != k.fiber_dim) throw Error(ErrorCode::DimMismatch, "perturb_kernel: replacement size");
    const HermPD& c = k.coeffs[*pos];
    const HermPD c_isqrt = inv_sqrt_pd(c);
    const HermPD c_sqrt = sqrt_pd(c);
    const HermPD d_inv = inverse_pd(d);
    const double inner = std::log(spectral_norm(c_isqrt.matrix() * d.matrix() * c_isqrt.matrix())) +
                         2.0 * c_isqrt.logscale() + d.logscale();
    const double outer = std::log(spectral_norm(c_sqrt.matrix() * d_inv.matrix() * c_sqrt.matrix())) +
                         2.0 * c_sqrt.logscale() + d_inv.logscale();
    log_c1 = std::min(log_c1, -inner);
    log_c2 = std::max(log_c2, outer);
    out.kernel.coeffs[*pos] = d;
  }
  if (replacements.empty()) {
    log_c1 = 0.0;
    log_c2 = 0.0;
  }
  out.c1 = std::exp(log_c1);
  out.c2 = std::exp(log_c2);
  out.certificate.log_m1 = std::min(0.0, log_c1);
  out.certificate.log_m2 = std::max(0.0, log_c2);
  return out;
}

double boundedness_estimate(const KernelSpec& k, std::size_t j) {
  if (j >= k.dim()) throw Error(ErrorCode::IndexOutOfRange, "boundedness_estimate: direction out of range");
  const Truncation& t = *k.truncation;
  double best = -HUGE_VAL;  // log of the squared estimate
  for (std::size_t p = 0; p < t.size(); ++p) {
    const std::ptrdiff_t down = t.down(p, j);
    if (down < 0) continue;  // convention C_{a - e_j} = 0
    const HermPD isq = inv_sqrt_pd(k.coeffs[p]);
    const HermPD& prev = k.coeffs[static_cast<std::size_t>(down)];
    const double v = std::log(spectral_norm(isq.matrix() * prev.matrix() * isq.matrix())) +
                     2.0 * isq.logscale() + prev.logscale();
    best = std::max(best, v);
  }
  if (best == -HUGE_VAL) return 0.0;
  return std::exp(0.5 * best);
}

}  // namespace multishift
