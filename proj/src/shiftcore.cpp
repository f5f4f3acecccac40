#include "multishift/shiftcore.hpp"

#include <algorithm>
#include <cmath>

#include "multishift/error.hpp"

namespace multishift {

// ---------------------------------------------------------------- MomentSystem

MomentSystem::MomentSystem(std::shared_ptr<const Truncation> truncation, std::size_t fiber_dim,
                           std::vector<HermPD> grams)
    : truncation_(std::move(truncation)), fiber_dim_(fiber_dim), grams_(std::move(grams)) {
  if (!truncation_) throw Error(ErrorCode::DimMismatch, "MomentSystem: null truncation");
  if (fiber_dim_ == 0) throw Error(ErrorCode::DimMismatch, "MomentSystem: fiber_dim must be >= 1");
  if (grams_.size() != truncation_->size())
    throw Error(ErrorCode::DimMismatch, "MomentSystem: gram count does not match the simplex");
  for (const auto& g : grams_)
    if (g.dim() != fiber_dim_) throw Error(ErrorCode::DimMismatch, "MomentSystem: gram dimension mismatch");
}

MomentSystem MomentSystem::create(std::size_t d, int max_degree, std::size_t fiber_dim,
                                  std::vector<HermPD> grams) {
  return MomentSystem(std::make_shared<const Truncation>(d, max_degree), fiber_dim, std::move(grams));
}

MomentSystem MomentSystem::restricted(int degree) const {
  if (degree < 0 || degree > max_degree())
    throw Error(ErrorCode::IndexOutOfRange, "MomentSystem::restricted: degree out of range");
  if (degree == max_degree()) return *this;
  const std::size_t count = truncation_->count_up_to(degree);
  std::vector<HermPD> g(grams_.begin(), grams_.begin() + static_cast<std::ptrdiff_t>(count));
  return create(dim(), degree, fiber_dim_, std::move(g));
}

MomentSystem MomentSystem::congruent(const CMatrix& p) const {
  if (p.rows() != fiber_dim_ || !p.square())
    throw Error(ErrorCode::DimMismatch, "MomentSystem::congruent: shape mismatch");
  std::vector<HermPD> g;
  g.reserve(grams_.size());
  for (const auto& x : grams_) g.push_back(x.congruence(p));
  return MomentSystem(truncation_, fiber_dim_, std::move(g));
}

// ---------------------------------------------------------------- WeightSystem

WeightSystem::WeightSystem(std::shared_ptr<const Truncation> truncation, std::size_t fiber_dim,
                           std::vector<CMatrix> weights)
    : truncation_(std::move(truncation)), fiber_dim_(fiber_dim), weights_(std::move(weights)) {
  if (!truncation_) throw Error(ErrorCode::DimMismatch, "WeightSystem: null truncation");
  if (fiber_dim_ == 0) throw Error(ErrorCode::DimMismatch, "WeightSystem: fiber_dim must be >= 1");
  const std::size_t expected = truncation_->count_up_to(truncation_->max_degree() - 1) * dim();
  if (weights_.size() != expected)
    throw Error(ErrorCode::DimMismatch, "WeightSystem: weight count does not match the simplex");
  for (const auto& w : weights_)
    if (w.rows() != fiber_dim_ || w.cols() != fiber_dim_)
      throw Error(ErrorCode::DimMismatch, "WeightSystem: weight dimension mismatch");
}

WeightSystem WeightSystem::create(std::size_t d, int max_degree, std::size_t fiber_dim,
                                  std::vector<CMatrix> weights) {
  return WeightSystem(std::make_shared<const Truncation>(d, max_degree), fiber_dim, std::move(weights));
}

WeightSystem WeightSystem::constant(std::size_t d, int max_degree,
                                    const std::vector<CMatrix>& per_direction) {
  if (per_direction.size() != d) throw Error(ErrorCode::DimMismatch, "WeightSystem::constant: need d weights");
  auto t = std::make_shared<const Truncation>(d, max_degree);
  const std::size_t count = t->count_up_to(max_degree - 1);
  std::vector<CMatrix> w;
  w.reserve(count * d);
  for (std::size_t p = 0; p < count; ++p)
    for (std::size_t j = 0; j < d; ++j) w.push_back(per_direction[j]);
  return WeightSystem(std::move(t), per_direction.front().rows(), std::move(w));
}

const CMatrix& WeightSystem::weight(const MultiIndex& a, std::size_t j) const {
  if (a.degree() >= max_degree())
    throw Error(ErrorCode::IndexOutOfRange, "WeightSystem: no weight stored at " + to_string(a));
  return weight(truncation_->position(a), j);
}

// ---------------------------------------------------------------- validation

ValidationReport validate_weights(const WeightSystem& w, Exec exec) {
  const Truncation& t = w.truncation();
  const std::size_t d = w.dim();
  const std::size_t stored = w.stored_positions();

  struct Local {
    double residual = 0.0;
    double min_ratio = 1.0;
    double max_norm = 0.0;
  };
  std::vector<Local> local(stored);

  detail::for_each_index(stored, exec, [&](std::size_t p) {
    Local& out = local[p];
    for (std::size_t j = 0; j < d; ++j) {
      const auto sv = singular_values(w.weight(p, j));
      out.max_norm = std::max(out.max_norm, sv.back());
      const double ratio = sv.back() > 0.0 ? sv.front() / sv.back() : 0.0;
      out.min_ratio = std::min(out.min_ratio, ratio);
    }
    // A^{(i)}_{a+e_j} A^{(j)}_a = A^{(j)}_{a+e_i} A^{(i)}_a needs |a| <= N-2.
    if (t[p].degree() + 2 > w.max_degree()) return;
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = i + 1; j < d; ++j) {
        const auto pj = static_cast<std::size_t>(t.up(p, j));
        const auto pi = static_cast<std::size_t>(t.up(p, i));
        const CMatrix lhs = w.weight(pj, i) * w.weight(p, j);
        const CMatrix rhs = w.weight(pi, j) * w.weight(p, i);
        const double scale = std::max(lhs.frobenius_norm(), rhs.frobenius_norm());
        const double r = scale > 0.0 ? (lhs - rhs).frobenius_norm() / scale : 0.0;
        out.residual = std::max(out.residual, r);
      }
  });

  ValidationReport report;
  std::size_t worst = 0;
  bool any_bad_commutation = false;
  for (std::size_t p = 0; p < stored; ++p) {
    if (local[p].residual > report.max_commutation_residual) {
      report.max_commutation_residual = local[p].residual;
      worst = p;
      any_bad_commutation = true;
    }
    report.min_singular_ratio = std::min(report.min_singular_ratio, local[p].min_ratio);
    report.max_norm = std::max(report.max_norm, local[p].max_norm);
  }
  const bool commute_ok = report.max_commutation_residual <= kCommutationTol;
  const bool invertible_ok = report.min_singular_ratio > kInvertibilityTol;
  report.passed = commute_ok && invertible_ok;
  if (any_bad_commutation) report.worst_index = t[worst];
  if (!commute_ok) {
    report.message = "commutation condition fails at " + to_string(t[worst]);
  } else if (!invertible_ok) {
    report.message = "a weight is not invertible";
  }
  return report;
}

// ---------------------------------------------------------------- moments

ScaledMatrix path_product(const WeightSystem& w, const std::vector<PathStep>& path) {
  ScaledMatrix out{CMatrix::identity(w.fiber_dim()), 0.0};
  for (const PathStep& step : path) {
    out.matrix = w.weight(step.from, step.direction) * out.matrix;
    const double norm = out.matrix.frobenius_norm();
    if (!(norm > 0.0) || !std::isfinite(norm))
      throw Error(ErrorCode::ValidationFailed, "path_product: degenerate weight product");
    out.matrix *= Complex(1.0 / norm);
    out.logscale += std::log(norm);
  }
  return out;
}

MomentSystem moments_from_weights(const WeightSystem& w, const HermPD& g0, Exec exec) {
  if (g0.dim() != w.fiber_dim()) throw Error(ErrorCode::DimMismatch, "moments_from_weights: G0 dimension");
  const ValidationReport report = validate_weights(w, exec);
  if (!report.passed) throw Error(ErrorCode::ValidationFailed, report.message);

  const Truncation& t = w.truncation();
  std::vector<HermPD> grams(t.size());
  detail::for_each_index(t.size(), exec, [&](std::size_t p) {
    const ScaledMatrix prod = path_product(w, monotone_path(t[p]));
    grams[p] = HermPD::from_matrix(congruence(g0.matrix(), prod.matrix),
                                   g0.logscale() + 2.0 * prod.logscale);
  });
  return MomentSystem(w.truncation_ptr(), w.fiber_dim(), std::move(grams));
}

GramRoots gram_roots(const MomentSystem& m, Exec exec) {
  GramRoots r;
  r.sqrt.resize(m.size());
  r.inv_sqrt.resize(m.size());
  detail::for_each_index(m.size(), exec, [&](std::size_t p) {
    r.sqrt[p] = sqrt_pd(m.gram(p));
    r.inv_sqrt[p] = inv_sqrt_pd(m.gram(p));
  });
  return r;
}

namespace {

// G_{up}^{1/2} G_{p}^{-1/2} as a plain matrix.
CMatrix orthonormal_weight(const GramRoots& roots, std::size_t p, std::size_t up) {
  const double scale = std::exp(roots.sqrt[up].logscale() + roots.inv_sqrt[p].logscale());
  return (roots.sqrt[up].matrix() * roots.inv_sqrt[p].matrix()) * Complex(scale);
}

}  // namespace

WeightSystem canonical_weights(const MomentSystem& m, Exec exec) {
  const GramRoots roots = gram_roots(m, exec);
  const Truncation& t = m.truncation();
  const std::size_t d = m.dim();
  const std::size_t stored = t.count_up_to(m.max_degree() - 1);
  std::vector<CMatrix> w(stored * d);
  detail::for_each_index(stored, exec, [&](std::size_t p) {
    for (std::size_t j = 0; j < d; ++j)
      w[p * d + j] = orthonormal_weight(roots, p, static_cast<std::size_t>(t.up(p, j)));
  });
  return WeightSystem(m.truncation_ptr(), m.fiber_dim(), std::move(w));
}

// ---------------------------------------------------------------- M_z blocks

CMatrix TruncatedMz::dense() const {
  const std::size_t n = fiber_dim;
  CMatrix out(total_dim(), total_dim());
  for (std::size_t p = 0; p < blocks.size(); ++p) {
    if (!blocks[p]) continue;
    const auto up = static_cast<std::size_t>(truncation->up(p, direction));
    out.set_block(up * n, p * n, *blocks[p]);
  }
  return out;
}

TruncatedMz build_mz(const MomentSystem& m, std::size_t j, Exec exec) {
  return build_mz(m, gram_roots(m, exec), j, exec);
}

TruncatedMz build_mz(const MomentSystem& m, const GramRoots& roots, std::size_t j, Exec exec) {
  if (j >= m.dim()) throw Error(ErrorCode::IndexOutOfRange, "build_mz: direction out of range");
  const Truncation& t = m.truncation();
  TruncatedMz mz;
  mz.direction = j;
  mz.truncation = m.truncation_ptr();
  mz.fiber_dim = m.fiber_dim();
  mz.blocks.resize(t.size());
  std::vector<double> norms(t.size(), 0.0);
  std::vector<double> mins(t.size(), HUGE_VAL);
  detail::for_each_index(t.size(), exec, [&](std::size_t p) {
    const std::ptrdiff_t up = t.up(p, j);
    if (up < 0) return;
    CMatrix b = orthonormal_weight(roots, p, static_cast<std::size_t>(up));
    const auto sv = singular_values(b);
    norms[p] = sv.back();
    mins[p] = sv.front();
    mz.blocks[p] = std::move(b);
  });
  mz.norm_estimate = 0.0;
  mz.min_singular_value = HUGE_VAL;
  for (std::size_t p = 0; p < t.size(); ++p) {
    mz.norm_estimate = std::max(mz.norm_estimate, norms[p]);
    mz.min_singular_value = std::min(mz.min_singular_value, mins[p]);
  }
  if (mz.min_singular_value == HUGE_VAL) mz.min_singular_value = 0.0;  // N = 0: no blocks
  return mz;
}

double check_adjoint_formula(const MomentSystem& m, std::size_t j, Exec exec) {
  const GramRoots roots = gram_roots(m, exec);
  const TruncatedMz mz = build_mz(m, roots, j, exec);
  const Truncation& t = m.truncation();
  std::vector<double> residual(t.size(), 0.0);
  detail::for_each_index(t.size(), exec, [&](std::size_t p) {
    const std::ptrdiff_t up = t.up(p, j);
    if (up < 0) return;
    const auto b = static_cast<std::size_t>(up);
    // Adjoint as the literal conjugate transpose.
    const CMatrix adj = mz.blocks[p]->adjoint();
    // Closed form x z^b -> G_p^{-1} G_b x z^p, moved into orthonormal
    // coordinates: G_p^{1/2} (G_p^{-1} G_b) G_b^{-1/2}.
    const HermPD& gp = m.gram(p);
    const HermPD& gb = m.gram(b);
    const CMatrix raw = solve(gp.matrix(), gb.matrix());
    const double scale = std::exp(gb.logscale() - gp.logscale() + roots.sqrt[p].logscale() +
                                  roots.inv_sqrt[b].logscale());
    const CMatrix formula = (roots.sqrt[p].matrix() * raw * roots.inv_sqrt[b].matrix()) * Complex(scale);
    const double norm = std::max(adj.frobenius_norm(), formula.frobenius_norm());
    residual[p] = norm > 0.0 ? (adj - formula).frobenius_norm() / norm : 0.0;
  });
  return *std::max_element(residual.begin(), residual.end());
}

}  // namespace multishift
