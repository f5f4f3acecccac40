#include "multishift/equivalence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "multishift/error.hpp"
#include "multishift/sampling.hpp"

namespace multishift {

namespace {

void require_same_shape(const MomentSystem& m, const MomentSystem& mt, const char* where) {
  if (m.dim() != mt.dim() || m.max_degree() != mt.max_degree() || m.fiber_dim() != mt.fiber_dim())
    throw Error(ErrorCode::DimMismatch, std::string(where) + ": systems have different shapes");
}

void require_invertible(const CMatrix& c, std::size_t n, const char* where) {
  if (c.rows() != n || c.cols() != n) throw Error(ErrorCode::DimMismatch, std::string(where) + ": C shape");
  if (!c.all_finite()) throw Error(ErrorCode::SingularC, std::string(where) + ": C is not finite");
  const auto sv = singular_values(c);
  if (!(sv.front() > 1e-14 * sv.back())) throw Error(ErrorCode::SingularC, std::string(where) + ": C is singular");
}

}  // namespace

// ---------------------------------------------------------------- sandwich

SandwichEvaluator::SandwichEvaluator(const MomentSystem& m, const MomentSystem& m_tilde, Exec exec)
    : n_(m.fiber_dim()), exec_(exec) {
  require_same_shape(m, m_tilde, "sandwich");
  const std::size_t count = m.size();
  left_.resize(count);
  right_.resize(count);
  offset_.resize(count);
  detail::for_each_index(count, exec, [&](std::size_t p) {
    left_[p] = cholesky(m.gram(p).matrix()).adjoint();
    right_[p] = inverse(cholesky(m_tilde.gram(p).matrix())).adjoint();
    offset_[p] = m_tilde.gram(p).logscale() - m.gram(p).logscale();
  });
}

SandwichResult SandwichEvaluator::evaluate(const CMatrix& c) const {
  require_invertible(c, n_, "sandwich_ratio");
  const std::size_t count = left_.size();
  std::vector<double> lo(count), hi(count);
  detail::for_each_index(count, exec_, [&](std::size_t p) {
    const CMatrix y = left_[p] * c * right_[p];
    const std::vector<double> s2 = herm_eigenvalues(adjoint_times(y, y));
    if (!(s2.front() > 0.0)) throw Error(ErrorCode::SingularC, "sandwich_ratio: C^* G C is singular");
    lo[p] = offset_[p] - std::log(s2.back());
    hi[p] = offset_[p] - std::log(s2.front());
  });
  SandwichResult r;
  r.argmin = static_cast<std::size_t>(std::min_element(lo.begin(), lo.end()) - lo.begin());
  r.argmax = static_cast<std::size_t>(std::max_element(hi.begin(), hi.end()) - hi.begin());
  r.log_m1 = lo[r.argmin];
  r.log_m2 = hi[r.argmax];
  r.log_ratio = r.log_m2 - r.log_m1;
  return r;
}

double SandwichEvaluator::log_ratio(const CMatrix& c) const {
  try {
    return evaluate(c).log_ratio;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::SingularC || e.code() == ErrorCode::NoConvergence ||
        e.code() == ErrorCode::NonHermitian)
      return std::numeric_limits<double>::infinity();
    throw;
  }
}

SandwichResult sandwich_ratio(const MomentSystem& m, const MomentSystem& m_tilde, const CMatrix& c, Exec exec) {
  require_invertible(c, m.fiber_dim(), "sandwich_ratio");
  return SandwichEvaluator(m, m_tilde, exec).evaluate(c);
}

// ---------------------------------------------------------------- verification

VerificationReport verify_certificate(const MomentSystem& m, const MomentSystem& m_tilde,
                                      const SimilarityCertificate& cert, double tol, Exec exec) {
  require_same_shape(m, m_tilde, "verify_certificate");
  if (cert.c.rows() != m.fiber_dim() || cert.c.cols() != m.fiber_dim())
    throw Error(ErrorCode::DimMismatch, "verify_certificate: C shape");
  const std::size_t count = m.size();
  VerificationReport r;
  r.tolerance = tol;
  r.lower_margins.assign(count, 0.0);
  r.upper_margins.assign(count, 0.0);
  detail::for_each_index(count, exec, [&](std::size_t p) {
    // Everything relative to exp(logscale(G~_a)).
    const HermPD& gt = m_tilde.gram(p);
    const HermPD& g = m.gram(p);
    const CMatrix& target = gt.matrix();
    const CMatrix k = congruence(g.matrix(), cert.c);
    const double rel = g.logscale() - gt.logscale();
    const double target_norm = herm_eigenvalues(target).back();
    const double k_norm = herm_eigenvalues(k).back();

    const double s1 = std::exp(cert.log_m1 + rel);
    const double scale1 = std::max(target_norm, s1 * k_norm);
    r.lower_margins[p] = herm_eigenvalues(target - k * Complex(s1)).front() / scale1;

    const double s2 = std::exp(cert.log_m2 + rel);
    const double scale2 = std::max(target_norm, s2 * k_norm);
    r.upper_margins[p] = herm_eigenvalues(k * Complex(s2) - target).front() / scale2;
  });
  r.worst_lower_pos = static_cast<std::size_t>(
      std::min_element(r.lower_margins.begin(), r.lower_margins.end()) - r.lower_margins.begin());
  r.worst_upper_pos = static_cast<std::size_t>(
      std::min_element(r.upper_margins.begin(), r.upper_margins.end()) - r.upper_margins.begin());
  r.worst_lower = r.lower_margins[r.worst_lower_pos];
  r.worst_upper = r.upper_margins[r.worst_upper_pos];
  r.passed = cert.log_m1 <= cert.log_m2 && r.worst_lower >= -tol && r.worst_upper >= -tol;
  return r;
}

// ---------------------------------------------------------------- optimizer

namespace {

using Objective = std::function<double(const CMatrix&)>;
using Retraction = std::function<CMatrix(const CMatrix& x, const CMatrix& direction, double t)>;

constexpr double kConvergedRatio = 1e-13;

// Central-difference descent with backtracking, falling back to a compass
// search along the basis directions when the gradient step fails (kinks of
// the max/min objective).
CMatrix descend(CMatrix x, double& fx, const Objective& f, const std::vector<CMatrix>& basis,
                const Retraction& retract, int iterations, double h) {
  double step = 0.5;
  double pattern = 0.25;
  std::vector<double> history;
  history.push_back(fx);
  std::vector<double> grad(basis.size());
  for (int it = 0; it < iterations; ++it) {
    if (fx <= kConvergedRatio) break;
    double gnorm2 = 0.0;
    for (std::size_t k = 0; k < basis.size(); ++k) {
      const double fp = f(retract(x, basis[k], h));
      const double fm = f(retract(x, basis[k], -h));
      grad[k] = (std::isfinite(fp) && std::isfinite(fm)) ? (fp - fm) / (2.0 * h) : 0.0;
      gnorm2 += grad[k] * grad[k];
    }
    bool improved = false;
    if (gnorm2 > 0.0) {
      const double gnorm = std::sqrt(gnorm2);
      CMatrix direction(x.cols(), x.cols());
      for (std::size_t k = 0; k < basis.size(); ++k) direction += basis[k] * Complex(-grad[k] / gnorm);
      for (double t = std::min(2.0 * step, 1.0); t > 1e-10; t *= 0.5) {
        CMatrix y = retract(x, direction, t);
        const double fy = f(y);
        if (fy < fx) {
          x = std::move(y);
          fx = fy;
          step = t;
          improved = true;
          break;
        }
      }
    }
    if (!improved) {
      while (!improved && pattern > 1e-12) {
        for (std::size_t k = 0; k < basis.size() && !improved; ++k)
          for (double sign : {1.0, -1.0}) {
            CMatrix y = retract(x, basis[k], sign * pattern);
            const double fy = f(y);
            if (fy < fx) {
              x = std::move(y);
              fx = fy;
              improved = true;
              break;
            }
          }
        if (!improved) pattern *= 0.5;
      }
      if (!improved) break;
    }
    history.push_back(fx);
    const std::size_t window = 20;
    if (history.size() > window && history[history.size() - 1 - window] - fx < 1e-12) break;
  }
  return x;
}

std::vector<CMatrix> hermitian_basis(std::size_t n) {
  std::vector<CMatrix> basis;
  for (std::size_t i = 0; i < n; ++i) {
    CMatrix e(n, n);
    e(i, i) = 1.0;
    basis.push_back(std::move(e));
  }
  const double r = 1.0 / std::sqrt(2.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      CMatrix sym(n, n), anti(n, n);
      sym(i, j) = r;
      sym(j, i) = r;
      anti(i, j) = Complex(0.0, r);
      anti(j, i) = Complex(0.0, -r);
      basis.push_back(std::move(sym));
      basis.push_back(std::move(anti));
    }
  return basis;
}

std::vector<CMatrix> general_basis(std::size_t n) {
  std::vector<CMatrix> basis;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      CMatrix re(n, n), im(n, n);
      re(i, j) = 1.0;
      im(i, j) = Complex(0.0, 1.0);
      basis.push_back(std::move(re));
      basis.push_back(std::move(im));
    }
  return basis;
}

}  // namespace

SimilarityCertificate optimize_C(const MomentSystem& m, const MomentSystem& m_tilde, const OptimizeOptions& options) {
  require_same_shape(m, m_tilde, "optimize_C");
  const std::size_t n = m.fiber_dim();
  const SandwichEvaluator evaluator(m, m_tilde, options.exec);

  // Stage (a): C0 = G0^{-1/2} W G~0^{1/2} solves C^* G0 C = G~0 for unitary W.
  const CMatrix left = inv_sqrt_pd(m.gram(0)).value();
  const CMatrix right = sqrt_pd(m_tilde.gram(0)).value();
  const auto to_c = [&](const CMatrix& w) { return left * w * right; };

  // Stage (b): unitary W.
  const Objective f_unitary = [&](const CMatrix& w) { return evaluator.log_ratio(to_c(w)); };
  const Retraction unitary_step = [](const CMatrix& w, const CMatrix& h, double t) {
    CMatrix tangent = CMatrix::identity(w.rows()) + h * Complex(0.0, t);
    return polar_unitary(w * tangent);
  };
  const std::vector<CMatrix> herm = hermitian_basis(n);

  std::vector<CMatrix> starts{CMatrix::identity(n)};
  Rng rng(options.seed);
  for (int r = 0; r < options.restarts; ++r) starts.push_back(random_unitary(n, rng));

  CMatrix best_w;
  double best_f = std::numeric_limits<double>::infinity();
  for (const CMatrix& w0 : starts) {
    double fw = f_unitary(w0);
    CMatrix w = descend(w0, fw, f_unitary, herm, unitary_step, options.iterations, options.fd_step);
    if (fw < best_f) {
      best_f = fw;
      best_w = std::move(w);
    }
    if (best_f <= kConvergedRatio) break;
  }

  // Stage (c): C <- C exp(t H) over all invertible C.
  CMatrix c = to_c(best_w);
  double fc = best_f;
  if (fc > kConvergedRatio) {
    const Objective f_general = [&](const CMatrix& x) { return evaluator.log_ratio(x); };
    const Retraction general_step = [](const CMatrix& x, const CMatrix& h, double t) {
      return x * expm(h * Complex(t));
    };
    c = descend(c, fc, f_general, general_basis(n), general_step, options.iterations, options.fd_step);
  }

  const SandwichResult s = evaluator.evaluate(c);
  SimilarityCertificate cert;
  cert.c = std::move(c);
  cert.log_m1 = s.log_m1;
  cert.log_m2 = s.log_m2;
  return cert;
}

// ---------------------------------------------------------------- growth

const char* to_string(GrowthVerdict v) {
  switch (v) {
    case GrowthVerdict::SimilarEvidence: return "SIMILAR_EVIDENCE";
    case GrowthVerdict::NotSimilarEvidence: return "NOT_SIMILAR_EVIDENCE";
    case GrowthVerdict::Inconclusive: return "INCONCLUSIVE";
  }
  return "INCONCLUSIVE";
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw Error(ErrorCode::DimMismatch, "fit_line: need >= 2 points");
  const double count = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / count;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / count;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw Error(ErrorCode::DimMismatch, "fit_line: abscissae are all equal");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (fit.slope * x[i] + fit.intercept);
    ssr += e * e;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - ssr / syy : 1.0;
  return fit;
}

GrowthDiagnostic growth_diagnostic(const PairGenerator& generate, std::span<const int> degrees,
                                   const OptimizeOptions& options, const GrowthThresholds& thresholds) {
  if (degrees.size() < 4) throw Error(ErrorCode::DimMismatch, "growth_diagnostic: need at least 4 degrees");
  for (std::size_t i = 0; i < degrees.size(); ++i) {
    if (degrees[i] < 1) throw Error(ErrorCode::IndexOutOfRange, "growth_diagnostic: degrees must be >= 1");
    if (i > 0 && degrees[i] <= degrees[i - 1])
      throw Error(ErrorCode::IndexOutOfRange, "growth_diagnostic: degrees must be strictly ascending");
  }
  GrowthDiagnostic g;
  std::vector<double> xs, ys;
  for (int degree : degrees) {
    const auto [m, mt] = generate(degree);
    GrowthRow row;
    row.degree = degree;
    row.certificate = optimize_C(m, mt, options);
    row.log_ratio = row.certificate.log_ratio();
    xs.push_back(std::log(static_cast<double>(degree)));
    ys.push_back(row.log_ratio);
    g.max_log_ratio = std::max(g.max_log_ratio, row.log_ratio);
    g.rows.push_back(std::move(row));
  }
  g.fit = fit_line(xs, ys);
  if (g.max_log_ratio <= std::log(thresholds.ratio_cap) && g.fit.slope <= thresholds.slope_eps) {
    g.verdict = GrowthVerdict::SimilarEvidence;
  } else if (g.fit.slope >= thresholds.slope_floor && g.fit.r_squared >= thresholds.min_r_squared) {
    g.verdict = GrowthVerdict::NotSimilarEvidence;
  } else {
    g.verdict = GrowthVerdict::Inconclusive;
  }
  return g;
}

// ---------------------------------------------------------------- unitary equivalence

double congruence_residual(const MomentSystem& m, const MomentSystem& m_tilde, const CMatrix& v, Exec exec) {
  require_same_shape(m, m_tilde, "congruence_residual");
  std::vector<double> res(m.size());
  detail::for_each_index(m.size(), exec, [&](std::size_t p) {
    const HermPD& g = m.gram(p);
    const CMatrix target = m_tilde.gram(p).value_relative(g.logscale());
    const CMatrix diff = target - congruence(g.matrix(), v);
    const auto ev = herm_eigenvalues(diff);
    const double norm = herm_eigenvalues(g.matrix()).back();
    res[p] = std::max(std::abs(ev.front()), std::abs(ev.back())) / norm;
  });
  return *std::max_element(res.begin(), res.end());
}

namespace {

// V = U D U~^* from aligned eigenbases; phases D fixed against a second
// combination (P~ = D^* P D) along a greedy spanning tree.
std::optional<CMatrix> align_eigenbases(const CMatrix& s, const CMatrix& s_tilde, const CMatrix& t,
                                        const CMatrix& t_tilde) {
  const std::size_t n = s.rows();
  const EigenDecomposition e = herm_eig(s);
  const EigenDecomposition et = herm_eig(s_tilde);
  const double top = std::max(std::abs(e.values.front()), std::abs(e.values.back()));
  for (std::size_t k = 1; k < n; ++k)
    if (e.values[k] - e.values[k - 1] < 1e-6 * top) return std::nullopt;

  const CMatrix p = adjoint_times(e.vectors, t * e.vectors);
  const CMatrix pt = adjoint_times(et.vectors, t_tilde * et.vectors);
  const double pscale = p.max_abs();
  std::vector<Complex> d(n, Complex{});
  std::vector<bool> fixed(n, false);
  d[0] = 1.0;
  fixed[0] = true;
  for (std::size_t added = 1; added < n; ++added) {
    double best = -1.0;
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!fixed[i]) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (fixed[j]) continue;
        if (std::abs(p(i, j)) > best) {
          best = std::abs(p(i, j));
          bi = i;
          bj = j;
        }
      }
    }
    if (!(best > 1e-10 * pscale)) return std::nullopt;
    const Complex ratio = d[bi] * pt(bi, bj) / p(bi, bj);
    d[bj] = ratio / std::abs(ratio);
    fixed[bj] = true;
  }
  return e.vectors * CMatrix::diagonal(std::span<const Complex>(d)) * et.vectors.adjoint();
}

// Monotone ascent of sum_a Re tr(V^* G_a V G~_a) over unitaries.
CMatrix alternating_polar(const MomentSystem& m, const MomentSystem& m_tilde, CMatrix v, int iterations) {
  const std::size_t n = m.fiber_dim();
  for (int it = 0; it < iterations; ++it) {
    CMatrix acc(n, n);
    for (std::size_t p = 0; p < m.size(); ++p) {
      const HermPD& g = m.gram(p);
      acc += g.matrix() * v * m_tilde.gram(p).value_relative(g.logscale());
    }
    CMatrix next;
    try {
      next = polar_unitary(acc);
    } catch (const Error&) {
      break;
    }
    const double change = (next - v).frobenius_norm();
    v = std::move(next);
    if (change < 1e-15) break;
  }
  return v;
}

}  // namespace

UnitaryResult test_unitary_equivalence(const MomentSystem& m, const MomentSystem& m_tilde, double tol,
                                       std::uint64_t seed, Exec exec) {
  require_same_shape(m, m_tilde, "test_unitary_equivalence");
  const std::size_t n = m.fiber_dim();
  UnitaryResult result;

  // Spectra are unitary-congruence invariants.
  std::vector<double> gaps(m.size());
  detail::for_each_index(m.size(), exec, [&](std::size_t p) {
    const HermPD& g = m.gram(p);
    const auto ev = herm_eigenvalues(g.matrix());
    const auto evt = herm_eigenvalues(m_tilde.gram(p).value_relative(g.logscale()));
    double gap = 0.0;
    for (std::size_t k = 0; k < n; ++k) gap = std::max(gap, std::abs(ev[k] - evt[k]));
    gaps[p] = gap / ev.back();
  });
  for (std::size_t p = 0; p < m.size(); ++p) {
    if (gaps[p] > tol) {
      result.equivalent = false;
      result.witness_pos = p;
      result.witness_gap = gaps[p];
      result.reason = "spectral mismatch at " + to_string(m.truncation()[p]);
      return result;
    }
  }

  // Seeded positive combinations split degeneracies.
  Rng rng(seed);
  CMatrix s(n, n), st(n, n), t(n, n), tt(n, n);
  for (std::size_t p = 0; p < m.size(); ++p) {
    const double a = rng.uniform(0.5, 1.5);
    const double b = rng.uniform(0.5, 1.5);
    const HermPD& g = m.gram(p);
    const CMatrix gt = m_tilde.gram(p).value_relative(g.logscale());
    s += g.matrix() * Complex(a);
    st += gt * Complex(a);
    t += g.matrix() * Complex(b);
    tt += gt * Complex(b);
  }

  CMatrix v;
  if (auto aligned = align_eigenbases(s, st, t, tt)) {
    v = polar_unitary(*aligned);
    result.max_residual = congruence_residual(m, m_tilde, v, exec);
  } else {
    result.max_residual = std::numeric_limits<double>::infinity();
  }
  if (!(result.max_residual <= tol)) {
    CMatrix start = v.rows() == n ? v : CMatrix::identity(n);
    CMatrix refined = alternating_polar(m, m_tilde, start, 500);
    const double r = congruence_residual(m, m_tilde, refined, exec);
    if (r < result.max_residual) {
      v = std::move(refined);
      result.max_residual = r;
    }
  }
  if (result.max_residual <= tol) {
    result.equivalent = true;
    result.v = std::move(v);
    result.reason = "simultaneous unitary congruence recovered";
  } else {
    result.equivalent = false;
    result.reason = "no unitary found; residual floor " + std::to_string(result.max_residual);
  }
  return result;
}

}  // namespace multishift
