#include "multishift/intertwiner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "multishift/error.hpp"
#include "multishift/sampling.hpp"

namespace multishift {

namespace {

void require_same_shape(const MomentSystem& m, const MomentSystem& mt) {
  if (m.dim() != mt.dim() || m.max_degree() != mt.max_degree() || m.fiber_dim() != mt.fiber_dim())
    throw Error(ErrorCode::DimMismatch, "intertwiner: systems have different shapes");
}

// Columns whose level can still be raised; XM_j - M~_j X is only meaningful there.
std::vector<std::size_t> interior_columns(const Truncation& t, std::size_t n) {
  std::vector<std::size_t> cols;
  for (std::size_t p = 0; p < t.size(); ++p)
    if (t[p].degree() < t.max_degree())
      for (std::size_t k = 0; k < n; ++k) cols.push_back(p * n + k);
  return cols;
}

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

struct SparseRow {
  std::vector<std::pair<std::size_t, Complex>> terms;
};

// Orthonormal basis (columns) of the null space of a, by Gaussian
// elimination with complete pivoting.
CMatrix null_space(CMatrix a) {
  const std::size_t rows = a.rows();
  const std::size_t cols = a.cols();
  std::vector<std::size_t> perm(cols);
  std::iota(perm.begin(), perm.end(), 0);
  const double threshold = 1e-10 * std::max(a.max_abs(), 1e-300);

  std::size_t rank = 0;
  for (; rank < std::min(rows, cols); ++rank) {
    double best = 0.0;
    std::size_t br = rank, bc = rank;
    for (std::size_t i = rank; i < rows; ++i)
      for (std::size_t j = rank; j < cols; ++j)
        if (std::abs(a(i, j)) > best) {
          best = std::abs(a(i, j));
          br = i;
          bc = j;
        }
    if (best <= threshold) break;
    if (br != rank)
      for (std::size_t j = 0; j < cols; ++j) std::swap(a(rank, j), a(br, j));
    if (bc != rank) {
      for (std::size_t i = 0; i < rows; ++i) std::swap(a(i, rank), a(i, bc));
      std::swap(perm[rank], perm[bc]);
    }
    const Complex pivot = a(rank, rank);
    for (std::size_t i = rank + 1; i < rows; ++i) {
      const Complex f = a(i, rank) / pivot;
      if (f == Complex{}) continue;
      for (std::size_t j = rank; j < cols; ++j) a(i, j) -= f * a(rank, j);
    }
  }

  const std::size_t nullity = cols - rank;
  CMatrix basis(cols, nullity);
  for (std::size_t f = 0; f < nullity; ++f) {
    std::vector<Complex> x(cols, Complex{});
    x[rank + f] = 1.0;
    for (std::size_t ii = rank; ii-- > 0;) {
      Complex s = 0.0;
      for (std::size_t j = ii + 1; j < cols; ++j) s += a(ii, j) * x[j];
      x[ii] = -s / a(ii, ii);
    }
    for (std::size_t j = 0; j < cols; ++j) basis(perm[j], f) = x[j];
  }

  // Modified Gram-Schmidt, two passes.
  for (int pass = 0; pass < 2; ++pass)
    for (std::size_t f = 0; f < nullity; ++f) {
      for (std::size_t g = 0; g < f; ++g) {
        Complex dot = 0.0;
        for (std::size_t i = 0; i < cols; ++i) dot += std::conj(basis(i, g)) * basis(i, f);
        for (std::size_t i = 0; i < cols; ++i) basis(i, f) -= dot * basis(i, g);
      }
      double norm = 0.0;
      for (std::size_t i = 0; i < cols; ++i) norm += std::norm(basis(i, f));
      norm = std::sqrt(norm);
      for (std::size_t i = 0; i < cols; ++i) basis(i, f) /= norm;
    }
  return basis;
}

std::vector<CMatrix> dense_shifts(const MomentSystem& m) {
  const GramRoots roots = gram_roots(m);
  std::vector<CMatrix> out;
  for (std::size_t j = 0; j < m.dim(); ++j) out.push_back(build_mz(m, roots, j).dense());
  return out;
}

// T_a = product of the level blocks of M_z along the coordinate-major path.
CMatrix path_block_product(const std::vector<TruncatedMz>& mz, const MultiIndex& a, std::size_t n) {
  CMatrix prod = CMatrix::identity(n);
  const Truncation& t = *mz.front().truncation;
  for (const PathStep& step : monotone_path(a)) prod = *mz[step.direction].blocks[t.position(step.from)] * prod;
  return prod;
}

}  // namespace

IntertwinerMatrix diagonal_intertwiner(const MomentSystem& m, const MomentSystem& m_tilde, const CMatrix& c,
                                       Exec exec) {
  require_same_shape(m, m_tilde);
  const std::size_t n = m.fiber_dim();
  if (c.rows() != n || c.cols() != n) throw Error(ErrorCode::DimMismatch, "diagonal_intertwiner: C shape");
  const auto sv = singular_values(c);
  if (!(sv.front() > 1e-14 * sv.back())) throw Error(ErrorCode::SingularC, "diagonal_intertwiner: C is singular");
  const CMatrix c_inv = inverse(c);

  IntertwinerMatrix x;
  x.truncation = m.truncation_ptr();
  x.fiber_dim = n;
  x.x = CMatrix(n * m.size(), n * m.size());
  detail::for_each_index(m.size(), exec, [&](std::size_t p) {
    const HermPD left = sqrt_pd(m_tilde.gram(p));
    const HermPD right = inv_sqrt_pd(m.gram(p));
    const double scale = std::exp(left.logscale() + right.logscale());
    x.x.set_block(p * n, p * n, (left.matrix() * c_inv * right.matrix()) * Complex(scale));
  });
  return x;
}

double intertwining_residual(const IntertwinerMatrix& x, const MomentSystem& m, const MomentSystem& m_tilde) {
  require_same_shape(m, m_tilde);
  const std::vector<CMatrix> shifts = dense_shifts(m);
  const std::vector<CMatrix> shifts_tilde = dense_shifts(m_tilde);
  const std::vector<std::size_t> cols = interior_columns(m.truncation(), m.fiber_dim());
  double worst = 0.0;
  double max_shift = 0.0;
  for (std::size_t j = 0; j < m.dim(); ++j) {
    max_shift = std::max({max_shift, shifts[j].frobenius_norm(), shifts_tilde[j].frobenius_norm()});
    const CMatrix r = x.x * shifts[j] - shifts_tilde[j] * x.x;
    double s = 0.0;
    for (std::size_t i = 0; i < r.rows(); ++i)
      for (std::size_t c : cols) s += std::norm(r(i, c));
    worst = std::max(worst, std::sqrt(s));
  }
  const double scale = x.x.frobenius_norm() * max_shift;
  return scale > 0.0 ? worst / scale : worst;
}

std::pair<double, double> block_singular_range(const IntertwinerMatrix& x) {
  double lo = HUGE_VAL;
  double hi = 0.0;
  for (std::size_t p = 0; p < x.truncation->size(); ++p) {
    const auto sv = singular_values(x.block(p, p));
    lo = std::min(lo, sv.front());
    hi = std::max(hi, sv.back());
  }
  return {lo, hi};
}

// ---------------------------------------------------------------- oracle

IntertwinerBasis::IntertwinerBasis(std::shared_ptr<const Truncation> truncation, std::size_t fiber_dim,
                                   std::vector<Component> components)
    : truncation_(std::move(truncation)), fiber_dim_(fiber_dim), components_(std::move(components)) {
  for (const auto& c : components_) dimension_ += c.basis.cols();
}

IntertwinerMatrix IntertwinerBasis::sample(std::uint64_t seed) const {
  Rng rng(seed);
  const std::size_t dim = total_dim();
  IntertwinerMatrix out;
  out.truncation = truncation_;
  out.fiber_dim = fiber_dim_;
  out.x = CMatrix(dim, dim);
  auto entries = out.x.entries();
  for (const auto& comp : components_) {
    std::vector<Complex> coeff(comp.basis.cols());
    for (auto& z : coeff) z = rng.complex_normal();
    for (std::size_t u = 0; u < comp.unknowns.size(); ++u) {
      Complex s = 0.0;
      for (std::size_t k = 0; k < coeff.size(); ++k) s += comp.basis(u, k) * coeff[k];
      entries[comp.unknowns[u]] = s;
    }
  }
  return out;
}

double IntertwinerBasis::membership_residual(const CMatrix& x) const {
  const std::size_t dim = total_dim();
  if (x.rows() != dim || x.cols() != dim) throw Error(ErrorCode::DimMismatch, "membership_residual: shape");
  const auto entries = x.entries();
  double res = 0.0;
  for (const auto& comp : components_) {
    const std::size_t k = comp.basis.cols();
    std::vector<Complex> coeff(k, Complex{});
    for (std::size_t u = 0; u < comp.unknowns.size(); ++u)
      for (std::size_t c = 0; c < k; ++c) coeff[c] += std::conj(comp.basis(u, c)) * entries[comp.unknowns[u]];
    for (std::size_t u = 0; u < comp.unknowns.size(); ++u) {
      Complex proj = 0.0;
      for (std::size_t c = 0; c < k; ++c) proj += comp.basis(u, c) * coeff[c];
      res += std::norm(entries[comp.unknowns[u]] - proj);
    }
  }
  const double norm = x.frobenius_norm();
  return norm > 0.0 ? std::sqrt(res) / norm : std::sqrt(res);
}

IntertwinerBasis brute_force_intertwiner(const MomentSystem& m, const MomentSystem& m_tilde) {
  require_same_shape(m, m_tilde);
  const std::size_t n = m.fiber_dim();
  const std::size_t dim = n * m.size();
  if (dim > kOracleDimensionCap)
    throw Error(ErrorCode::DimensionCap, "brute_force_intertwiner: total dimension " + std::to_string(dim) +
                                             " exceeds " + std::to_string(kOracleDimensionCap));
  const std::vector<CMatrix> shifts = dense_shifts(m);
  const std::vector<CMatrix> shifts_tilde = dense_shifts(m_tilde);
  const std::vector<std::size_t> cols = interior_columns(m.truncation(), n);

  // Unknown X(r, k) has index r * dim + k. Equation (j, r, c):
  //   sum_k X(r, k) M_j(k, c) - sum_k M~_j(r, k) X(k, c) = 0.
  std::vector<SparseRow> equations;
  for (std::size_t j = 0; j < m.dim(); ++j) {
    const CMatrix& mj = shifts[j];
    const CMatrix& mtj = shifts_tilde[j];
    for (std::size_t r = 0; r < dim; ++r)
      for (std::size_t c : cols) {
        SparseRow row;
        for (std::size_t k = 0; k < dim; ++k)
          if (mj(k, c) != Complex{}) row.terms.emplace_back(r * dim + k, mj(k, c));
        for (std::size_t k = 0; k < dim; ++k)
          if (mtj(r, k) != Complex{}) row.terms.emplace_back(k * dim + c, -mtj(r, k));
        if (!row.terms.empty()) equations.push_back(std::move(row));
      }
  }

  const std::size_t unknowns = dim * dim;
  DisjointSets sets(unknowns);
  std::vector<bool> constrained(unknowns, false);
  for (const auto& eq : equations)
    for (const auto& [u, coeff] : eq.terms) {
      constrained[u] = true;
      sets.unite(eq.terms.front().first, u);
    }

  // Group unknowns and equations by root, in ascending order of the root.
  std::vector<std::ptrdiff_t> slot(unknowns, -1);
  std::vector<std::vector<std::size_t>> members;
  std::vector<std::size_t> free_unknowns;
  for (std::size_t u = 0; u < unknowns; ++u) {
    if (!constrained[u]) {
      free_unknowns.push_back(u);
      continue;
    }
    const std::size_t root = sets.find(u);
    if (slot[root] < 0) {
      slot[root] = static_cast<std::ptrdiff_t>(members.size());
      members.emplace_back();
    }
    members[static_cast<std::size_t>(slot[root])].push_back(u);
  }
  std::vector<std::vector<const SparseRow*>> rows_of(members.size());
  for (const auto& eq : equations)
    rows_of[static_cast<std::size_t>(slot[sets.find(eq.terms.front().first)])].push_back(&eq);

  std::vector<IntertwinerBasis::Component> components;
  for (std::size_t g = 0; g < members.size(); ++g) {
    const auto& us = members[g];
    std::vector<std::size_t> local(us.size());
    CMatrix a(rows_of[g].size(), us.size());
    for (std::size_t i = 0; i < rows_of[g].size(); ++i)
      for (const auto& [u, coeff] : rows_of[g][i]->terms) {
        const auto col = static_cast<std::size_t>(std::lower_bound(us.begin(), us.end(), u) - us.begin());
        a(i, col) += coeff;
      }
    components.push_back({us, null_space(std::move(a))});
  }
  if (!free_unknowns.empty()) {
    const std::size_t k = free_unknowns.size();
    components.push_back({free_unknowns, CMatrix::identity(k)});
  }
  return IntertwinerBasis(m.truncation_ptr(), n, std::move(components));
}

IntertwinerStructure check_intertwiner_structure(const MomentSystem& m, const MomentSystem& m_tilde,
                                                 const IntertwinerMatrix& x, double tol) {
  require_same_shape(m, m_tilde);
  const std::size_t n = m.fiber_dim();
  const Truncation& t = m.truncation();
  IntertwinerStructure s;
  const double xnorm = x.x.frobenius_norm();

  double level0 = 0.0;
  for (std::size_t p = 1; p < t.size(); ++p) level0 += std::pow(x.block(0, p).frobenius_norm(), 2);
  s.level0_residual = std::sqrt(level0) / xnorm;

  const GramRoots roots = gram_roots(m);
  const GramRoots roots_tilde = gram_roots(m_tilde);
  std::vector<TruncatedMz> mz, mz_tilde;
  for (std::size_t j = 0; j < m.dim(); ++j) {
    mz.push_back(build_mz(m, roots, j));
    mz_tilde.push_back(build_mz(m_tilde, roots_tilde, j));
  }
  const CMatrix x00 = x.block(0, 0);
  for (std::size_t p = 1; p < t.size(); ++p) {
    const CMatrix predicted =
        path_block_product(mz_tilde, t[p], n) * x00 * inverse(path_block_product(mz, t[p], n));
    const CMatrix actual = x.block(p, p);
    const double scale = std::max(actual.frobenius_norm(), predicted.frobenius_norm());
    s.recursion_residual = std::max(s.recursion_residual, (actual - predicted).frobenius_norm() / scale);
  }

  const CMatrix x_inv = inverse(x.x);
  s.norm = spectral_norm(x.x);
  s.inverse_norm = spectral_norm(x_inv);
  // Level-0 block of X^{-1}, moved back from orthonormal coordinates.
  s.certificate.c = inv_sqrt_pd(m.gram(0)).value() * x_inv.block(0, 0, n, n) * sqrt_pd(m_tilde.gram(0)).value();
  s.certificate.log_m1 = -2.0 * std::log(s.inverse_norm);
  s.certificate.log_m2 = 2.0 * std::log(s.norm);
  s.verification = verify_certificate(m, m_tilde, s.certificate, tol);
  return s;
}

}  // namespace multishift
