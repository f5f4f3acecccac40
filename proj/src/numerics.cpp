#include "multishift/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "multishift/error.hpp"

namespace multishift {

namespace {

constexpr int kJacobiSweepCap = 64;
constexpr double kJacobiOffTol = 1e-14;
constexpr double kHermitianTol = 1e-8;

void require_square(const CMatrix& m, const char* where) {
  if (!m.square()) {
    throw Error(ErrorCode::DimMismatch, std::string(where) + ": matrix is not square");
  }
}

}  // namespace

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NonHermitian: return "NonHermitian";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::CholeskyFail: return "CholeskyFail";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::SingularC: return "SingularC";
    case ErrorCode::ValidationFailed: return "ValidationFailed";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::DimensionCap: return "DimensionCap";
    case ErrorCode::Schema: return "Schema";
  }
  return "Unknown";
}

// ---------------------------------------------------------------- CMatrix

CMatrix::CMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, Complex{0.0, 0.0}) {}

CMatrix::CMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (data_.size() != rows * cols) {
    throw Error(ErrorCode::DimMismatch, "CMatrix: entry count does not match shape");
  }
}

CMatrix CMatrix::identity(std::size_t n) {
  CMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

CMatrix CMatrix::diagonal(std::span<const double> values) {
  CMatrix m(values.size(), values.size());
  for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
  return m;
}

CMatrix CMatrix::diagonal(std::span<const Complex> values) {
  CMatrix m(values.size(), values.size());
  for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
  return m;
}

CMatrix CMatrix::adjoint() const {
  CMatrix r(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) r(j, i) = std::conj((*this)(i, j));
  return r;
}

CMatrix CMatrix::block(std::size_t row, std::size_t col, std::size_t rows, std::size_t cols) const {
  CMatrix r(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) r(i, j) = (*this)(row + i, col + j);
  return r;
}

void CMatrix::set_block(std::size_t row, std::size_t col, const CMatrix& b) {
  for (std::size_t i = 0; i < b.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) (*this)(row + i, col + j) = b(i, j);
}

double CMatrix::frobenius_norm() const {
  double s = 0.0;
  for (const auto& z : data_) s += std::norm(z);
  return std::sqrt(s);
}

double CMatrix::max_abs() const {
  double s = 0.0;
  for (const auto& z : data_) s = std::max(s, std::abs(z));
  return s;
}

bool CMatrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](const Complex& z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
  });
}

CMatrix& CMatrix::operator+=(const CMatrix& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_)
    throw Error(ErrorCode::DimMismatch, "CMatrix +=: shape mismatch");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
  return *this;
}

CMatrix& CMatrix::operator-=(const CMatrix& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_)
    throw Error(ErrorCode::DimMismatch, "CMatrix -=: shape mismatch");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
  return *this;
}

CMatrix& CMatrix::operator*=(Complex s) {
  for (auto& z : data_) z *= s;
  return *this;
}

CMatrix operator*(const CMatrix& a, const CMatrix& b) {
  if (a.cols() != b.rows()) throw Error(ErrorCode::DimMismatch, "CMatrix *: shape mismatch");
  CMatrix r(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const Complex aik = a(i, k);
      if (aik == Complex{}) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) r(i, j) += aik * b(k, j);
    }
  return r;
}

CMatrix adjoint_times(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != b.rows()) throw Error(ErrorCode::DimMismatch, "adjoint_times: shape mismatch");
  CMatrix r(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.rows(); ++k)
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const Complex aki = std::conj(a(k, i));
      if (aki == Complex{}) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) r(i, j) += aki * b(k, j);
    }
  return r;
}

CMatrix hermitian_part(const CMatrix& m) {
  require_square(m, "hermitian_part");
  CMatrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    out(i, i) = m(i, i).real();
    for (std::size_t j = i + 1; j < m.cols(); ++j) {
      out(i, j) = 0.5 * (m(i, j) + std::conj(m(j, i)));
      out(j, i) = std::conj(out(i, j));
    }
  }
  return out;
}

CMatrix congruence(const CMatrix& m, const CMatrix& c) { return hermitian_part(adjoint_times(c, m * c)); }

double relative_asymmetry(const CMatrix& m) {
  require_square(m, "relative_asymmetry");
  const double norm = m.frobenius_norm();
  if (norm == 0.0) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) s += std::norm(m(i, j) - std::conj(m(j, i)));
  return std::sqrt(s) / norm;
}

// ---------------------------------------------------------------- Jacobi

EigenDecomposition herm_eig(const CMatrix& m) {
  require_square(m, "herm_eig");
  if (!m.all_finite()) throw Error(ErrorCode::NonHermitian, "herm_eig: non-finite entries");
  if (relative_asymmetry(m) > kHermitianTol)
    throw Error(ErrorCode::NonHermitian, "herm_eig: relative asymmetry exceeds 1e-8");

  const std::size_t n = m.rows();
  CMatrix a(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) a(i, j) = 0.5 * (m(i, j) + std::conj(m(j, i)));
    a(i, i) = a(i, i).real();
  }
  CMatrix v = CMatrix::identity(n);

  const double threshold = kJacobiOffTol * a.frobenius_norm();
  bool converged = false;
  for (int sweep = 0; sweep <= kJacobiSweepCap; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) off += std::norm(a(i, j));
    if (std::sqrt(off) <= threshold) {
      converged = true;
      break;
    }
    if (sweep == kJacobiSweepCap) break;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const Complex apq = a(p, q);
        const double mag = std::abs(apq);
        if (mag == 0.0) continue;
        const Complex phase = apq / mag;
        const double theta = (a(q, q).real() - a(p, p).real()) / (2.0 * mag);
        double t;
        if (std::abs(theta) > 1e150) {
          t = 0.5 / theta;
        } else {
          t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const Complex sp = s * phase;
        const Complex spc = s * std::conj(phase);

        // a <- a J, J = [[c, s e^{i phi}], [-s e^{-i phi}, c]] on (p, q).
        for (std::size_t k = 0; k < n; ++k) {
          const Complex akp = a(k, p);
          const Complex akq = a(k, q);
          a(k, p) = c * akp - spc * akq;
          a(k, q) = sp * akp + c * akq;
        }
        // a <- J^* a
        for (std::size_t k = 0; k < n; ++k) {
          const Complex apk = a(p, k);
          const Complex aqk = a(q, k);
          a(p, k) = c * apk - sp * aqk;
          a(q, k) = spc * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();
        for (std::size_t k = 0; k < n; ++k) {
          const Complex vkp = v(k, p);
          const Complex vkq = v(k, q);
          v(k, p) = c * vkp - spc * vkq;
          v(k, q) = sp * vkp + c * vkq;
        }
      }
    }
  }
  if (!converged) throw Error(ErrorCode::NoConvergence, "herm_eig: sweep cap reached");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i).real() < a(j, j).real(); });

  EigenDecomposition out;
  out.values.resize(n);
  out.vectors = CMatrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]).real();
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  return out;
}

std::vector<double> herm_eigenvalues(const CMatrix& m) { return herm_eig(m).values; }

// ---------------------------------------------------------------- Cholesky & pencils

CMatrix cholesky(const CMatrix& m) {
  require_square(m, "cholesky");
  const std::size_t n = m.rows();
  CMatrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = m(j, j).real();
    for (std::size_t k = 0; k < j; ++k) d -= std::norm(l(j, k));
    if (!(d > 0.0) || !std::isfinite(d))
      throw Error(ErrorCode::CholeskyFail, "cholesky: matrix is not numerically positive definite");
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      Complex s = m(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * std::conj(l(j, k));
      l(i, j) = s / ljj;
    }
  }
  return l;
}

namespace {

// Solves L y = b in place for lower-triangular L, column by column.
void forward_substitute(const CMatrix& l, CMatrix& b) {
  const std::size_t n = l.rows();
  for (std::size_t c = 0; c < b.cols(); ++c)
    for (std::size_t i = 0; i < n; ++i) {
      Complex s = b(i, c);
      for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * b(k, c);
      b(i, c) = s / l(i, i);
    }
}

}  // namespace

std::vector<double> pencil_log_eigs(const CMatrix& a, const CMatrix& b, double log_offset) {
  require_square(a, "pencil_log_eigs");
  if (a.rows() != b.rows() || !b.square())
    throw Error(ErrorCode::DimMismatch, "pencil_log_eigs: dimension mismatch");
  const CMatrix l = cholesky(b);
  CMatrix y = a;
  forward_substitute(l, y);      // L^{-1} A
  CMatrix z = y.adjoint();
  forward_substitute(l, z);      // L^{-1} (L^{-1} A)^* = (L^{-1} A L^{-*})^*
  const std::size_t n = a.rows();
  CMatrix k(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) k(i, j) = 0.5 * (std::conj(z(j, i)) + z(i, j));
  std::vector<double> values = herm_eigenvalues(k);
  for (double& v : values) {
    if (!(v > 0.0))
      throw Error(ErrorCode::CholeskyFail, "pencil_log_eigs: pencil is not positive definite");
    v = std::log(v) + log_offset;
  }
  return values;
}

std::vector<double> pencil_log_eigs(const HermPD& a, const HermPD& b) {
  return pencil_log_eigs(a.matrix(), b.matrix(), a.logscale() - b.logscale());
}

std::vector<double> pencil_eigs(const HermPD& a, const HermPD& b) {
  std::vector<double> v = pencil_log_eigs(a, b);
  for (double& x : v) x = std::exp(x);
  return v;
}

// ---------------------------------------------------------------- HermPD

HermPD HermPD::balance(CMatrix m, double logscale, double spectral_norm) {
  if (spectral_norm >= 0.5 && spectral_norm <= 2.0) return HermPD(std::move(m), logscale);
  const int k = static_cast<int>(std::lround(std::log2(spectral_norm)));
  m *= std::ldexp(1.0, -k);
  return HermPD(std::move(m), logscale + k * std::log(2.0));
}

HermPD HermPD::from_matrix(const CMatrix& m, double logscale) {
  require_square(m, "HermPD");
  if (m.rows() == 0) throw Error(ErrorCode::DimMismatch, "HermPD: empty matrix");
  if (!std::isfinite(logscale)) throw Error(ErrorCode::CholeskyFail, "HermPD: non-finite logscale");
  if (!m.all_finite()) throw Error(ErrorCode::NonHermitian, "HermPD: non-finite entries");
  if (relative_asymmetry(m) > kHermitianTol)
    throw Error(ErrorCode::NonHermitian, "HermPD: relative asymmetry exceeds 1e-8");
  const std::size_t n = m.rows();
  CMatrix h(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) h(i, j) = 0.5 * (m(i, j) + std::conj(m(j, i)));
    h(i, i) = h(i, i).real();
  }
  const std::vector<double> ev = herm_eigenvalues(h);
  if (!(ev.front() > 0.0))
    throw Error(ErrorCode::CholeskyFail, "HermPD: matrix is not positive definite");
  return balance(std::move(h), logscale, ev.back());
}

HermPD HermPD::identity(std::size_t n) { return HermPD(CMatrix::identity(n), 0.0); }

HermPD HermPD::from_log_diagonal(std::span<const double> log_diag) {
  if (log_diag.empty()) throw Error(ErrorCode::DimMismatch, "HermPD: empty diagonal");
  const double top = *std::max_element(log_diag.begin(), log_diag.end());
  std::vector<double> d(log_diag.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = std::exp(log_diag[i] - top);
  if (!(*std::min_element(d.begin(), d.end()) > 0.0))
    throw Error(ErrorCode::CholeskyFail, "HermPD: diagonal underflows to zero");
  return HermPD(CMatrix::diagonal(std::span<const double>(d)), top);
}

CMatrix HermPD::value() const { return matrix_ * Complex(std::exp(logscale_)); }

CMatrix HermPD::value_relative(double reference) const {
  return matrix_ * Complex(std::exp(logscale_ - reference));
}

HermPD HermPD::rebalanced() const {
  return balance(matrix_, logscale_, herm_eigenvalues(matrix_).back());
}

HermPD HermPD::scaled_log(double delta) const { return HermPD(matrix_, logscale_ + delta); }

HermPD HermPD::congruence(const CMatrix& c) const {
  return from_matrix(multishift::congruence(matrix_, c), logscale_);
}

namespace {

HermPD spectral_function(const HermPD& m, double power) {
  const EigenDecomposition e = herm_eig(m.matrix());
  if (!(e.values.front() > 0.0))
    throw Error(ErrorCode::CholeskyFail, "spectral function: matrix is not positive definite");
  const std::size_t n = m.dim();
  CMatrix scaled = e.vectors;
  for (std::size_t j = 0; j < n; ++j) {
    const double f = std::pow(e.values[j], power);
    for (std::size_t i = 0; i < n; ++i) scaled(i, j) *= f;
  }
  CMatrix r = scaled * e.vectors.adjoint();
  return HermPD::from_matrix(r, power * m.logscale());
}

}  // namespace

HermPD sqrt_pd(const HermPD& m) { return spectral_function(m, 0.5); }
HermPD inv_sqrt_pd(const HermPD& m) { return spectral_function(m, -0.5); }
HermPD inverse_pd(const HermPD& m) { return spectral_function(m, -1.0); }

// ---------------------------------------------------------------- general matrices

std::vector<double> singular_values(const CMatrix& m) {
  std::vector<double> ev = herm_eigenvalues(adjoint_times(m, m));
  for (double& x : ev) x = std::sqrt(std::max(x, 0.0));
  return ev;
}

double spectral_norm(const CMatrix& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  return singular_values(m).back();
}

CMatrix polar_unitary(const CMatrix& m) {
  require_square(m, "polar_unitary");
  const std::size_t n = m.rows();
  const EigenDecomposition e = herm_eig(adjoint_times(m, m));
  const double smax = std::sqrt(std::max(e.values.back(), 0.0));
  const double smin = std::sqrt(std::max(e.values.front(), 0.0));
  if (!(smin > 1e-12 * smax)) throw Error(ErrorCode::RankDeficient, "polar_unitary: rank deficient");
  CMatrix scaled = e.vectors;
  for (std::size_t j = 0; j < n; ++j) {
    const double f = 1.0 / std::sqrt(e.values[j]);
    for (std::size_t i = 0; i < n; ++i) scaled(i, j) *= f;
  }
  CMatrix u = m * (scaled * e.vectors.adjoint());
  // Newton-Schulz polish: u <- u (3I - u^* u) / 2.
  const CMatrix three = CMatrix::identity(n) * Complex(3.0);
  for (int it = 0; it < 2; ++it) u = (u * (three - adjoint_times(u, u))) * Complex(0.5);
  return u;
}

CMatrix solve(const CMatrix& a, const CMatrix& b) {
  require_square(a, "solve");
  if (b.rows() != a.rows()) throw Error(ErrorCode::DimMismatch, "solve: shape mismatch");
  const std::size_t n = a.rows();
  CMatrix lu = a;
  CMatrix x = b;
  const double scale = a.max_abs();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    double best = std::abs(lu(k, k));
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(lu(i, k)) > best) {
        best = std::abs(lu(i, k));
        piv = i;
      }
    if (!(best > 1e-300) || best <= scale * 1e-15 * static_cast<double>(n))
      throw Error(ErrorCode::RankDeficient, "solve: matrix is singular to working precision");
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(lu(k, j), lu(piv, j));
      for (std::size_t j = 0; j < x.cols(); ++j) std::swap(x(k, j), x(piv, j));
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const Complex f = lu(i, k) / lu(k, k);
      if (f == Complex{}) continue;
      for (std::size_t j = k; j < n; ++j) lu(i, j) -= f * lu(k, j);
      for (std::size_t j = 0; j < x.cols(); ++j) x(i, j) -= f * x(k, j);
    }
  }
  for (std::size_t kk = n; kk-- > 0;) {
    for (std::size_t j = 0; j < x.cols(); ++j) {
      Complex s = x(kk, j);
      for (std::size_t i = kk + 1; i < n; ++i) s -= lu(kk, i) * x(i, j);
      x(kk, j) = s / lu(kk, kk);
    }
  }
  return x;
}

CMatrix inverse(const CMatrix& a) { return solve(a, CMatrix::identity(a.rows())); }

CMatrix expm(const CMatrix& m) {
  require_square(m, "expm");
  const std::size_t n = m.rows();
  double norm1 = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double col = 0.0;
    for (std::size_t i = 0; i < n; ++i) col += std::abs(m(i, j));
    norm1 = std::max(norm1, col);
  }
  int squarings = 0;
  if (norm1 > 0.25) squarings = static_cast<int>(std::ceil(std::log2(norm1 / 0.25)));
  const CMatrix a = m * Complex(std::ldexp(1.0, -squarings));
  CMatrix result = CMatrix::identity(n);
  CMatrix term = CMatrix::identity(n);
  for (int k = 1; k <= 18; ++k) {
    term = (term * a) * Complex(1.0 / k);
    result += term;
  }
  for (int s = 0; s < squarings; ++s) result = result * result;
  return result;
}

}  // namespace multishift
