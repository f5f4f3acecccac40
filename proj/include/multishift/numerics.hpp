#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace multishift {

using Complex = std::complex<double>;

/// Dense complex matrix, row-major.
class CMatrix {
 public:
  CMatrix() = default;
  CMatrix(std::size_t rows, std::size_t cols);
  CMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> entries);

  static CMatrix identity(std::size_t n);
  static CMatrix diagonal(std::span<const double> values);
  static CMatrix diagonal(std::span<const Complex> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool square() const noexcept { return rows_ == cols_; }

  Complex& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const Complex& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<const Complex> entries() const noexcept { return data_; }
  std::span<Complex> entries() noexcept { return data_; }

  CMatrix adjoint() const;
  CMatrix block(std::size_t row, std::size_t col, std::size_t rows, std::size_t cols) const;
  void set_block(std::size_t row, std::size_t col, const CMatrix& b);

  double frobenius_norm() const;
  double max_abs() const;
  bool all_finite() const;

  CMatrix& operator+=(const CMatrix& other);
  CMatrix& operator-=(const CMatrix& other);
  CMatrix& operator*=(Complex s);

  friend CMatrix operator+(CMatrix a, const CMatrix& b) { return a += b; }
  friend CMatrix operator-(CMatrix a, const CMatrix& b) { return a -= b; }
  friend CMatrix operator*(CMatrix a, Complex s) { return a *= s; }
  friend CMatrix operator*(Complex s, CMatrix a) { return a *= s; }
  friend CMatrix operator*(const CMatrix& a, const CMatrix& b);

  friend bool operator==(const CMatrix&, const CMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Complex> data_;
};

/// A^* B without forming the adjoint.
CMatrix adjoint_times(const CMatrix& a, const CMatrix& b);

/// (M + M^*) / 2, exactly Hermitian.
CMatrix hermitian_part(const CMatrix& m);

/// C^* M C for Hermitian M; the result is exactly Hermitian.
CMatrix congruence(const CMatrix& m, const CMatrix& c);

/// Hermitian positive-definite matrix stored as exp(logscale) * matrix with
/// the spectral norm of `matrix` kept in [1/2, 2].
class HermPD {
 public:
  HermPD() = default;

  /// Validates (Hermitian, positive definite, finite) and balances.
  static HermPD from_matrix(const CMatrix& m, double logscale = 0.0);
  static HermPD identity(std::size_t n);
  /// Diagonal matrix with entries exp(log_diag[i]).
  static HermPD from_log_diagonal(std::span<const double> log_diag);

  std::size_t dim() const noexcept { return matrix_.rows(); }
  const CMatrix& matrix() const noexcept { return matrix_; }
  double logscale() const noexcept { return logscale_; }

  /// exp(logscale) * matrix; may overflow for extreme scales.
  CMatrix value() const;
  /// Value expressed relative to exp(reference): exp(logscale - reference) * matrix.
  CMatrix value_relative(double reference) const;

  HermPD rebalanced() const;
  HermPD scaled_log(double delta) const;
  /// C^* (this) C, rebalanced.
  HermPD congruence(const CMatrix& c) const;

  friend bool operator==(const HermPD&, const HermPD&) = default;

 private:
  HermPD(CMatrix m, double logscale) : matrix_(std::move(m)), logscale_(logscale) {}
  static HermPD balance(CMatrix m, double logscale, double spectral_norm);

  CMatrix matrix_;
  double logscale_ = 0.0;
};

struct EigenDecomposition {
  std::vector<double> values;  // ascending
  CMatrix vectors;             // columns are eigenvectors
};

/// Cyclic Jacobi eigensolver for Hermitian matrices.
EigenDecomposition herm_eig(const CMatrix& m);
std::vector<double> herm_eigenvalues(const CMatrix& m);

/// Lower-triangular L with L L^* = m.
CMatrix cholesky(const CMatrix& m);

/// Eigenvalues of the pencil a x = lambda b (b positive definite) in natural
/// log units, ascending. `log_offset` is added to every value.
std::vector<double> pencil_log_eigs(const CMatrix& a, const CMatrix& b, double log_offset = 0.0);
std::vector<double> pencil_log_eigs(const HermPD& a, const HermPD& b);
std::vector<double> pencil_eigs(const HermPD& a, const HermPD& b);

HermPD sqrt_pd(const HermPD& m);
HermPD inv_sqrt_pd(const HermPD& m);
HermPD inverse_pd(const HermPD& m);

/// Unitary factor of the polar decomposition (nearest unitary in Frobenius norm).
CMatrix polar_unitary(const CMatrix& m);

/// Solves a x = b by LU with partial pivoting.
CMatrix solve(const CMatrix& a, const CMatrix& b);
CMatrix inverse(const CMatrix& a);

std::vector<double> singular_values(const CMatrix& m);  // ascending
double spectral_norm(const CMatrix& m);

/// Matrix exponential (scaling and squaring with a Taylor core).
CMatrix expm(const CMatrix& m);

/// ||m - m^*||_F / ||m||_F (0 for the zero matrix).
double relative_asymmetry(const CMatrix& m);

}  // namespace multishift
