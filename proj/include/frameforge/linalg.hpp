#pragma once

// Dense complex linear algebra: the substrate for every frame computation.
//
// Inner products are linear in the first argument, <x, y> = sum_i x_i conj(y_i),
// so the Gram matrix of {g_k} has entry (j, k) = <g_k, g_j>.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace frameforge {

using Complex = std::complex<double>;
using CVector = std::vector<Complex>;

// Relative Hermitian-symmetry tolerance accepted by HermitianMatrix.
inline constexpr double kHermitianTol = 1e-12;

class CMatrix {
 public:
  CMatrix() = default;
  CMatrix(std::size_t rows, std::size_t cols);

  static CMatrix identity(std::size_t n);
  /// Matrix whose columns are `columns`; every column must have `rows` entries.
  static CMatrix from_columns(std::span<const CVector> columns, std::size_t rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  Complex& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const Complex& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  CVector column(std::size_t j) const;
  std::vector<CVector> columns() const;
  CMatrix adjoint() const;
  CVector apply(std::span<const Complex> x) const;
  double frobenius_norm() const;

  friend CMatrix operator*(const CMatrix& a, const CMatrix& b);
  friend CMatrix operator-(const CMatrix& a, const CMatrix& b);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Complex> data_;
};

// A square matrix validated as Hermitian on construction.
class HermitianMatrix {
 public:
  /// Throws InvalidArgument unless `m` is square and max|m - m*| <= rel_tol * max|m|.
  explicit HermitianMatrix(CMatrix m, double rel_tol = kHermitianTol);

  std::size_t order() const { return m_.rows(); }
  const CMatrix& matrix() const { return m_; }
  const Complex& operator()(std::size_t i, std::size_t j) const { return m_(i, j); }

 private:
  CMatrix m_;
};

struct EigenDecomposition {
  std::vector<double> eigenvalues;    // ascending
  std::vector<CVector> eigenvectors;  // orthonormal, eigenvectors[i] pairs with eigenvalues[i]
  double residual = 0.0;              // max_i ||M v_i - lambda_i v_i||
};

struct Orthonormalized {
  std::vector<CVector> ons;
  std::size_t rank = 0;
};

// Vector helpers.
Complex inner(std::span<const Complex> x, std::span<const Complex> y);
double norm(std::span<const Complex> x);
CVector add(std::span<const Complex> x, std::span<const Complex> y);
CVector subtract(std::span<const Complex> x, std::span<const Complex> y);
CVector scaled(std::span<const Complex> x, Complex c);
/// y += c * x
void axpy(Complex c, std::span<const Complex> x, std::span<Complex> y);
CVector basis_vector(std::size_t dim, std::size_t index0);
bool all_finite(std::span<const Complex> x);

/// Gram matrix of the vectors: entry (j, k) = <g_k, g_j>.
HermitianMatrix gram(std::span<const CVector> vectors);
/// Frame operator sum_k g_k g_k^* of order `ambient`.
HermitianMatrix frame_operator(std::span<const CVector> vectors, std::size_t ambient);

/// Cyclic Jacobi eigensolver. Sweeps until the off-diagonal Frobenius mass is at most
/// 1e-12 * ||M||_F, then checks the residual contract against `tol`.
EigenDecomposition hermitian_eig(const HermitianMatrix& m, double tol = 1e-10);
/// Validates `m` as Hermitian first; throws InvalidArgument otherwise.
EigenDecomposition hermitian_eig(const CMatrix& m, double tol = 1e-10);

/// Singular values in descending order (one-sided Jacobi).
std::vector<double> singular_values(const CMatrix& a);
/// Number of singular values above max(rows, cols) * rel_tol * sigma_max.
std::size_t numerical_rank(const CMatrix& a, double rel_tol = 1e-9);
double operator_norm(const CMatrix& a);
/// Inverse of a square matrix by LU with partial pivoting; throws HypothesisError if singular.
CMatrix inverse(const CMatrix& a);

/// Modified Gram-Schmidt with one reorthogonalization pass. A vector is dropped when its
/// residual falls to tol times its original norm (zero vectors are always dropped).
Orthonormalized orthonormalize(std::span<const CVector> vectors, double tol = 1e-10);

/// Orthonormal basis of the orthogonal complement of span(ons) in C^ambient.
std::vector<CVector> complement_basis(std::span<const CVector> ons, std::size_t ambient,
                                      double tol = 1e-10);

/// Rotation by `angle` in the plane span{u, v} (u -> cos u + sin v), identity on the
/// orthogonal complement. u and v must be orthonormal within 1e-10.
CVector rotate_plane(std::span<const Complex> x, std::span<const Complex> u,
                     std::span<const Complex> v, double angle);

}  // namespace frameforge
