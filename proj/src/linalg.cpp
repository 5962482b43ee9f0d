#include "frameforge/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "frameforge/error.hpp"

namespace frameforge {

namespace {

constexpr int kMaxSweeps = 100;

void require_same_length(std::span<const Complex> x, std::span<const Complex> y) {
  if (x.size() != y.size()) {
    throw InvalidArgument(fmt::format("vector length mismatch: {} vs {}", x.size(), y.size()));
  }
}

// Unitary W = [[w00, w01], [w10, w11]] such that W^* [[a, g], [conj(g), b]] W is diagonal.
// The phase of g is removed first, then a real Jacobi rotation with the smaller angle.
struct PlaneUnitary {
  Complex w00, w01, w10, w11;
};

PlaneUnitary diagonalizing_rotation(double a, double b, Complex g) {
  const double r = std::abs(g);
  const Complex phase_conj = std::conj(g / r);
  const double theta = (b - a) / (2.0 * r);
  double t;
  if (std::abs(theta) > 1e150) {
    t = 0.5 / theta;
  } else {
    t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
  }
  const double c = 1.0 / std::sqrt(1.0 + t * t);
  const double s = t * c;
  return {c, s, -s * phase_conj, c * phase_conj};
}

// Columns p, q of `m` <- [col_p col_q] * W.
void rotate_columns(CMatrix& m, std::size_t p, std::size_t q, const PlaneUnitary& w) {
  for (std::size_t k = 0; k < m.rows(); ++k) {
    const Complex ap = m(k, p);
    const Complex aq = m(k, q);
    m(k, p) = ap * w.w00 + aq * w.w10;
    m(k, q) = ap * w.w01 + aq * w.w11;
  }
}

// Rows p, q of `m` <- W^* [row_p; row_q].
void rotate_rows(CMatrix& m, std::size_t p, std::size_t q, const PlaneUnitary& w) {
  for (std::size_t k = 0; k < m.cols(); ++k) {
    const Complex ap = m(p, k);
    const Complex aq = m(q, k);
    m(p, k) = std::conj(w.w00) * ap + std::conj(w.w10) * aq;
    m(q, k) = std::conj(w.w01) * ap + std::conj(w.w11) * aq;
  }
}

double off_diagonal_norm(const CMatrix& m) {
  double s = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (i != j) s += std::norm(m(i, j));
    }
  }
  return std::sqrt(s);
}

void check_orthonormal_pair(std::span<const Complex> u, std::span<const Complex> v) {
  constexpr double kTol = 1e-10;
  const double uu = std::abs(inner(u, u) - 1.0);
  const double vv = std::abs(inner(v, v) - 1.0);
  const double uv = std::abs(inner(u, v));
  if (uu > kTol || vv > kTol || uv > kTol) {
    throw InvalidArgument(fmt::format(
        "rotation plane vectors are not orthonormal (|<u,u>-1|={:.3e}, |<v,v>-1|={:.3e}, "
        "|<u,v>|={:.3e})",
        uu, vv, uv));
  }
}


}  // namespace

// ---------------------------------------------------------------------------
// CMatrix

CMatrix::CMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, Complex{}) {}

CMatrix CMatrix::identity(std::size_t n) {
  CMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

CMatrix CMatrix::from_columns(std::span<const CVector> columns, std::size_t rows) {
  CMatrix m(rows, columns.size());
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j].size() != rows) {
      throw InvalidArgument(
          fmt::format("column {} has length {}, expected {}", j, columns[j].size(), rows));
    }
    for (std::size_t i = 0; i < rows; ++i) m(i, j) = columns[j][i];
  }
  return m;
}

CVector CMatrix::column(std::size_t j) const {
  CVector c(rows_);
  for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
  return c;
}

std::vector<CVector> CMatrix::columns() const {
  std::vector<CVector> out;
  out.reserve(cols_);
  for (std::size_t j = 0; j < cols_; ++j) out.push_back(column(j));
  return out;
}

CMatrix CMatrix::adjoint() const {
  CMatrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = std::conj((*this)(i, j));
  }
  return t;
}

CVector CMatrix::apply(std::span<const Complex> x) const {
  if (x.size() != cols_) {
    throw InvalidArgument(fmt::format("cannot apply {}x{} matrix to vector of length {}", rows_,
                                      cols_, x.size()));
  }
  CVector y(rows_);
  for (std::size_t i = 0; i < rows_; ++i) {
    Complex s{};
    for (std::size_t j = 0; j < cols_; ++j) s += (*this)(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

double CMatrix::frobenius_norm() const {
  double s = 0.0;
  for (const auto& z : data_) s += std::norm(z);
  return std::sqrt(s);
}

CMatrix operator*(const CMatrix& a, const CMatrix& b) {
  if (a.cols_ != b.rows_) {
    throw InvalidArgument(fmt::format("matrix product shape mismatch: {}x{} * {}x{}", a.rows_,
                                      a.cols_, b.rows_, b.cols_));
  }
  CMatrix c(a.rows_, b.cols_);
  for (std::size_t i = 0; i < a.rows_; ++i) {
    for (std::size_t k = 0; k < a.cols_; ++k) {
      const Complex aik = a(i, k);
      if (aik == Complex{}) continue;
      for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

CMatrix operator-(const CMatrix& a, const CMatrix& b) {
  if (a.rows_ != b.rows_ || a.cols_ != b.cols_) {
    throw InvalidArgument("matrix difference shape mismatch");
  }
  CMatrix c = a;
  for (std::size_t i = 0; i < c.data_.size(); ++i) c.data_[i] -= b.data_[i];
  return c;
}

HermitianMatrix::HermitianMatrix(CMatrix m, double rel_tol) : m_(std::move(m)) {
  if (m_.rows() != m_.cols()) {
    throw InvalidArgument(
        fmt::format("Hermitian matrix must be square, got {}x{}", m_.rows(), m_.cols()));
  }
  double scale = 0.0;
  double asym = 0.0;
  for (std::size_t i = 0; i < m_.rows(); ++i) {
    for (std::size_t j = 0; j < m_.cols(); ++j) {
      scale = std::max(scale, std::abs(m_(i, j)));
      asym = std::max(asym, std::abs(m_(i, j) - std::conj(m_(j, i))));
    }
  }
  if (asym > rel_tol * scale) {
    throw InvalidArgument(fmt::format(
        "matrix is not Hermitian: max|M - M*| = {:.3e} exceeds {:.1e} relative", asym, rel_tol));
  }
}

// ---------------------------------------------------------------------------
// Vector helpers

Complex inner(std::span<const Complex> x, std::span<const Complex> y) {
  require_same_length(x, y);
  Complex s{};
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * std::conj(y[i]);
  return s;
}

double norm(std::span<const Complex> x) {
  double s = 0.0;
  for (const auto& z : x) s += std::norm(z);
  return std::sqrt(s);
}

CVector add(std::span<const Complex> x, std::span<const Complex> y) {
  require_same_length(x, y);
  CVector z(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) z[i] = x[i] + y[i];
  return z;
}

CVector subtract(std::span<const Complex> x, std::span<const Complex> y) {
  require_same_length(x, y);
  CVector z(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) z[i] = x[i] - y[i];
  return z;
}

CVector scaled(std::span<const Complex> x, Complex c) {
  CVector z(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) z[i] = c * x[i];
  return z;
}

void axpy(Complex c, std::span<const Complex> x, std::span<Complex> y) {
  require_same_length(x, y);
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += c * x[i];
}

CVector basis_vector(std::size_t dim, std::size_t index0) {
  if (index0 >= dim) {
    throw InvalidArgument(fmt::format("basis index {} out of range for dimension {}", index0, dim));
  }
  CVector e(dim);
  e[index0] = 1.0;
  return e;
}

bool all_finite(std::span<const Complex> x) {
  return std::all_of(x.begin(), x.end(), [](const Complex& z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
  });
}

// ---------------------------------------------------------------------------
// Gram and frame operators

HermitianMatrix gram(std::span<const CVector> vectors) {
  if (vectors.empty()) throw InvalidArgument("empty system");
  const std::size_t n = vectors.size();
  CMatrix g(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = j; k < n; ++k) {
      const Complex v = inner(vectors[k], vectors[j]);
      g(j, k) = v;
      g(k, j) = std::conj(v);
    }
    g(j, j) = g(j, j).real();
  }
  return HermitianMatrix(std::move(g));
}

HermitianMatrix frame_operator(std::span<const CVector> vectors, std::size_t ambient) {
  if (vectors.empty()) throw InvalidArgument("empty system");
  CMatrix s(ambient, ambient);
  for (const auto& g : vectors) {
    if (g.size() != ambient) {
      throw InvalidArgument(
          fmt::format("vector of length {} in ambient dimension {}", g.size(), ambient));
    }
    for (std::size_t i = 0; i < ambient; ++i) {
      if (g[i] == Complex{}) continue;
      for (std::size_t j = 0; j < ambient; ++j) s(i, j) += g[i] * std::conj(g[j]);
    }
  }
  for (std::size_t i = 0; i < ambient; ++i) {
    s(i, i) = s(i, i).real();
    for (std::size_t j = i + 1; j < ambient; ++j) s(j, i) = std::conj(s(i, j));
  }
  return HermitianMatrix(std::move(s));
}

// ---------------------------------------------------------------------------
// Eigen and singular value decompositions

EigenDecomposition hermitian_eig(const HermitianMatrix& hm, double tol) {
  const std::size_t n = hm.order();
  CMatrix a = hm.matrix();
  for (std::size_t i = 0; i < n; ++i) {
    a(i, i) = a(i, i).real();
    for (std::size_t j = i + 1; j < n; ++j) {
      const Complex avg = 0.5 * (a(i, j) + std::conj(a(j, i)));
      a(i, j) = avg;
      a(j, i) = std::conj(avg);
    }
  }
  CMatrix v = CMatrix::identity(n);
  const double scale = a.frobenius_norm();

  if (scale > 0.0) {
    const double target = 1e-12 * scale;
    bool converged = false;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
      if (off_diagonal_norm(a) <= target) {
        converged = true;
        break;
      }
      for (std::size_t p = 0; p + 1 < n; ++p) {
        for (std::size_t q = p + 1; q < n; ++q) {
          const Complex g = a(p, q);
          if (std::abs(g) == 0.0) continue;
          const auto w = diagonalizing_rotation(a(p, p).real(), a(q, q).real(), g);
          rotate_columns(a, p, q, w);
          rotate_rows(a, p, q, w);
          a(p, q) = 0.0;
          a(q, p) = 0.0;
          a(p, p) = a(p, p).real();
          a(q, q) = a(q, q).real();
          rotate_columns(v, p, q, w);
        }
      }
    }
    if (!converged && off_diagonal_norm(a) > target) {
      throw NumericalError(fmt::format("Jacobi eigensolver did not converge in {} sweeps", kMaxSweeps));
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i).real() < a(j, j).real(); });

  EigenDecomposition out;
  out.eigenvalues.reserve(n);
  out.eigenvectors.reserve(n);
  for (std::size_t idx : order) {
    out.eigenvalues.push_back(a(idx, idx).real());
    out.eigenvectors.push_back(v.column(idx));
  }

  const CMatrix& m = hm.matrix();
  for (std::size_t i = 0; i < n; ++i) {
    CVector r = m.apply(out.eigenvectors[i]);
    axpy(-out.eigenvalues[i], out.eigenvectors[i], r);
    out.residual = std::max(out.residual, norm(r));
  }
  if (out.residual > tol * std::max(scale, 1e-300) && scale > 0.0) {
    throw NumericalError(fmt::format("eigen residual {:.3e} exceeds {:.1e} * ||M||", out.residual, tol));
  }
  return out;
}

EigenDecomposition hermitian_eig(const CMatrix& m, double tol) {
  return hermitian_eig(HermitianMatrix(m), tol);
}

std::vector<double> singular_values(const CMatrix& input) {
  // Work on whichever orientation has fewer columns; the nonzero spectrum is shared.
  const CMatrix a = input.cols() > input.rows() ? input.adjoint() : input;
  std::vector<CVector> cols = a.columns();
  const std::size_t n = cols.size();

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double alpha = 0.0;
        double beta = 0.0;
        Complex gamma{};
        for (std::size_t i = 0; i < cols[p].size(); ++i) {
          alpha += std::norm(cols[p][i]);
          beta += std::norm(cols[q][i]);
          gamma += std::conj(cols[p][i]) * cols[q][i];
        }
        if (std::abs(gamma) == 0.0 || std::abs(gamma) <= 1e-15 * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const auto w = diagonalizing_rotation(alpha, beta, gamma);
        for (std::size_t i = 0; i < cols[p].size(); ++i) {
          const Complex cp = cols[p][i];
          const Complex cq = cols[q][i];
          cols[p][i] = cp * w.w00 + cq * w.w10;
          cols[q][i] = cp * w.w01 + cq * w.w11;
        }
      }
    }
    if (!rotated) break;
  }

  std::vector<double> sv;
  sv.reserve(n);
  for (const auto& c : cols) sv.push_back(norm(c));
  std::sort(sv.begin(), sv.end(), std::greater<>());
  return sv;
}

std::size_t numerical_rank(const CMatrix& a, double rel_tol) {
  const auto sv = singular_values(a);
  if (sv.empty() || sv.front() == 0.0) return 0;
  const double threshold =
      static_cast<double>(std::max(a.rows(), a.cols())) * rel_tol * sv.front();
  return static_cast<std::size_t>(
      std::count_if(sv.begin(), sv.end(), [&](double s) { return s > threshold; }));
}

double operator_norm(const CMatrix& a) {
  const auto sv = singular_values(a);
  return sv.empty() ? 0.0 : sv.front();
}

CMatrix inverse(const CMatrix& input) {
  if (input.rows() != input.cols()) throw InvalidArgument("inverse of a non-square matrix");
  const std::size_t n = input.rows();
  CMatrix a = input;
  CMatrix inv = CMatrix::identity(n);
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) scale = std::max(scale, std::abs(a(i, j)));

  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
    }
    if (std::abs(a(pivot, col)) <= 1e-14 * scale * static_cast<double>(n)) {
      throw HypothesisError("matrix is numerically singular");
    }
    if (pivot != col) {
      for (std::size_t j = 0; j < n; ++j) {
        std::swap(a(pivot, j), a(col, j));
        std::swap(inv(pivot, j), inv(col, j));
      }
    }
    const Complex d = a(col, col);
    for (std::size_t j = 0; j < n; ++j) {
      a(col, j) /= d;
      inv(col, j) /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const Complex f = a(r, col);
      if (f == Complex{}) continue;
      for (std::size_t j = 0; j < n; ++j) {
        a(r, j) -= f * a(col, j);
        inv(r, j) -= f * inv(col, j);
      }
    }
  }
  return inv;
}

// ---------------------------------------------------------------------------
// Orthonormalization

Orthonormalized orthonormalize(std::span<const CVector> vectors, double tol) {
  Orthonormalized out;
  if (vectors.empty()) return out;
  const std::size_t dim = vectors.front().size();
  for (const auto& v : vectors) {
    if (v.size() != dim) throw InvalidArgument("orthonormalize: vectors of differing length");
    const double nv = norm(v);
    if (nv == 0.0) continue;
    CVector r = v;
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& q : out.ons) axpy(-inner(r, q), q, r);
    }
    const double nr = norm(r);
    if (nr <= tol * nv) continue;
    out.ons.push_back(scaled(r, 1.0 / nr));
  }
  out.rank = out.ons.size();
  return out;
}

std::vector<CVector> complement_basis(std::span<const CVector> ons, std::size_t ambient,
                                      double tol) {
  if (ons.size() > ambient) {
    throw InvalidArgument(fmt::format(
        "orthonormal system of {} vectors cannot live in dimension {}", ons.size(), ambient));
  }
  for (std::size_t i = 0; i < ons.size(); ++i) {
    if (ons[i].size() != ambient) {
      throw InvalidArgument(fmt::format("vector {} has length {}, expected {}", i, ons[i].size(),
                                        ambient));
    }
    for (std::size_t j = i; j < ons.size(); ++j) {
      const Complex expected = i == j ? 1.0 : 0.0;
      if (std::abs(inner(ons[i], ons[j]) - expected) > tol) {
        throw InvalidArgument(
            fmt::format("complement_basis: input is not orthonormal at pair ({}, {})", i, j));
      }
    }
  }

  // Residuals of the standard basis vectors; pick the largest one at each step.
  std::vector<CVector> residual(ambient);
  for (std::size_t j = 0; j < ambient; ++j) {
    residual[j] = basis_vector(ambient, j);
    for (const auto& q : ons) axpy(-std::conj(q[j]), q, residual[j]);
  }
  std::vector<bool> used(ambient, false);
  std::vector<CVector> out;
  const std::size_t need = ambient - ons.size();
  out.reserve(need);
  while (out.size() < need) {
    std::size_t best = ambient;
    double best_norm = -1.0;
    for (std::size_t j = 0; j < ambient; ++j) {
      if (used[j]) continue;
      const double nj = norm(residual[j]);
      if (nj > best_norm) {
        best_norm = nj;
        best = j;
      }
    }
    used[best] = true;
    CVector q = residual[best];
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& o : ons) axpy(-inner(q, o), o, q);
      for (const auto& o : out) axpy(-inner(q, o), o, q);
    }
    const double nq = norm(q);
    if (nq <= 1e-8) throw NumericalError("complement_basis: lost orthogonality");
    q = scaled(q, 1.0 / nq);
    for (std::size_t j = 0; j < ambient; ++j) {
      if (!used[j]) axpy(-inner(residual[j], q), q, residual[j]);
    }
    out.push_back(std::move(q));
  }
  return out;
}

CVector rotate_plane(std::span<const Complex> x, std::span<const Complex> u,
                     std::span<const Complex> v, double angle) {
  require_same_length(x, u);
  require_same_length(x, v);
  check_orthonormal_pair(u, v);
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  const Complex a = inner(x, u);
  const Complex b = inner(x, v);
  CVector out(x.begin(), x.end());
  axpy((c - 1.0) * a - s * b, u, out);
  axpy(s * a + (c - 1.0) * b, v, out);
  return out;
}

}  // namespace frameforge
