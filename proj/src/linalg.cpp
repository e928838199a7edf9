#include "element/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>

#include "element/error.hpp"

namespace element {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.front().size();
  Matrix m(r, c);
  for (std::size_t i = 0; i < r; ++i) {
    if (rows[i].size() != c) fail(ErrorKind::invalid_argument, "ragged matrix rows");
    for (std::size_t j = 0; j < c; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

double Matrix::trace() const {
  double t = 0.0;
  for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
  return t;
}

double Matrix::frobenius_norm() const {
  double s = 0.0;
  for (double x : data_) s += x * x;
  return std::sqrt(s);
}

double Matrix::asymmetry() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = i + 1; j < cols_; ++j)
      worst = std::max(worst, std::abs((*this)(i, j) - (*this)(j, i)));
  return worst;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols_ != b.rows_) fail(ErrorKind::invalid_argument, "matrix product shape mismatch");
  Matrix out(a.rows_, b.cols_);
  for (std::size_t i = 0; i < a.rows_; ++i) {
    double* out_row = out.data_.data() + i * out.cols_;
    for (std::size_t k = 0; k < a.cols_; ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      const double* b_row = b.data_.data() + k * b.cols_;
      for (std::size_t j = 0; j < b.cols_; ++j) out_row[j] += aik * b_row[j];
    }
  }
  return out;
}

namespace {

double off_diagonal_norm(const Matrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

}  // namespace

std::vector<double> symmetric_eigenvalues(const Matrix& m, EigenSolver solver) {
  if (!m.square()) fail(ErrorKind::invalid_argument, "eigenvalues need a square matrix");
  if (m.asymmetry() > 1e-10) {
    fail(ErrorKind::invalid_argument,
         "matrix is not symmetric (max asymmetry " + std::to_string(m.asymmetry()) + ")");
  }
  const std::size_t n = m.rows();
  Matrix a = m;
  // Work on the exactly symmetric part so rotations keep symmetry.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) a(i, j) = a(j, i) = 0.5 * (m(i, j) + m(j, i));

  if (solver == EigenSolver::tridiagonal) {
    if (n == 0) return {};
    const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> view(
        a.data().data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(view, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) fail(ErrorKind::numerical_failure, "tridiagonal eigensolver did not converge");
    std::vector<double> d(es.eigenvalues().data(), es.eigenvalues().data() + n);
    std::sort(d.begin(), d.end(), std::greater<>());
    return d;
  }

  const double tolerance = 1e-12 * a.frobenius_norm();
  constexpr int kMaxSweeps = 100;
  bool converged = off_diagonal_norm(a) <= tolerance;
  for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double app = a(p, p);
        const double aqq = a(q, q);
        // Rotation angle chosen to annihilate a(p,q); numerically stable form.
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = a(p, k) = c * akp - s * akq;
          a(k, q) = a(q, k) = s * akp + c * akq;
        }
        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = a(q, p) = 0.0;
      }
    }
    converged = off_diagonal_norm(a) <= tolerance;
  }
  if (!converged) {
    fail(ErrorKind::numerical_failure, "Jacobi eigenvalue iteration did not converge in " +
                                           std::to_string(kMaxSweeps) + " sweeps");
  }
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = a(i, i);
  std::sort(values.begin(), values.end(), std::greater<>());
  return values;
}

}  // namespace element
