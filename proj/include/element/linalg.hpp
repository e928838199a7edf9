#pragma once

#include <cstddef>
#include <vector>

namespace element {

/// Dense row-major matrix, just enough for Gram matrices and their powers.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);
  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  const std::vector<double>& data() const { return data_; }

  double trace() const;
  double frobenius_norm() const;
  /// Largest |m(i,j) - m(j,i)|.
  double asymmetry() const;

  friend Matrix operator*(const Matrix& a, const Matrix& b);
  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

enum class EigenSolver {
  /// Cyclic Jacobi rotations until the off-diagonal Frobenius norm drops
  /// below 1e-12 * ||m||_F; numerical-failure after 100 sweeps.
  jacobi,
  /// Eigen's SelfAdjointEigenSolver: Householder tridiagonalization, then
  /// implicit symmetric QR. O(n^3) once instead of per sweep.
  tridiagonal,
};

/// All eigenvalues of a symmetric matrix, sorted descending.
/// Throws invalid-argument if m is not square or not symmetric within 1e-10.
std::vector<double> symmetric_eigenvalues(const Matrix& m, EigenSolver solver = EigenSolver::jacobi);

}  // namespace element
