#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace psc {

using Vector = std::vector<double>;

// Row-major dense matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries);

  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return rows_ == 0 || cols_ == 0; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }

  const std::vector<double>& data() const noexcept { return data_; }
  std::vector<double>& data() noexcept { return data_; }

  void append_row(std::span<const double> values);
  Matrix transposed() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double frobenius_norm(const Matrix& m);
double max_abs(const Matrix& m);
Matrix multiply(const Matrix& a, const Matrix& b);
// a * b^T without forming the transpose.
Matrix multiply_abt(const Matrix& a, const Matrix& b);
Vector multiply(const Matrix& a, std::span<const double> x);
Vector multiply_transposed(const Matrix& a, std::span<const double> y);

// Flip the row so its largest-magnitude entry (lowest index on ties) is
// positive. Zero rows are left alone.
void apply_sign_convention(std::span<double> row);

// k x D matrix with orthonormal rows. Construction checks
// ||R R^T - I||_max <= 1e-6.
class OrthonormalRows {
 public:
  explicit OrthonormalRows(std::size_t dim = 0);
  explicit OrthonormalRows(Matrix rows);

  std::size_t count() const noexcept { return rows_.rows(); }
  std::size_t dim() const noexcept { return dim_; }
  const Matrix& matrix() const noexcept { return rows_; }
  std::span<const double> row(std::size_t i) const { return rows_.row(i); }

  // H x
  Vector apply(std::span<const double> x) const;
  // H^T y
  Vector apply_transposed(std::span<const double> y) const;

  void append(const OrthonormalRows& more);
  OrthonormalRows prefix(std::size_t k) const;

  friend bool operator==(const OrthonormalRows&, const OrthonormalRows&) = default;

 private:
  std::size_t dim_ = 0;
  Matrix rows_;
};

double orthonormality_error(const Matrix& rows);

struct EigenDecomposition {
  Vector values;   // descending
  Matrix vectors;  // row i pairs with values[i]
};

// Cyclic Jacobi, fixed sweep order (p < q, row-major). Stops when the
// off-diagonal Frobenius norm is <= 1e-12 ||S||_F or after 100 sweeps.
// Ties in eigenvalue keep the original index order.
EigenDecomposition sym_eig_desc(const Matrix& s);

struct TruncatedSvd {
  Matrix right_vectors;  // rank x D, descending singular value
  Vector singular_values;
};

// Up to r right singular vectors whose singular value exceeds
// 1e-9 ||A||_F, computed from the eigendecomposition of the s x s Gram
// matrix A A^T. Never throws on rank loss; returns fewer rows instead.
TruncatedSvd truncated_right_singular_vectors(const Matrix& a, std::size_t r);

// As above but requires all r; throws RankDeficient otherwise.
OrthonormalRows top_r_right_singular_vectors(const Matrix& a, std::size_t r);

// Gram-Schmidt (two passes) of each candidate against h and the rows
// accepted so far. Rows with residual norm below 1e-8 are replaced by the
// first canonical basis vector e_j (ascending j) whose residual is at
// least 1e-3.
OrthonormalRows orthonormalize_against(const Matrix& candidates,
                                       const OrthonormalRows& h);

Vector project_complement(std::span<const double> v, const OrthonormalRows& h);

}  // namespace psc
