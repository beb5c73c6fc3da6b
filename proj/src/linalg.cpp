#include "psc/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "psc/error.hpp"

namespace psc {
namespace {

constexpr double kOrthonormalTol = 1e-6;
constexpr double kJacobiRelTol = 1e-12;
constexpr int kJacobiMaxSweeps = 100;
constexpr double kRankRelTol = 1e-9;
constexpr double kResidualFloor = 1e-8;
constexpr double kFallbackResidual = 1e-3;

void subtract_projection(std::span<double> v, std::span<const double> unit) {
  const double c = dot(v, unit);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c * unit[i];
}

// Two Gram-Schmidt passes of v against every row of a and b.
void deflate_twice(std::span<double> v, const Matrix& a, const Matrix& b) {
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t i = 0; i < a.rows(); ++i) subtract_projection(v, a.row(i));
    for (std::size_t i = 0; i < b.rows(); ++i) subtract_projection(v, b.row(i));
  }
}

void scale(std::span<double> v, double factor) {
  for (double& x : v) x *= factor;
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (data_.size() != rows * cols) {
    fail(ErrorCode::kShapeMismatch, "matrix entries " + std::to_string(data_.size()) +
                                        " != " + std::to_string(rows) + "x" +
                                        std::to_string(cols));
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

void Matrix::append_row(std::span<const double> values) {
  if (rows_ == 0 && cols_ == 0) cols_ = values.size();
  if (values.size() != cols_) fail(ErrorCode::kShapeMismatch, "append_row width");
  data_.insert(data_.end(), values.begin(), values.end());
  ++rows_;
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double frobenius_norm(const Matrix& m) { return norm2(m.data()); }

double max_abs(const Matrix& m) {
  double best = 0.0;
  for (double x : m.data()) best = std::max(best, std::abs(x));
  return best;
}

Matrix multiply(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) fail(ErrorCode::kShapeMismatch, "multiply");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

Matrix multiply_abt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) fail(ErrorCode::kShapeMismatch, "multiply_abt");
  Matrix c(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.rows(); ++j) c(i, j) = dot(a.row(i), b.row(j));
  return c;
}

Vector multiply(const Matrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) fail(ErrorCode::kShapeMismatch, "matrix-vector");
  Vector y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) y[i] = dot(a.row(i), x);
  return y;
}

Vector multiply_transposed(const Matrix& a, std::span<const double> y) {
  if (a.rows() != y.size()) fail(ErrorCode::kShapeMismatch, "transposed matrix-vector");
  Vector x(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto r = a.row(i);
    for (std::size_t j = 0; j < x.size(); ++j) x[j] += y[i] * r[j];
  }
  return x;
}

void apply_sign_convention(std::span<double> row) {
  std::size_t arg = 0;
  double best = -1.0;
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (std::abs(row[j]) > best) {
      best = std::abs(row[j]);
      arg = j;
    }
  }
  if (best > 0.0 && row[arg] < 0.0) scale(row, -1.0);
}

double orthonormality_error(const Matrix& rows) {
  double err = 0.0;
  for (std::size_t i = 0; i < rows.rows(); ++i)
    for (std::size_t j = i; j < rows.rows(); ++j) {
      const double target = i == j ? 1.0 : 0.0;
      err = std::max(err, std::abs(dot(rows.row(i), rows.row(j)) - target));
    }
  return err;
}

OrthonormalRows::OrthonormalRows(std::size_t dim) : dim_(dim), rows_(0, dim) {}

OrthonormalRows::OrthonormalRows(Matrix rows) : dim_(rows.cols()), rows_(std::move(rows)) {
  const double err = orthonormality_error(rows_);
  if (!(err <= kOrthonormalTol)) {
    fail(ErrorCode::kConfigInvalid,
         "rows are not orthonormal (error " + std::to_string(err) + ")");
  }
}

Vector OrthonormalRows::apply(std::span<const double> x) const {
  if (x.size() != dim_) fail(ErrorCode::kShapeMismatch, "H x dimension");
  return multiply(rows_, x);
}

Vector OrthonormalRows::apply_transposed(std::span<const double> y) const {
  if (y.size() != count()) fail(ErrorCode::kShapeMismatch, "H^T y dimension");
  Vector x(dim_, 0.0);
  for (std::size_t i = 0; i < count(); ++i) {
    const auto r = rows_.row(i);
    for (std::size_t j = 0; j < dim_; ++j) x[j] += y[i] * r[j];
  }
  return x;
}

void OrthonormalRows::append(const OrthonormalRows& more) {
  if (more.dim() != dim_) fail(ErrorCode::kShapeMismatch, "append dimension");
  for (std::size_t i = 0; i < more.count(); ++i) {
    for (std::size_t j = 0; j < count(); ++j) {
      if (std::abs(dot(more.row(i), rows_.row(j))) > kOrthonormalTol)
        fail(ErrorCode::kConfigInvalid, "appended row not orthogonal to existing rows");
    }
  }
  for (std::size_t i = 0; i < more.count(); ++i) rows_.append_row(more.row(i));
}

OrthonormalRows OrthonormalRows::prefix(std::size_t k) const {
  if (k > count()) fail(ErrorCode::kShapeMismatch, "prefix longer than transform");
  OrthonormalRows out(dim_);
  out.rows_ = Matrix(k, dim_,
                     std::vector<double>(rows_.data().begin(),
                                         rows_.data().begin() + static_cast<std::ptrdiff_t>(k * dim_)));
  return out;
}

EigenDecomposition sym_eig_desc(const Matrix& s) {
  const std::size_t n = s.rows();
  if (s.cols() != n) fail(ErrorCode::kShapeMismatch, "sym_eig_desc needs a square matrix");
  const double scale_max = max_abs(s);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(s(i, j) - s(j, i)) > 1e-8 * scale_max)
        fail(ErrorCode::kNotSymmetric, "asymmetry at (" + std::to_string(i) + "," +
                                           std::to_string(j) + ")");

  Matrix a = s;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) a(j, i) = a(i, j);
  Matrix v = Matrix::identity(n);  // columns are eigenvectors
  const double threshold = kJacobiRelTol * frobenius_norm(a);

  auto off_norm = [&] {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) acc += 2.0 * a(i, j) * a(i, j);
    return std::sqrt(acc);
  };

  for (int sweep = 0; sweep < kJacobiMaxSweeps && off_norm() > threshold; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - sn * vkq;
          v(k, q) = sn * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

  EigenDecomposition out{Vector(n), Matrix(n, n)};
  for (std::size_t r = 0; r < n; ++r) {
    out.values[r] = a(order[r], order[r]);
    auto dst = out.vectors.row(r);
    for (std::size_t k = 0; k < n; ++k) dst[k] = v(k, order[r]);
    apply_sign_convention(dst);
  }
  return out;
}

TruncatedSvd truncated_right_singular_vectors(const Matrix& a, std::size_t r) {
  if (r > std::min(a.rows(), a.cols()))
    fail(ErrorCode::kDimensionExhausted, "r exceeds min(s, D)");
  const double tau = kRankRelTol * frobenius_norm(a);
  const EigenDecomposition gram = sym_eig_desc(multiply_abt(a, a));

  TruncatedSvd out{Matrix(0, a.cols()), {}};
  for (std::size_t i = 0; i < r; ++i) {
    const double sigma = std::sqrt(std::max(gram.values[i], 0.0));
    if (!(sigma > tau) || sigma == 0.0) break;
    // v = A^T u / sigma, then re-orthogonalize against earlier rows since the
    // Gram route loses accuracy for small singular values.
    Vector v = multiply_transposed(a, gram.vectors.row(i));
    scale(v, 1.0 / sigma);
    deflate_twice(v, out.right_vectors, Matrix(0, a.cols()));
    const double len = norm2(v);
    if (len < kResidualFloor) break;
    scale(v, 1.0 / len);
    // Gram eigenvalues carry absolute error ~eps * sigma_max^2, so a spurious
    // direction can report sigma ~1e-8 sigma_max. ||A v|| exposes it.
    const double achieved = norm2(multiply(a, v));
    if (!(achieved > tau)) break;
    apply_sign_convention(v);
    out.right_vectors.append_row(v);
    out.singular_values.push_back(achieved);
  }
  return out;
}

OrthonormalRows top_r_right_singular_vectors(const Matrix& a, std::size_t r) {
  TruncatedSvd svd = truncated_right_singular_vectors(a, r);
  if (svd.right_vectors.rows() < r) {
    fail(ErrorCode::kRankDeficient,
         "only " + std::to_string(svd.right_vectors.rows()) + " of " +
             std::to_string(r) + " singular values exceed the rank threshold");
  }
  return OrthonormalRows(std::move(svd.right_vectors));
}

OrthonormalRows orthonormalize_against(const Matrix& candidates,
                                       const OrthonormalRows& h) {
  const std::size_t dim = h.dim();
  if (candidates.rows() > 0 && candidates.cols() != dim)
    fail(ErrorCode::kShapeMismatch, "candidate width");
  if (h.count() + candidates.rows() > dim)
    fail(ErrorCode::kDimensionExhausted,
         std::to_string(h.count()) + " + " + std::to_string(candidates.rows()) +
             " rows exceed dimension " + std::to_string(dim));

  Matrix accepted(0, dim);
  Vector v(dim);
  for (std::size_t i = 0; i < candidates.rows(); ++i) {
    const auto c = candidates.row(i);
    std::copy(c.begin(), c.end(), v.begin());
    deflate_twice(v, h.matrix(), accepted);
    double len = norm2(v);
    if (!(len >= kResidualFloor)) {
      bool found = false;
      for (std::size_t j = 0; j < dim && !found; ++j) {
        std::fill(v.begin(), v.end(), 0.0);
        v[j] = 1.0;
        deflate_twice(v, h.matrix(), accepted);
        len = norm2(v);
        found = len >= kFallbackResidual;
      }
      if (!found) fail(ErrorCode::kDimensionExhausted, "no canonical fallback row left");
    }
    scale(v, 1.0 / len);
    apply_sign_convention(v);
    accepted.append_row(v);
  }
  return OrthonormalRows(std::move(accepted));
}

Vector project_complement(std::span<const double> v, const OrthonormalRows& h) {
  if (v.size() != h.dim()) fail(ErrorCode::kShapeMismatch, "project_complement");
  Vector out(v.begin(), v.end());
  const Vector coeffs = h.apply(v);
  for (std::size_t i = 0; i < h.count(); ++i) {
    const auto r = h.row(i);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] -= coeffs[i] * r[j];
  }
  return out;
}

}  // namespace psc
