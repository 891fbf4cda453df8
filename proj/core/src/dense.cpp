#include "hbvm/dense.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <utility>

namespace hbvm {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  Matrix m(r, c);
  std::size_t i = 0;
  for (const auto& row : rows) {
    if (row.size() != c) throw std::invalid_argument("Matrix::from_rows: ragged rows");
    std::copy(row.begin(), row.end(), m.row(i++).begin());
  }
  return m;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

double Matrix::norm_inf() const noexcept {
  double best = 0.0;
  for (std::size_t i = 0; i < rows_; ++i) {
    double sum = 0.0;
    for (double x : row(i)) sum += std::abs(x);
    best = std::max(best, sum);
  }
  return best;
}

bool Matrix::all_finite() const noexcept { return hbvm::all_finite(data_); }

Matrix& Matrix::operator+=(const Matrix& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_)
    throw std::invalid_argument("Matrix +=: dimension mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_)
    throw std::invalid_argument("Matrix -=: dimension mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Matrix& Matrix::operator*=(double alpha) noexcept {
  for (double& x : data_) x *= alpha;
  return *this;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("Matrix product: dimension mismatch");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t l = 0; l < a.cols(); ++l) {
      const double ail = a(i, l);
      if (ail == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += ail * b(l, j);
    }
  return c;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(double alpha, Matrix a) { return a *= alpha; }

void multiply(const Matrix& a, std::span<const double> x, std::span<double> y) {
  if (a.cols() != x.size() || a.rows() != y.size())
    throw std::invalid_argument("multiply: dimension mismatch");
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto r = a.row(i);
    y[i] = std::inner_product(r.begin(), r.end(), x.begin(), 0.0);
  }
}

Vector operator*(const Matrix& a, std::span<const double> x) {
  Vector y(a.rows());
  multiply(a, x, y);
  return y;
}

Matrix kron(const Matrix& s, const Matrix& g) {
  Matrix k(s.rows() * g.rows(), s.cols() * g.cols());
  for (std::size_t i = 0; i < s.rows(); ++i)
    for (std::size_t j = 0; j < s.cols(); ++j)
      for (std::size_t a = 0; a < g.rows(); ++a)
        for (std::size_t b = 0; b < g.cols(); ++b)
          k(i * g.rows() + a, j * g.cols() + b) = s(i, j) * g(a, b);
  return k;
}

double norm_inf(std::span<const double> v) noexcept {
  double best = 0.0;
  for (double x : v) {
    const double ax = std::abs(x);
    // propagate NaN so callers comparing against a tolerance see failure
    if (std::isnan(ax)) return ax;
    best = std::max(best, ax);
  }
  return best;
}

bool all_finite(std::span<const double> v) noexcept {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

BlockVector::BlockVector(std::size_t blocks, std::size_t dim, Vector data)
    : blocks_(blocks), dim_(dim), data_(std::move(data)) {
  if (data_.size() != blocks_ * dim_)
    throw std::invalid_argument("BlockVector: data length is not blocks*dim");
}

void BlockVector::fill(double value) noexcept { std::fill(data_.begin(), data_.end(), value); }

BlockVector& BlockVector::operator+=(const BlockVector& other) {
  if (!same_shape(other)) throw std::invalid_argument("BlockVector +=: shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

BlockVector& BlockVector::operator-=(const BlockVector& other) {
  if (!same_shape(other)) throw std::invalid_argument("BlockVector -=: shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

BlockVector& BlockVector::operator*=(double alpha) noexcept {
  for (double& x : data_) x *= alpha;
  return *this;
}

BlockVector operator+(BlockVector a, const BlockVector& b) { return a += b; }
BlockVector operator-(BlockVector a, const BlockVector& b) { return a -= b; }
BlockVector operator*(double alpha, BlockVector a) { return a *= alpha; }

LUFactor::LUFactor(const Matrix& m) : lu_(m), perm_(m.rows()) {
  if (!m.is_square()) throw std::invalid_argument("lu_factor: matrix is not square");
  if (!m.all_finite()) throw std::invalid_argument("lu_factor: matrix has non-finite entries");

  const std::size_t n = m.rows();
  std::iota(perm_.begin(), perm_.end(), std::size_t{0});

  double scale = 0.0;
  for (double x : m.data()) scale = std::max(scale, std::abs(x));
  const double tiny = pivot_threshold * scale;
  singular_ = (n > 0 && scale == 0.0);

  for (std::size_t col = 0; col < n && !singular_; ++col) {
    std::size_t piv = col;
    double best = std::abs(lu_(col, col));
    for (std::size_t r = col + 1; r < n; ++r) {
      const double v = std::abs(lu_(r, col));
      if (v > best) {
        best = v;
        piv = r;
      }
    }
    if (best <= tiny) {
      singular_ = true;
      break;
    }
    if (piv != col) {
      std::swap_ranges(lu_.row(col).begin(), lu_.row(col).end(), lu_.row(piv).begin());
      std::swap(perm_[col], perm_[piv]);
    }
    const double inv = 1.0 / lu_(col, col);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = (lu_(r, col) *= inv);
      if (f == 0.0) continue;
      for (std::size_t c = col + 1; c < n; ++c) lu_(r, c) -= f * lu_(col, c);
    }
  }
}

void LUFactor::solve_in_place(std::span<double> rhs) const {
  if (singular_) throw std::logic_error("LUFactor::solve: matrix is singular");
  const std::size_t n = lu_.rows();
  if (rhs.size() != n) throw std::invalid_argument("LUFactor::solve: dimension mismatch");

  Vector x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = rhs[perm_[i]];
  for (std::size_t i = 1; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) x[i] -= lu_(i, j) * x[j];
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = i + 1; j < n; ++j) x[i] -= lu_(i, j) * x[j];
    x[i] /= lu_(i, i);
  }
  std::copy(x.begin(), x.end(), rhs.begin());
}

Vector LUFactor::solve(std::span<const double> rhs) const {
  Vector x(rhs.begin(), rhs.end());
  solve_in_place(x);
  return x;
}

LUFactor lu_factor(const Matrix& m) { return LUFactor(m); }

namespace {

void check_kron_shapes(const Matrix& s, std::size_t g_dim, const BlockVector& v) {
  if (!s.is_square() || s.rows() != v.blocks())
    throw std::invalid_argument("kron_apply: S must be blocks x blocks");
  if (g_dim != v.block_dim()) throw std::invalid_argument("kron_apply: G does not match block dim");
}

BlockVector combine_blocks(const Matrix& s, const BlockVector& w) {
  BlockVector out(w.blocks(), w.block_dim());
  const std::size_t d = w.block_dim();
  for (std::size_t i = 0; i < s.rows(); ++i) {
    auto oi = out.block(i);
    for (std::size_t j = 0; j < s.cols(); ++j) {
      const double sij = s(i, j);
      if (sij == 0.0) continue;
      const auto wj = w.block(j);
      for (std::size_t a = 0; a < d; ++a) oi[a] += sij * wj[a];
    }
  }
  return out;
}

}  // namespace

BlockVector kron_apply(const Matrix& s, const Matrix& g, const BlockVector& v) {
  if (!g.is_square()) throw std::invalid_argument("kron_apply: G must be square");
  check_kron_shapes(s, g.rows(), v);
  BlockVector gv(v.blocks(), v.block_dim());
  for (std::size_t j = 0; j < v.blocks(); ++j) multiply(g, v.block(j), gv.block(j));
  return combine_blocks(s, gv);
}

BlockVector kron_apply(const Matrix& s, const LinearOperator& g, const BlockVector& v) {
  check_kron_shapes(s, v.block_dim(), v);
  BlockVector gv(v.blocks(), v.block_dim());
  for (std::size_t j = 0; j < v.blocks(); ++j) g(v.block(j), gv.block(j));
  return combine_blocks(s, gv);
}

BlockVector kron_scalar_apply(const Matrix& s, const BlockVector& v) {
  check_kron_shapes(s, v.block_dim(), v);
  return combine_blocks(s, v);
}

}  // namespace hbvm
