#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

namespace hbvm {

using Vector = std::vector<double>;

/// Row-major dense real matrix. Intended for the small operators that
/// appear in the methods (s x s coefficient blocks, d x d Jacobians, and
/// the occasional (s*d) x (s*d) Newton matrix).
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);

  static Matrix identity(std::size_t n);
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool is_square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * cols_, cols_};
  }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  Matrix transpose() const;
  double norm_inf() const noexcept;
  bool all_finite() const noexcept;

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double alpha) noexcept;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(double alpha, Matrix a);

/// y = A x
void multiply(const Matrix& a, std::span<const double> x, std::span<double> y);
Vector operator*(const Matrix& a, std::span<const double> x);

/// Dense Kronecker product S (x) G. Only used for the simplified-Newton
/// matrix and by tests; the iterative solvers go through kron_apply.
Matrix kron(const Matrix& s, const Matrix& g);

double norm_inf(std::span<const double> v) noexcept;
bool all_finite(std::span<const double> v) noexcept;

/// s blocks of dimension d stored contiguously; block j occupies
/// [j*d, (j+1)*d).
class BlockVector {
 public:
  BlockVector() = default;
  BlockVector(std::size_t blocks, std::size_t dim, double fill = 0.0)
      : blocks_(blocks), dim_(dim), data_(blocks * dim, fill) {}
  BlockVector(std::size_t blocks, std::size_t dim, Vector data);

  std::size_t blocks() const noexcept { return blocks_; }
  std::size_t block_dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<double> block(std::size_t j) noexcept { return {data_.data() + j * dim_, dim_}; }
  std::span<const double> block(std::size_t j) const noexcept {
    return {data_.data() + j * dim_, dim_};
  }

  double& operator()(std::size_t j, std::size_t i) noexcept { return data_[j * dim_ + i]; }
  double operator()(std::size_t j, std::size_t i) const noexcept { return data_[j * dim_ + i]; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  const Vector& values() const noexcept { return data_; }

  void fill(double value) noexcept;
  bool same_shape(const BlockVector& other) const noexcept {
    return blocks_ == other.blocks_ && dim_ == other.dim_;
  }

  double norm_inf() const noexcept { return hbvm::norm_inf(data_); }
  bool all_finite() const noexcept { return hbvm::all_finite(data_); }

  BlockVector& operator+=(const BlockVector& other);
  BlockVector& operator-=(const BlockVector& other);
  BlockVector& operator*=(double alpha) noexcept;

  friend bool operator==(const BlockVector&, const BlockVector&) = default;

 private:
  std::size_t blocks_ = 0;
  std::size_t dim_ = 0;
  Vector data_;
};

BlockVector operator+(BlockVector a, const BlockVector& b);
BlockVector operator-(BlockVector a, const BlockVector& b);
BlockVector operator*(double alpha, BlockVector a);

/// Partial-pivoting LU of a square matrix. A pivot smaller than
/// `pivot_threshold * max|M_ij|` marks the factor singular; solving with a
/// singular factor throws instead of returning garbage.
class LUFactor {
 public:
  static constexpr double pivot_threshold = 1e-14;

  LUFactor() = default;
  explicit LUFactor(const Matrix& m);

  bool singular() const noexcept { return singular_; }
  std::size_t dim() const noexcept { return lu_.rows(); }

  void solve_in_place(std::span<double> rhs) const;
  Vector solve(std::span<const double> rhs) const;

 private:
  Matrix lu_;
  std::vector<std::size_t> perm_;
  bool singular_ = true;
};

LUFactor lu_factor(const Matrix& m);

/// Matrix-free operator out = G x on d-vectors.
using LinearOperator = std::function<void(std::span<const double> x, std::span<double> out)>;

/// (S (x) G) v computed block-wise: out_i = sum_j S_ij (G v_j).
BlockVector kron_apply(const Matrix& s, const Matrix& g, const BlockVector& v);
BlockVector kron_apply(const Matrix& s, const LinearOperator& g, const BlockVector& v);

/// (S (x) I_d) v.
BlockVector kron_scalar_apply(const Matrix& s, const BlockVector& v);

}  // namespace hbvm
