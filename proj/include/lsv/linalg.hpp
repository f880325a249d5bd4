#pragma once

// Dense real linear algebra for square matrices of moderate size (n <= 512):
// LU with partial pivoting, smallest singular value, Gram-Schmidt bases,
// orthogonal projections and biorthogonal dual systems.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "lsv/error.hpp"

namespace lsv {

using Vector = std::vector<double>;

double dot(std::span<const double> u, std::span<const double> v);
double norm2(std::span<const double> v);
/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
Vector subtract(std::span<const double> u, std::span<const double> v);
Vector scaled(double alpha, std::span<const double> v);
Vector unit_vector(std::size_t dim, std::size_t k);

/// Dense matrix stored row-major. All entries are finite.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  /// Throws std::invalid_argument on size mismatch or non-finite entries.
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> row_major);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> d);
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  /// Every column must have the same length.
  static Matrix from_columns(std::span<const Vector> columns);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool is_square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  Vector column(std::size_t j) const;
  void set_column(std::size_t j, std::span<const double> v);
  std::vector<Vector> columns() const;

  std::span<const double> data() const noexcept { return data_; }

  Matrix transposed() const;
  double frobenius_norm() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Vector operator*(const Matrix& a, std::span<const double> x);
Matrix operator*(const Matrix& a, const Matrix& b);

/// PA = LU with partial pivoting. Construction throws SingularMatrix when a
/// pivot magnitude drops below 1e-13 times the largest column norm of A.
class LuDecomposition {
 public:
  static constexpr double kPivotTolerance = 1e-13;

  explicit LuDecomposition(const Matrix& a);

  std::size_t size() const noexcept { return lu_.rows(); }
  Vector solve(std::span<const double> b) const;
  /// Solves A^T x = b.
  Vector solve_transposed(std::span<const double> b) const;
  Matrix inverse() const;

 private:
  Matrix lu_;
  std::vector<std::size_t> perm_;  // row i of PA is row perm_[i] of A
};

Vector lu_solve(const Matrix& a, std::span<const double> b);

/// s_n(A) = min over unit x of |Ax|, computed by inverse iteration on A^T A
/// through the LU factors. Falls back to one-sided Jacobi when inverse
/// iteration stalls. Returns 0 when A fails the LU pivot test.
double smallest_singular_value(const Matrix& a);
double smallest_singular_value(const LuDecomposition& lu, const Matrix& a);

/// All singular values in non-increasing order (one-sided Jacobi).
Vector singular_values(const Matrix& a);

class OrthonormalBasis {
 public:
  static constexpr double kOrthonormalityTolerance = 1e-10;

  explicit OrthonormalBasis(std::size_t ambient_dim) : ambient_dim_(ambient_dim) {}
  /// Validates unit length and pairwise orthogonality within 1e-10.
  OrthonormalBasis(std::size_t ambient_dim, std::vector<Vector> vectors);

  std::size_t ambient_dim() const noexcept { return ambient_dim_; }
  std::size_t size() const noexcept { return vectors_.size(); }
  bool empty() const noexcept { return vectors_.empty(); }
  const std::vector<Vector>& vectors() const noexcept { return vectors_; }
  const Vector& operator[](std::size_t i) const { return vectors_[i]; }

 private:
  friend OrthonormalBasis orthonormalize(std::span<const Vector>, std::size_t);
  struct Unchecked {};
  OrthonormalBasis(std::size_t ambient_dim, std::vector<Vector> vectors, Unchecked)
      : ambient_dim_(ambient_dim), vectors_(std::move(vectors)) {}

  std::size_t ambient_dim_;
  std::vector<Vector> vectors_;
};

/// Gram-Schmidt with a full second orthogonalization pass. Throws
/// NumericallyDependent when a residual drops below 1e-12 of the input norm.
OrthonormalBasis orthonormalize(std::span<const Vector> vectors, std::size_t ambient_dim);
OrthonormalBasis orthonormalize(std::span<const Vector> vectors);

Vector project_onto(const OrthonormalBasis& basis, std::span<const double> v);
/// v - Pv, projected out twice so the residual stays orthogonal to the basis
/// even when it is small compared to v.
Vector orthogonal_residual(const OrthonormalBasis& basis, std::span<const double> v);
double dist_to_subspace(std::span<const double> v, const OrthonormalBasis& basis);

/// Basis of span of all columns of `a` except `skip` (and `skip2` when set).
OrthonormalBasis span_of_other_columns(const Matrix& a, std::size_t skip,
                                       std::size_t skip2 = static_cast<std::size_t>(-1));

struct BiorthogonalityAudit {
  double max_biorthogonality_error = 0.0;  // max |<dual_j, primal_k> - delta_jk|
  double max_norm_distance_error = 0.0;    // max |‖dual_k‖ dist(primal_k, H_k) - 1|
};

struct BiorthogonalSystem {
  static constexpr double kBiorthogonalityTolerance = 1e-8;
  static constexpr double kNormDistanceTolerance = 1e-6;

  std::vector<Vector> primal;
  std::vector<Vector> dual;
  std::size_t ambient_dim = 0;

  BiorthogonalityAudit audit() const;
  bool holds() const;
};

/// primal[k] = A e_k, dual[k] = (A^{-1})^T e_k.
BiorthogonalSystem dual_basis(const Matrix& a);

}  // namespace lsv
