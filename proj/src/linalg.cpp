#include "lsv/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace lsv {

double dot(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw DimensionMismatch("dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
  return s;
}

double norm2(std::span<const double> v) {
  // Scaled accumulation keeps tiny and huge entries from under/overflowing.
  double scale = 0.0, ssq = 1.0;
  for (double x : v) {
    if (x == 0.0) continue;
    double ax = std::abs(x);
    if (scale < ax) {
      ssq = 1.0 + ssq * (scale / ax) * (scale / ax);
      scale = ax;
    } else {
      ssq += (ax / scale) * (ax / scale);
    }
  }
  return scale * std::sqrt(ssq);
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) throw DimensionMismatch("axpy: length mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

Vector subtract(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw DimensionMismatch("subtract: length mismatch");
  Vector r(u.begin(), u.end());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= v[i];
  return r;
}

Vector scaled(double alpha, std::span<const double> v) {
  Vector r(v.begin(), v.end());
  for (double& x : r) x *= alpha;
  return r;
}

Vector unit_vector(std::size_t dim, std::size_t k) {
  Vector e(dim, 0.0);
  e.at(k) = 1.0;
  return e;
}

// ---------------------------------------------------------------------------
// Matrix

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {
  if (!std::isfinite(fill)) throw std::invalid_argument("Matrix: non-finite fill value");
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> row_major)
    : rows_(rows), cols_(cols), data_(std::move(row_major)) {
  if (data_.size() != rows * cols)
    throw std::invalid_argument("Matrix: expected " + std::to_string(rows * cols) +
                                " entries, got " + std::to_string(data_.size()));
  for (double x : data_)
    if (!std::isfinite(x)) throw std::invalid_argument("Matrix: non-finite entry");
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> d) {
  Matrix m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw std::invalid_argument("Matrix::from_rows: ragged rows");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Matrix(r, c, std::move(data));
}

Matrix Matrix::from_columns(std::span<const Vector> columns) {
  const std::size_t c = columns.size();
  const std::size_t r = c == 0 ? 0 : columns[0].size();
  std::vector<double> data(r * c);
  for (std::size_t j = 0; j < c; ++j) {
    if (columns[j].size() != r) throw std::invalid_argument("Matrix::from_columns: ragged columns");
    for (std::size_t i = 0; i < r; ++i) data[i * c + j] = columns[j][i];
  }
  return Matrix(r, c, std::move(data));
}

Vector Matrix::column(std::size_t j) const {
  Vector v(rows_);
  for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
  return v;
}

void Matrix::set_column(std::size_t j, std::span<const double> v) {
  if (v.size() != rows_) throw DimensionMismatch("set_column: length mismatch");
  for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = v[i];
}

std::vector<Vector> Matrix::columns() const {
  std::vector<Vector> out;
  out.reserve(cols_);
  for (std::size_t j = 0; j < cols_; ++j) out.push_back(column(j));
  return out;
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

double Matrix::frobenius_norm() const { return norm2(data_); }

Vector operator*(const Matrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) throw DimensionMismatch("matrix-vector product: size mismatch");
  Vector y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) y[i] = dot(a.row(i), x);
  return y;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw DimensionMismatch("matrix product: size mismatch");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto ci = c.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) axpy(a(i, k), b.row(k), ci);
  }
  return c;
}

// ---------------------------------------------------------------------------
// LU

LuDecomposition::LuDecomposition(const Matrix& a) : lu_(a), perm_(a.rows()) {
  if (!a.is_square()) throw NonSquare("LU: matrix is not square");
  const std::size_t n = a.rows();
  std::iota(perm_.begin(), perm_.end(), std::size_t{0});

  double max_col_norm = 0.0;
  for (std::size_t j = 0; j < n; ++j) max_col_norm = std::max(max_col_norm, norm2(a.column(j)));
  const double threshold = kPivotTolerance * max_col_norm;

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    double best = std::abs(lu_(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::abs(lu_(i, k)) > best) {
        best = std::abs(lu_(i, k));
        p = i;
      }
    }
    if (!(best > threshold) || best == 0.0)
      throw SingularMatrix("LU: pivot " + std::to_string(k) + " below threshold");
    if (p != k) {
      std::swap_ranges(lu_.row(k).begin(), lu_.row(k).end(), lu_.row(p).begin());
      std::swap(perm_[k], perm_[p]);
    }
    const double pivot = lu_(k, k);
    auto rk = lu_.row(k).subspan(k + 1);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double l = lu_(i, k) / pivot;
      lu_(i, k) = l;
      if (l != 0.0) axpy(-l, rk, lu_.row(i).subspan(k + 1));
    }
  }
}

Vector LuDecomposition::solve(std::span<const double> b) const {
  const std::size_t n = size();
  if (b.size() != n) throw DimensionMismatch("LU solve: rhs length mismatch");
  Vector y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = b[perm_[i]];
  for (std::size_t i = 0; i < n; ++i) {
    auto r = lu_.row(i);
    double s = y[i];
    for (std::size_t j = 0; j < i; ++j) s -= r[j] * y[j];
    y[i] = s;
  }
  for (std::size_t i = n; i-- > 0;) {
    auto r = lu_.row(i);
    double s = y[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= r[j] * y[j];
    y[i] = s / r[i];
  }
  return y;
}

Vector LuDecomposition::solve_transposed(std::span<const double> b) const {
  // A^T = U^T L^T P, so solve U^T y = b, then L^T w = y, then x = P^T w.
  const std::size_t n = size();
  if (b.size() != n) throw DimensionMismatch("LU solve: rhs length mismatch");
  Vector y(b.begin(), b.end());
  for (std::size_t i = 0; i < n; ++i) {
    y[i] /= lu_(i, i);
    const double yi = y[i];
    auto r = lu_.row(i);
    for (std::size_t j = i + 1; j < n; ++j) y[j] -= r[j] * yi;
  }
  for (std::size_t i = n; i-- > 0;) {
    const double yi = y[i];
    auto r = lu_.row(i);
    for (std::size_t j = 0; j < i; ++j) y[j] -= r[j] * yi;
  }
  Vector x(n);
  for (std::size_t i = 0; i < n; ++i) x[perm_[i]] = y[i];
  return x;
}

Matrix LuDecomposition::inverse() const {
  const std::size_t n = size();
  Matrix inv(n, n);
  for (std::size_t j = 0; j < n; ++j) inv.set_column(j, solve(unit_vector(n, j)));
  return inv;
}

Vector lu_solve(const Matrix& a, std::span<const double> b) {
  return LuDecomposition(a).solve(b);
}

// ---------------------------------------------------------------------------
// Singular values

Vector singular_values(const Matrix& a) {
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  std::vector<Vector> cols = a.columns();
  constexpr double kEps = 1e-15;
  constexpr int kMaxSweeps = 80;

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t r = 0; r < m; ++r) {
          alpha += cols[i][r] * cols[i][r];
          beta += cols[j][r] * cols[j][r];
          gamma += cols[i][r] * cols[j][r];
        }
        if (gamma == 0.0 || std::abs(gamma) <= kEps * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t r = 0; r < m; ++r) {
          const double xi = cols[i][r];
          const double xj = cols[j][r];
          cols[i][r] = c * xi - s * xj;
          cols[j][r] = s * xi + c * xj;
        }
      }
    }
    if (!rotated) break;
  }

  Vector sv(n);
  for (std::size_t j = 0; j < n; ++j) sv[j] = norm2(cols[j]);
  std::sort(sv.begin(), sv.end(), std::greater<>());
  if (m < n) sv.resize(m);
  return sv;
}

namespace {

// Returns 1/s_n^2 estimate, or a negative value when iteration did not settle.
double inverse_iteration(const LuDecomposition& lu) {
  const std::size_t n = lu.size();
  Vector y(n);
  // Deterministic start with no special alignment to coordinate axes.
  for (std::size_t i = 0; i < n; ++i) y[i] = 1.0 + std::fmod(0.6180339887498949 * double(i + 1), 1.0);
  const double y0 = norm2(y);
  for (double& v : y) v /= y0;

  constexpr int kMaxIterations = 3000;
  constexpr double kRayleighTolerance = 1e-12;
  double prev_lambda = 0.0;
  double prev_delta = 0.0;
  for (int it = 1; it <= kMaxIterations; ++it) {
    Vector z = lu.solve(y);
    const double lambda = dot(z, z);  // Rayleigh quotient of (A^T A)^{-1} at unit y
    Vector w = lu.solve_transposed(z);
    const double wn = norm2(w);
    if (!(wn > 0.0) || !std::isfinite(wn)) return -1.0;
    for (std::size_t i = 0; i < n; ++i) y[i] = w[i] / wn;

    const double delta = lambda - prev_lambda;
    if (it >= 2) {
      if (std::abs(delta) <= 1e-15 * lambda) return lambda;
      if (delta > 0.0 && prev_delta > 0.0) {
        // Geometric extrapolation of the remaining Rayleigh-quotient gap.
        const double rho = delta / prev_delta;
        if (rho < 1.0) {
          const double remaining = delta * rho / (1.0 - rho);
          if (remaining <= kRayleighTolerance * lambda && delta <= 1e-8 * lambda) return lambda;
        }
      }
    }
    prev_delta = delta;
    prev_lambda = lambda;
  }
  return -1.0;
}

}  // namespace

double smallest_singular_value(const LuDecomposition& lu, const Matrix& a) {
  const double lambda = inverse_iteration(lu);
  if (lambda > 0.0) return 1.0 / std::sqrt(lambda);
  return singular_values(a).back();
}

double smallest_singular_value(const Matrix& a) {
  if (!a.is_square()) throw NonSquare("smallest_singular_value: matrix is not square");
  try {
    LuDecomposition lu(a);
    return smallest_singular_value(lu, a);
  } catch (const SingularMatrix&) {
    return 0.0;
  }
}

// ---------------------------------------------------------------------------
// Orthonormal bases and projections

OrthonormalBasis::OrthonormalBasis(std::size_t ambient_dim, std::vector<Vector> vectors)
    : ambient_dim_(ambient_dim), vectors_(std::move(vectors)) {
  for (std::size_t i = 0; i < vectors_.size(); ++i) {
    if (vectors_[i].size() != ambient_dim_)
      throw DimensionMismatch("OrthonormalBasis: vector " + std::to_string(i) + " has wrong dimension");
    for (std::size_t j = 0; j <= i; ++j) {
      const double expected = i == j ? 1.0 : 0.0;
      if (std::abs(dot(vectors_[i], vectors_[j]) - expected) > kOrthonormalityTolerance)
        throw std::invalid_argument("OrthonormalBasis: vectors are not orthonormal");
    }
  }
}

OrthonormalBasis orthonormalize(std::span<const Vector> vectors, std::size_t ambient_dim) {
  constexpr double kDependenceTolerance = 1e-12;
  std::vector<Vector> q;
  q.reserve(vectors.size());
  for (std::size_t k = 0; k < vectors.size(); ++k) {
    if (vectors[k].size() != ambient_dim)
      throw DimensionMismatch("orthonormalize: vector " + std::to_string(k) + " has wrong dimension");
    Vector r = vectors[k];
    const double input_norm = norm2(r);
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& qi : q) axpy(-dot(qi, r), qi, r);
    const double rn = norm2(r);
    if (!(rn > kDependenceTolerance * input_norm) || input_norm == 0.0)
      throw NumericallyDependent(k, "orthonormalize: vector " + std::to_string(k) +
                                        " is numerically dependent on its predecessors");
    for (double& x : r) x /= rn;
    q.push_back(std::move(r));
  }
  return OrthonormalBasis(ambient_dim, std::move(q), OrthonormalBasis::Unchecked{});
}

OrthonormalBasis orthonormalize(std::span<const Vector> vectors) {
  if (vectors.empty()) throw InvalidDimension("orthonormalize: empty list needs an ambient dimension");
  return orthonormalize(vectors, vectors[0].size());
}

Vector project_onto(const OrthonormalBasis& basis, std::span<const double> v) {
  if (v.size() != basis.ambient_dim()) throw DimensionMismatch("project_onto: dimension mismatch");
  Vector p(v.size(), 0.0);
  for (const auto& q : basis.vectors()) axpy(dot(q, v), q, p);
  return p;
}

Vector orthogonal_residual(const OrthonormalBasis& basis, std::span<const double> v) {
  if (v.size() != basis.ambient_dim()) throw DimensionMismatch("orthogonal_residual: dimension mismatch");
  Vector r(v.begin(), v.end());
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& q : basis.vectors()) axpy(-dot(q, r), q, r);
  return r;
}

double dist_to_subspace(std::span<const double> v, const OrthonormalBasis& basis) {
  return norm2(orthogonal_residual(basis, v));
}

OrthonormalBasis span_of_other_columns(const Matrix& a, std::size_t skip, std::size_t skip2) {
  std::vector<Vector> cols;
  cols.reserve(a.cols());
  for (std::size_t j = 0; j < a.cols(); ++j)
    if (j != skip && j != skip2) cols.push_back(a.column(j));
  return orthonormalize(cols, a.rows());
}

// ---------------------------------------------------------------------------
// Biorthogonal systems

BiorthogonalityAudit BiorthogonalSystem::audit() const {
  BiorthogonalityAudit out;
  const std::size_t n = primal.size();
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < n; ++k) {
      const double expected = j == k ? 1.0 : 0.0;
      out.max_biorthogonality_error =
          std::max(out.max_biorthogonality_error, std::abs(dot(dual[j], primal[k]) - expected));
    }
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<Vector> others;
    others.reserve(n - 1);
    for (std::size_t i = 0; i < n; ++i)
      if (i != k) others.push_back(primal[i]);
    const double d = dist_to_subspace(primal[k], orthonormalize(others, ambient_dim));
    out.max_norm_distance_error = std::max(out.max_norm_distance_error, std::abs(norm2(dual[k]) * d - 1.0));
  }
  return out;
}

bool BiorthogonalSystem::holds() const {
  const auto a = audit();
  return a.max_biorthogonality_error <= kBiorthogonalityTolerance &&
         a.max_norm_distance_error <= kNormDistanceTolerance;
}

BiorthogonalSystem dual_basis(const Matrix& a) {
  if (!a.is_square()) throw NonSquare("dual_basis: matrix is not square");
  const Matrix inv = LuDecomposition(a).inverse();
  BiorthogonalSystem sys;
  sys.ambient_dim = a.rows();
  sys.primal = a.columns();
  sys.dual.reserve(a.rows());
  for (std::size_t k = 0; k < a.rows(); ++k) {
    auto r = inv.row(k);
    sys.dual.emplace_back(r.begin(), r.end());
  }
  return sys;
}

}  // namespace lsv
