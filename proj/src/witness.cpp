#include "lsv/witness.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace lsv {

namespace {

void require_square(const Matrix& a, std::size_t column) {
  if (!a.is_square()) throw NonSquare("witness: matrix is not square");
  if (a.rows() < 2) throw InvalidDimension("witness: n must be at least 2");
  if (column >= a.cols()) throw InvalidDimension("witness: distinguished column out of range");
}

OrthonormalBasis first_column_complement(const Matrix& p) {
  try {
    return span_of_other_columns(p, 0);
  } catch (const NumericallyDependent& e) {
    throw DegenerateGeometry(std::string("witness: H_1 basis failed: ") + e.what());
  }
}

// Everything derived from A once the distinguished column sits at index 0.
struct Pieces {
  Matrix p;
  LuDecomposition lu;
  OrthonormalBasis h1;
  Matrix inv;

  explicit Pieces(const Matrix& permuted)
      : p(permuted), lu(permuted), h1(first_column_complement(permuted)), inv(lu.inverse()) {}

  Vector dual(std::size_t k) const {
    auto r = inv.row(k);
    return Vector(r.begin(), r.end());
  }

  std::vector<Vector> dual_projections() const {
    std::vector<Vector> y;
    y.reserve(p.cols() - 1);
    for (std::size_t k = 1; k < p.cols(); ++k) y.push_back(project_onto(h1, dual(k)));
    return y;
  }

  AbDecomposition ab(const std::vector<Vector>& y) const {
    const Vector x1 = p.column(0);
    AbDecomposition out;
    for (std::size_t k = 1; k < p.cols(); ++k) {
      const Vector& yk = y[k - 1];
      const double yn = norm2(yk);
      if (!(yn > kDegenerateThreshold))
        throw DegenerateGeometry("witness: |Y_" + std::to_string(k + 1) + "| below threshold");
      double bk = 0.0;
      try {
        bk = dist_to_subspace(p.column(k), span_of_other_columns(p, 0, k));
      } catch (const NumericallyDependent&) {
        throw DegenerateGeometry("witness: H_{1," + std::to_string(k + 1) + "} basis failed");
      }
      if (!(bk > kDegenerateThreshold))
        throw DegenerateGeometry("witness: b_" + std::to_string(k + 1) + " below threshold");
      out.a.push_back(std::abs(dot(yk, x1)) / yn);
      out.b.push_back(bk);
      out.dual_projection_norms.push_back(yn);
    }
    return out;
  }
};

void check(std::vector<Violation>& out, bool ok, const char* name, double value, double tolerance,
           std::string detail = {}) {
  if (!ok) out.push_back({name, value, tolerance, std::move(detail)});
}

}  // namespace

Matrix distinguish_column(const Matrix& a, std::size_t column) {
  if (column >= a.cols()) throw InvalidDimension("distinguish_column: column out of range");
  Matrix p(a.rows(), a.cols());
  p.set_column(0, a.column(column));
  std::size_t dst = 1;
  for (std::size_t j = 0; j < a.cols(); ++j)
    if (j != column) p.set_column(dst++, a.column(j));
  return p;
}

Vector construct_witness_vector(const Matrix& a, std::size_t column) {
  require_square(a, column);
  const Matrix p = distinguish_column(a, column);
  LuDecomposition lu(p);  // SingularMatrix propagates
  return orthogonal_residual(first_column_complement(p), p.column(0));
}

std::vector<Vector> dual_projections(const Matrix& a, std::size_t column) {
  require_square(a, column);
  return Pieces(distinguish_column(a, column)).dual_projections();
}

AbDecomposition compute_ab(const Matrix& a, std::size_t column) {
  require_square(a, column);
  Pieces pieces(distinguish_column(a, column));
  return pieces.ab(pieces.dual_projections());
}

WitnessReport audit(const Matrix& a, std::size_t column, const AuditTolerances& tol) {
  require_square(a, column);
  const std::size_t n = a.rows();
  Pieces pc(distinguish_column(a, column));
  WitnessReport r;
  r.n = n;
  r.column = column;

  const Vector x1 = pc.p.column(0);
  r.x = orthogonal_residual(pc.h1, x1);
  r.norm_x = norm2(r.x);
  r.ainv_x_norm = norm2(pc.lu.solve(r.x));

  const auto y = pc.dual_projections();
  const auto ab = pc.ab(y);
  r.a = ab.a;
  r.b = ab.b;
  for (std::size_t i = 0; i < r.a.size(); ++i) r.ratio_sum_sq += (r.a[i] / r.b[i]) * (r.a[i] / r.b[i]);

  r.s_n = smallest_singular_value(pc.lu, pc.p);
  r.implied_bound = r.norm_x / r.ainv_x_norm;

  auto& v = r.violations;
  const double x1_norm = norm2(x1);
  for (std::size_t k = 1; k < n; ++k) {
    const Vector xk = pc.p.column(k);
    const double res = std::abs(dot(r.x, xk));
    const double limit = tol.witness_orthogonality * x1_norm * norm2(xk);
    check(v, res <= limit, "witness_orthogonality", res, limit, "column " + std::to_string(k + 1));
  }

  const Vector dual1 = pc.dual(0);
  const double dual1_norm = norm2(dual1);
  const double kernel = norm2(project_onto(pc.h1, dual1));
  check(v, kernel <= tol.kernel * dual1_norm, "kernel_identity", kernel, tol.kernel * dual1_norm);

  const double nx = std::abs(r.norm_x * dual1_norm - 1.0);
  check(v, nx <= tol.norm_x, "norm_x_equals_distance", nx, tol.norm_x);

  double biorth = 0.0;
  for (std::size_t j = 1; j < n; ++j)
    for (std::size_t k = 1; k < n; ++k)
      biorth = std::max(biorth, std::abs(dot(y[j - 1], pc.p.column(k)) - (j == k ? 1.0 : 0.0)));
  check(v, biorth <= tol.biorthogonality, "restricted_biorthogonality", biorth, tol.biorthogonality);

  for (std::size_t i = 0; i < ab.b.size(); ++i) {
    const double e = std::abs(ab.dual_projection_norms[i] * ab.b[i] - 1.0);
    check(v, e <= tol.norm_distance, "dual_norm_times_distance", e, tol.norm_distance,
          "column " + std::to_string(i + 2));
  }

  const double lhs = r.ainv_x_norm * r.ainv_x_norm;
  const double slack = tol.ratio_sum * (1.0 + r.ratio_sum_sq);
  check(v, lhs >= r.ratio_sum_sq - slack, "inverse_norm_lower_bound", r.ratio_sum_sq - lhs, slack);

  check(v, r.s_n <= r.implied_bound * (1.0 + tol.implied_bound), "implied_bound", r.s_n - r.implied_bound,
        r.implied_bound * tol.implied_bound);
  return r;
}

ImpliedBoundCheck check_implied_bound(const Matrix& a, double s_n, double tol) {
  require_square(a, 0);
  LuDecomposition lu(a);
  const Vector x = orthogonal_residual(first_column_complement(a), a.column(0));
  ImpliedBoundCheck out;
  out.s_n = s_n;
  out.implied_bound = norm2(x) / norm2(lu.solve(x));
  out.holds = s_n <= out.implied_bound * (1.0 + tol);
  return out;
}

IndependenceReport independence_probe(const Matrix& a, Ensemble ensemble, std::size_t trials,
                                      SeedSpec seed, std::size_t column, double tolerance) {
  require_square(a, column);
  const std::size_t n = a.rows();
  IndependenceReport rep;
  rep.trials_requested = trials;
  rep.tolerance = tolerance;
  std::optional<std::vector<Vector>> reference;
  const std::size_t max_draws = trials * static_cast<std::size_t>(kMaxResampleDraws);
  for (std::size_t t = 0; rep.trials_run < trials && t < max_draws; ++t) {
    Matrix m = a;
    m.set_column(column, sample_vector(ensemble, n, {seed.master_seed, seed.stream_index + t}));
    std::vector<Vector> y;
    try {
      y = dual_projections(m, column);
    } catch (const SingularMatrix&) {
      ++rep.singular_skipped;
      continue;
    } catch (const DegenerateGeometry&) {
      ++rep.singular_skipped;
      continue;
    }
    ++rep.trials_run;
    if (!reference) {
      reference = std::move(y);
      continue;
    }
    for (std::size_t k = 0; k < y.size(); ++k)
      for (std::size_t i = 0; i < n; ++i)
        rep.max_deviation = std::max(rep.max_deviation, std::abs(y[k][i] - (*reference)[k][i]));
  }
  return rep;
}

}  // namespace lsv
