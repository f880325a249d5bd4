#pragma once

// Witness construction for the upper bound on s_n(A).
//
// Columns X_1..X_n of A, H_1 = span(X_2..X_n), P_1 the orthogonal projection
// onto H_1. The witness x = X_1 - P_1 X_1 has |x| = dist(X_1, H_1), and
// |A^{-1} x|^2 >= sum_{k>=2} (a_k / b_k)^2 with
//   a_k = |<Y_k / |Y_k|, X_1>|,  Y_k = P_1 X_k^*,  b_k = dist(X_k, H_{1,k}).
// Every function takes a `column` argument (0-based) naming the distinguished
// column; the remaining columns keep their relative order.
//
// audit() builds one orthonormal basis per k to get b_k independently of the
// inverse, so it costs O(n^4).

#include <cstddef>
#include <string>
#include <vector>

#include "lsv/ensembles.hpp"
#include "lsv/linalg.hpp"

namespace lsv {

inline constexpr double kDegenerateThreshold = 1e-12;

/// A with `column` moved to the front.
Matrix distinguish_column(const Matrix& a, std::size_t column);

Vector construct_witness_vector(const Matrix& a, std::size_t column = 0);

/// Y_k = P_1 X_k^* for every non-distinguished k, in column order.
std::vector<Vector> dual_projections(const Matrix& a, std::size_t column = 0);

struct AbDecomposition {
  std::vector<double> a;
  std::vector<double> b;
  std::vector<double> dual_projection_norms;  // |Y_k|
};

/// Throws DegenerateGeometry when some |Y_k| or b_k is at most 1e-12.
AbDecomposition compute_ab(const Matrix& a, std::size_t column = 0);

struct Violation {
  std::string check;
  double value = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct WitnessReport {
  std::size_t n = 0;
  std::size_t column = 0;  // 0-based distinguished column
  Vector x;
  double norm_x = 0.0;
  double ainv_x_norm = 0.0;
  std::vector<double> a;
  std::vector<double> b;
  double ratio_sum_sq = 0.0;
  double s_n = 0.0;
  double implied_bound = 0.0;
  std::vector<Violation> violations;

  bool ok() const noexcept { return violations.empty(); }
};

/// Tolerances applied by audit().
struct AuditTolerances {
  double ratio_sum = 1e-8;          // |A^{-1}x|^2 >= sum (a_k/b_k)^2 - tol (1 + sum)
  double implied_bound = 1e-8;      // s_n <= bound (1 + tol)
  double norm_x = 1e-8;             // |x| |X_1^*| = 1
  double kernel = 1e-9;             // |P_1 X_1^*| <= tol |X_1^*|
  double witness_orthogonality = 1e-9;  // |<x, X_k>| <= tol |X_1| |X_k|
  double biorthogonality = 1e-8;    // |<Y_j, X_k> - delta_jk|
  double norm_distance = 1e-6;      // |Y_k| b_k = 1
};

/// Full report. Numerical identities that fail are recorded in
/// `violations`; SingularMatrix and DegenerateGeometry propagate.
WitnessReport audit(const Matrix& a, std::size_t column = 0, const AuditTolerances& tol = {});

/// O(n^3) subset of the audit: s_n <= |x| / |A^{-1}x| only.
struct ImpliedBoundCheck {
  double s_n = 0.0;
  double implied_bound = 0.0;
  bool holds = false;
};
ImpliedBoundCheck check_implied_bound(const Matrix& a, double s_n, double tol = 1e-8);

inline constexpr int kMaxResampleDraws = 64;

struct IndependenceReport {
  std::size_t trials_requested = 0;
  std::size_t trials_run = 0;
  std::size_t singular_skipped = 0;
  double max_deviation = 0.0;
  double tolerance = 1e-9;
  bool passed() const noexcept { return trials_run == trials_requested && max_deviation <= tolerance; }
};

/// Keeps every column of `a` except `column`, redraws the distinguished
/// column from `ensemble` on streams seed.stream_index + t, and measures how
/// far each Y_k moves from its first-trial value. Singular redraws are
/// skipped and replaced by the next stream, up to 64 draws per trial.
IndependenceReport independence_probe(const Matrix& a, Ensemble ensemble, std::size_t trials,
                                      SeedSpec seed, std::size_t column = 0, double tolerance = 1e-9);

}  // namespace lsv
