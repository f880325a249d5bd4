#pragma once

// Arithmetic structure of directions: least common denominator (LCD) and
// small-ball probabilities of weighted sums.
//
//   LCD_{alpha,gamma}(a) = inf { theta > 0 : dist(theta a, Z^n) < min(gamma |theta a|, alpha) }
//
// lcd_vector scans theta on a uniform grid, then bisects the first admissible
// cell. Since theta -> dist(theta a, Z^n) is |a|-Lipschitz, admissible
// intervals wider than the grid step are never missed.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lsv/ensembles.hpp"
#include "lsv/linalg.hpp"
#include "lsv/stats.hpp"

namespace lsv {

struct LatticeDistance {
  double distance = 0.0;
  std::vector<std::int64_t> nearest;  // rounded half away from zero
};

LatticeDistance dist_to_lattice(std::span<const double> v);

struct LcdQuery {
  double alpha = 10.0;
  double gamma = 0.5;
  double theta_max = 1e4;
  double grid_step = 0.0;  // 0 selects min(gamma, 0.1) / (4 |a|)

  /// gamma = 0.5, alpha = sqrt(n)/2, theta_max = 1e4, automatic grid.
  static LcdQuery defaults(std::size_t n);
  /// Throws InvalidQuery unless gamma in (0,1) and alpha, theta_max > 0, grid_step >= 0.
  void validate() const;
  double step_for(double norm_a) const;
};

struct LcdResult {
  std::optional<double> theta_star;  // nullopt: no admissible theta up to theta_max
  double achieved_dist = 0.0;
  std::vector<std::int64_t> certificate;
  double slack = 0.0;  // final bisection width
  double grid_step = 0.0;
  std::size_t samples = 1;
  Vector direction;  // the vector whose LCD was reported

  bool bounded() const noexcept { return theta_star.has_value(); }
};

LcdResult lcd_vector(std::span<const double> a, const LcdQuery& q);

/// Minimum of lcd_vector over `samples` uniformly random unit vectors of the
/// subspace, an upper-bound estimate of the subspace LCD. Sample s uses
/// Gaussian coefficients from stream seed.stream_index + s.
LcdResult lcd_subspace_sampled(const OrthonormalBasis& basis, const LcdQuery& q, std::size_t samples,
                               SeedSpec seed, unsigned workers = 1);

struct SmallBallEstimate {
  double epsilon = 0.0;
  std::size_t trials = 0;
  std::size_t hits = 0;
  double p_hat = 0.0;
  Interval ci;
};

/// Frequency of |sum_i w_i xi_i| <= epsilon, xi drawn from stream
/// seed.stream_index + t on trial t. Weights must have unit norm within 1e-10.
SmallBallEstimate small_ball_estimate(std::span<const double> weights, Ensemble ensemble, double epsilon,
                                      std::size_t trials, SeedSpec seed, unsigned workers = 1);

}  // namespace lsv
