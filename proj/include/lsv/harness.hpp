#pragma once

// Seeded Monte Carlo experiments on s_n(A).
//
// Trial t at dimension n draws its matrix from stream t; when the LU pivot
// test declares the draw singular, attempt r >= 1 uses stream t + (r << 40).
// All K thresholds at a given n are scored on the same draws, so tail counts
// are exactly monotone in K. Results never depend on the worker count.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lsv/ensembles.hpp"
#include "lsv/stats.hpp"

namespace lsv {

enum class TailDirection { upper, lower };

std::string_view to_string(TailDirection d) noexcept;
std::optional<TailDirection> parse_direction(std::string_view s);

/// Stream for attempt `attempt` of trial `trial`: trial + (attempt << 40).
SeedSpec trial_stream(std::uint64_t master_seed, std::size_t trial, int attempt) noexcept;
inline constexpr int kMaxResampleAttempts = 64;

struct TailSweepConfig {
  Ensemble ensemble;
  std::vector<std::size_t> n_values;
  std::vector<double> k_values;  // K for upper, epsilon for lower
  std::size_t trials = 2000;
  std::uint64_t master_seed = 0;
  TailDirection direction = TailDirection::upper;
  unsigned workers = 0;
  /// Every `witness_stride`-th trial also checks s_n <= |x| / |A^{-1}x|; 0 disables.
  std::size_t witness_stride = 100;
};

struct TailEstimate {
  Ensemble ensemble;
  std::size_t n = 0;
  double k = 0.0;
  TailDirection direction = TailDirection::upper;
  std::size_t trials = 0;  // scored trials
  std::size_t exceed_count = 0;
  double p_hat = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t singular_count = 0;  // resampled degenerate draws
  std::uint64_t master_seed = 0;
  std::size_t failed_count = 0;  // trials that never produced a nonsingular draw
  /// Upper-tail K below 2 lies outside the range the bound is stated for.
  bool outside_theorem_range = false;

  double ci_width() const noexcept { return ci_high - ci_low; }
};

struct TailSweepResult {
  std::vector<TailEstimate> estimates;  // sorted by (n, K)
  std::size_t witness_checked = 0;
  std::size_t witness_violations = 0;
};

/// Throws InvalidDimension for n < 2 and std::invalid_argument for empty
/// lists or zero trials.
TailSweepResult run_tail_sweep(const TailSweepConfig& cfg);

/// Header plus one row per estimate, "\n" line endings, 10 significant digits.
std::string tail_csv(std::span<const TailEstimate> estimates);
inline constexpr std::string_view kTailCsvHeader =
    "ensemble,n,K,direction,trials,exceed_count,p_hat,ci_low,ci_high,singular_count,master_seed";

struct SingularValueSample {
  std::vector<double> values;  // s_n per scored trial, in trial order
  std::size_t singular_count = 0;
  std::size_t failed_count = 0;
};

SingularValueSample sample_smallest_singular_values(Ensemble ensemble, std::size_t n, std::size_t trials,
                                                    std::uint64_t master_seed, unsigned workers = 0);

struct ScalingRow {
  std::size_t n = 0;
  std::size_t trials = 0;
  double median = 0.0;  // of sqrt(n) s_n
  double q1 = 0.0;
  double q3 = 0.0;
  std::size_t singular_count = 0;

  double iqr() const noexcept { return q3 - q1; }
};

std::vector<ScalingRow> median_scaling_report(Ensemble ensemble, std::span<const std::size_t> n_values,
                                              std::size_t trials, std::uint64_t master_seed,
                                              unsigned workers = 0);

struct DistanceTailReport {
  Ensemble ensemble;
  std::size_t n = 0;
  std::vector<double> samples;  // dist(X_1, H_1) per trial
  std::vector<double> thresholds;
  std::vector<double> exceed_probability;
  std::vector<double> half_normal_reference;  // P(|N(0,1)| > u)
  double ks_half_normal = 0.0;
  std::size_t singular_count = 0;
};

DistanceTailReport distance_tail_experiment(Ensemble ensemble, std::size_t n, std::size_t trials,
                                            std::uint64_t master_seed, unsigned workers = 0);

/// Finite law on nonnegative values.
struct FiniteDistribution {
  std::vector<double> values;
  std::vector<double> probabilities;
};

struct MarkovSumBound {
  double lhs = 0.0;  // P(mean of Z_1..Z_n <= eps)
  double rhs = 0.0;  // (2/n) sum_k P(Z_k <= 2 eps)
  bool holds = false;
};

/// Exact enumeration over support^n outcomes for i.i.d. Z_k. Throws
/// EnumerationTooLarge beyond 10^6 outcomes.
MarkovSumBound check_markov_sum_bound(const FiniteDistribution& dist, std::size_t n, double epsilon);

struct TailFit {
  TailDirection direction = TailDirection::upper;
  std::size_t n = 0;
  double constant = 0.0;  // C in C log(K)/K (upper) or C eps (lower)
  std::vector<double> k;
  std::vector<double> p_hat;
  std::vector<double> model;
  std::vector<double> residuals;
  double rms_residual = 0.0;

  double predict(double k_value) const;
};

/// Least-squares fit through the origin. The c^n term is dropped: it is
/// below Monte Carlo resolution at desk-scale n, and c is not identifiable.
/// Upper fits use estimates with K > 1. Throws InsufficientData with fewer
/// than three distinct usable K, or when estimates mix n or direction.
TailFit fit_tail_model(std::span<const TailEstimate> estimates);

}  // namespace lsv
