#include "lsv/harness.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "lsv/linalg.hpp"
#include "lsv/parallel.hpp"
#include "lsv/serialize.hpp"
#include "lsv/witness.hpp"

namespace lsv {

std::string_view to_string(TailDirection d) noexcept {
  return d == TailDirection::upper ? "upper" : "lower";
}

std::optional<TailDirection> parse_direction(std::string_view s) {
  if (s == "upper") return TailDirection::upper;
  if (s == "lower") return TailDirection::lower;
  return std::nullopt;
}

SeedSpec trial_stream(std::uint64_t master_seed, std::size_t trial, int attempt) noexcept {
  constexpr int kResampleShift = 40;
  return {master_seed, static_cast<std::uint64_t>(trial) + (static_cast<std::uint64_t>(attempt) << kResampleShift)};
}

namespace {

constexpr int kMaxAttempts = kMaxResampleAttempts;

struct Draw {
  double s_n = 0.0;
  std::size_t resamples = 0;
  bool failed = true;
  bool witness_checked = false;
  bool witness_ok = true;
};

Draw draw_trial(Ensemble ensemble, std::size_t n, std::uint64_t master_seed, std::size_t trial,
                bool witness) {
  Draw d;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    const Matrix a = sample_matrix(ensemble, n, trial_stream(master_seed, trial, attempt));
    try {
      LuDecomposition lu(a);
      d.s_n = smallest_singular_value(lu, a);
      d.failed = false;
      if (witness) {
        d.witness_checked = true;
        try {
          d.witness_ok = check_implied_bound(a, d.s_n).holds;
        } catch (const Error&) {
          d.witness_ok = false;
        }
      }
      return d;
    } catch (const SingularMatrix&) {
      ++d.resamples;
    }
  }
  return d;
}

void require_n(std::size_t n) {
  if (n < 2) throw InvalidDimension("harness: n must be at least 2");
}

}  // namespace

SingularValueSample sample_smallest_singular_values(Ensemble ensemble, std::size_t n, std::size_t trials,
                                                    std::uint64_t master_seed, unsigned workers) {
  require_n(n);
  std::vector<Draw> draws(trials);
  parallel_for(trials, workers, [&](std::size_t t) { draws[t] = draw_trial(ensemble, n, master_seed, t, false); });
  SingularValueSample out;
  out.values.reserve(trials);
  for (const auto& d : draws) {
    out.singular_count += d.resamples;
    if (d.failed)
      ++out.failed_count;
    else
      out.values.push_back(d.s_n);
  }
  return out;
}

TailSweepResult run_tail_sweep(const TailSweepConfig& cfg) {
  if (cfg.n_values.empty() || cfg.k_values.empty()) throw std::invalid_argument("tail sweep: empty n or K list");
  if (cfg.trials == 0) throw std::invalid_argument("tail sweep: trials must be at least 1");
  for (auto n : cfg.n_values) require_n(n);
  for (double k : cfg.k_values)
    if (!std::isfinite(k) || k < 0.0) throw std::invalid_argument("tail sweep: K must be finite and nonnegative");

  std::vector<std::size_t> ns = cfg.n_values;
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
  std::vector<double> ks = cfg.k_values;
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());

  TailSweepResult res;
  for (std::size_t n : ns) {
    std::vector<Draw> draws(cfg.trials);
    parallel_for(cfg.trials, cfg.workers, [&](std::size_t t) {
      const bool witness = cfg.witness_stride != 0 && t % cfg.witness_stride == 0;
      draws[t] = draw_trial(cfg.ensemble, n, cfg.master_seed, t, witness);
    });

    std::size_t singular = 0, failed = 0;
    for (const auto& d : draws) {
      singular += d.resamples;
      failed += d.failed ? 1 : 0;
      if (d.witness_checked) {
        ++res.witness_checked;
        if (!d.witness_ok) ++res.witness_violations;
      }
    }
    const double root_n = std::sqrt(static_cast<double>(n));
    for (double k : ks) {
      const double threshold = k / root_n;
      TailEstimate e;
      e.ensemble = cfg.ensemble;
      e.n = n;
      e.k = k;
      e.direction = cfg.direction;
      e.trials = cfg.trials - failed;
      e.singular_count = singular;
      e.failed_count = failed;
      e.master_seed = cfg.master_seed;
      e.outside_theorem_range = cfg.direction == TailDirection::upper && k < 2.0;
      for (const auto& d : draws) {
        if (d.failed) continue;
        // Ties fall on the lower side so the two directions partition the trials.
        const bool exceeds = d.s_n > threshold;
        if ((cfg.direction == TailDirection::upper) == exceeds) ++e.exceed_count;
      }
      if (e.trials > 0) {
        e.p_hat = static_cast<double>(e.exceed_count) / static_cast<double>(e.trials);
        const auto ci = wilson_interval(e.exceed_count, e.trials);
        e.ci_low = ci.low;
        e.ci_high = ci.high;
      }
      res.estimates.push_back(e);
    }
  }
  return res;
}

std::string tail_csv(std::span<const TailEstimate> estimates) {
  std::vector<TailEstimate> rows(estimates.begin(), estimates.end());
  std::stable_sort(rows.begin(), rows.end(), [](const TailEstimate& a, const TailEstimate& b) {
    return a.n != b.n ? a.n < b.n : a.k < b.k;
  });
  std::string out(kTailCsvHeader);
  out += '\n';
  for (const auto& e : rows) {
    out += e.ensemble.name();
    out += ',' + std::to_string(e.n);
    out += ',' + format_number(e.k);
    out += ',';
    out += to_string(e.direction);
    out += ',' + std::to_string(e.trials);
    out += ',' + std::to_string(e.exceed_count);
    out += ',' + format_number(e.p_hat);
    out += ',' + format_number(e.ci_low);
    out += ',' + format_number(e.ci_high);
    out += ',' + std::to_string(e.singular_count);
    out += ',' + std::to_string(e.master_seed);
    out += '\n';
  }
  return out;
}

std::vector<ScalingRow> median_scaling_report(Ensemble ensemble, std::span<const std::size_t> n_values,
                                              std::size_t trials, std::uint64_t master_seed, unsigned workers) {
  if (trials == 0) throw std::invalid_argument("scaling: trials must be at least 1");
  std::vector<ScalingRow> rows;
  for (std::size_t n : n_values) {
    auto sample = sample_smallest_singular_values(ensemble, n, trials, master_seed, workers);
    if (sample.values.empty()) throw std::runtime_error("scaling: every trial was singular");
    const double root_n = std::sqrt(static_cast<double>(n));
    for (double& v : sample.values) v *= root_n;
    std::sort(sample.values.begin(), sample.values.end());
    ScalingRow row;
    row.n = n;
    row.trials = sample.values.size();
    row.median = quantile_sorted(sample.values, 0.5);
    row.q1 = quantile_sorted(sample.values, 0.25);
    row.q3 = quantile_sorted(sample.values, 0.75);
    row.singular_count = sample.singular_count;
    rows.push_back(row);
  }
  return rows;
}

DistanceTailReport distance_tail_experiment(Ensemble ensemble, std::size_t n, std::size_t trials,
                                            std::uint64_t master_seed, unsigned workers) {
  require_n(n);
  if (trials == 0) throw std::invalid_argument("distance: trials must be at least 1");
  struct Slot {
    double dist = -1.0;
    std::size_t resamples = 0;
  };
  std::vector<Slot> slots(trials);
  parallel_for(trials, workers, [&](std::size_t t) {
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
      const Matrix a = sample_matrix(ensemble, n, trial_stream(master_seed, t, attempt));
      try {
        slots[t].dist = dist_to_subspace(a.column(0), span_of_other_columns(a, 0));
        return;
      } catch (const NumericallyDependent&) {
        ++slots[t].resamples;
      }
    }
  });

  DistanceTailReport rep;
  rep.ensemble = ensemble;
  rep.n = n;
  for (const auto& s : slots) {
    rep.singular_count += s.resamples;
    if (s.dist >= 0.0) rep.samples.push_back(s.dist);
  }
  if (rep.samples.empty()) throw std::runtime_error("distance: every trial was degenerate");
  rep.thresholds = {0.5, 1.0, 1.5, 2.0, 2.5, 3.0};
  for (double u : rep.thresholds) {
    const auto above = std::count_if(rep.samples.begin(), rep.samples.end(), [u](double d) { return d > u; });
    rep.exceed_probability.push_back(static_cast<double>(above) / static_cast<double>(rep.samples.size()));
    rep.half_normal_reference.push_back(1.0 - half_normal_cdf(u));
  }
  rep.ks_half_normal = ks_statistic(rep.samples, half_normal_cdf);
  return rep;
}

MarkovSumBound check_markov_sum_bound(const FiniteDistribution& dist, std::size_t n, double epsilon) {
  const std::size_t m = dist.values.size();
  if (m == 0 || dist.probabilities.size() != m)
    throw std::invalid_argument("markov bound: values and probabilities must be nonempty and aligned");
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (!(dist.values[i] >= 0.0)) throw std::invalid_argument("markov bound: values must be nonnegative");
    if (!(dist.probabilities[i] >= 0.0)) throw std::invalid_argument("markov bound: negative probability");
    total += dist.probabilities[i];
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("markov bound: probabilities must sum to 1");
  if (n == 0) throw std::invalid_argument("markov bound: n must be at least 1");
  if (!(epsilon > 0.0)) throw std::invalid_argument("markov bound: epsilon must be positive");

  constexpr double kMaxOutcomes = 1e6;
  if (std::pow(static_cast<double>(m), static_cast<double>(n)) > kMaxOutcomes)
    throw EnumerationTooLarge("markov bound: support^n exceeds 10^6 outcomes");

  // Odometer over index tuples.
  std::vector<std::size_t> idx(n, 0);
  long double lhs = 0.0L;
  const double dn = static_cast<double>(n);
  while (true) {
    double sum = 0.0;
    long double prob = 1.0L;
    for (std::size_t k = 0; k < n; ++k) {
      sum += dist.values[idx[k]];
      prob *= dist.probabilities[idx[k]];
    }
    if (sum / dn <= epsilon) lhs += prob;
    std::size_t k = 0;
    while (k < n && ++idx[k] == m) idx[k++] = 0;
    if (k == n) break;
  }

  long double single = 0.0L;
  for (std::size_t i = 0; i < m; ++i)
    if (dist.values[i] <= 2.0 * epsilon) single += dist.probabilities[i];
  // (2/n) sum over n identical terms
  const long double rhs = 2.0L * single;

  MarkovSumBound out;
  out.lhs = static_cast<double>(lhs);
  out.rhs = static_cast<double>(rhs);
  out.holds = lhs <= rhs;
  return out;
}

namespace {

double model_shape(TailDirection d, double k) { return d == TailDirection::lower ? k : std::log(k) / k; }

}  // namespace

double TailFit::predict(double k_value) const { return constant * model_shape(direction, k_value); }

TailFit fit_tail_model(std::span<const TailEstimate> estimates) {
  if (estimates.empty()) throw InsufficientData("tail fit: no estimates");
  TailFit fit;
  fit.direction = estimates[0].direction;
  fit.n = estimates[0].n;
  std::set<double> distinct;
  for (const auto& e : estimates) {
    if (e.n != fit.n || e.direction != fit.direction)
      throw InsufficientData("tail fit: estimates must share n and direction");
    if (fit.direction == TailDirection::upper && !(e.k > 1.0)) continue;
    if (fit.direction == TailDirection::lower && !(e.k > 0.0)) continue;
    distinct.insert(e.k);
    fit.k.push_back(e.k);
    fit.p_hat.push_back(e.p_hat);
  }
  if (distinct.size() < 3) throw InsufficientData("tail fit: need at least three distinct usable K values");

  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < fit.k.size(); ++i) {
    const double f = model_shape(fit.direction, fit.k[i]);
    num += f * fit.p_hat[i];
    den += f * f;
  }
  fit.constant = num / den;
  double ss = 0.0;
  for (std::size_t i = 0; i < fit.k.size(); ++i) {
    fit.model.push_back(fit.predict(fit.k[i]));
    fit.residuals.push_back(fit.p_hat[i] - fit.model.back());
    ss += fit.residuals.back() * fit.residuals.back();
  }
  fit.rms_residual = std::sqrt(ss / static_cast<double>(fit.k.size()));
  return fit;
}

}  // namespace lsv
