#include "lsv/structure.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lsv/parallel.hpp"

namespace lsv {

LatticeDistance dist_to_lattice(std::span<const double> v) {
  LatticeDistance out;
  out.nearest.reserve(v.size());
  Vector diff(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double r = std::round(v[i]);  // half away from zero
    out.nearest.push_back(static_cast<std::int64_t>(r));
    diff[i] = v[i] - r;
  }
  out.distance = norm2(diff);
  return out;
}

LcdQuery LcdQuery::defaults(std::size_t n) {
  LcdQuery q;
  q.alpha = std::sqrt(static_cast<double>(n)) / 2.0;
  return q;
}

void LcdQuery::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) throw InvalidQuery("LCD: gamma must lie in (0, 1)");
  if (!(alpha > 0.0)) throw InvalidQuery("LCD: alpha must be positive");
  if (!(theta_max > 0.0)) throw InvalidQuery("LCD: theta_max must be positive");
  if (!(grid_step >= 0.0)) throw InvalidQuery("LCD: grid_step must be nonnegative");
}

double LcdQuery::step_for(double norm_a) const {
  return grid_step > 0.0 ? grid_step : std::min(gamma, 0.1) / (4.0 * norm_a);
}

namespace {

class Admissibility {
 public:
  Admissibility(std::span<const double> a, const LcdQuery& q) : a_(a), q_(q), norm_a_(norm2(a)) {}

  double norm_a() const { return norm_a_; }

  bool operator()(double theta) const {
    double ssq = 0.0;
    for (double x : a_) {
      const double t = theta * x;
      const double f = t - std::round(t);
      ssq += f * f;
    }
    const double limit = std::min(q_.gamma * theta * norm_a_, q_.alpha);
    return std::sqrt(ssq) < limit;
  }

 private:
  std::span<const double> a_;
  const LcdQuery& q_;
  double norm_a_;
};

}  // namespace

LcdResult lcd_vector(std::span<const double> a, const LcdQuery& q) {
  q.validate();
  Admissibility admissible(a, q);
  if (!(admissible.norm_a() > 0.0)) throw InvalidQuery("LCD: vector must be nonzero");

  LcdResult res;
  res.direction.assign(a.begin(), a.end());
  res.grid_step = q.step_for(admissible.norm_a());
  const auto steps = static_cast<std::size_t>(std::floor(q.theta_max / res.grid_step));

  double lo = 0.0;
  double hi = -1.0;
  for (std::size_t k = 1; k <= steps + 1; ++k) {
    const double theta = std::min(static_cast<double>(k) * res.grid_step, q.theta_max);
    if (admissible(theta)) {
      hi = theta;
      break;
    }
    lo = theta;
    if (theta >= q.theta_max) break;
  }
  if (hi < 0.0) return res;

  constexpr double kBisectionWidth = 1e-10;
  while (hi - lo > kBisectionWidth) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (admissible(mid) ? hi : lo) = mid;
  }
  res.theta_star = hi;
  res.slack = hi - lo;
  const auto at = dist_to_lattice(scaled(hi, a));
  res.achieved_dist = at.distance;
  res.certificate = at.nearest;
  return res;
}

LcdResult lcd_subspace_sampled(const OrthonormalBasis& basis, const LcdQuery& q, std::size_t samples,
                               SeedSpec seed, unsigned workers) {
  q.validate();
  if (samples == 0) throw InvalidQuery("LCD: samples must be at least 1");
  if (basis.empty()) throw InvalidQuery("LCD: subspace is trivial");

  std::vector<LcdResult> results(samples);
  parallel_for(samples, workers, [&](std::size_t s) {
    const Vector g = sample_vector(Ensemble{EnsembleKind::gaussian}, basis.size(),
                                   {seed.master_seed, seed.stream_index + s});
    Vector v(basis.ambient_dim(), 0.0);
    for (std::size_t i = 0; i < basis.size(); ++i) axpy(g[i], basis[i], v);
    const double vn = norm2(v);
    for (double& x : v) x /= vn;
    results[s] = lcd_vector(v, q);
  });

  std::size_t best = 0;
  for (std::size_t s = 1; s < samples; ++s) {
    const auto& cur = results[s];
    const auto& b = results[best];
    if (cur.bounded() && (!b.bounded() || *cur.theta_star < *b.theta_star)) best = s;
  }
  LcdResult out = std::move(results[best]);
  out.samples = samples;
  return out;
}

SmallBallEstimate small_ball_estimate(std::span<const double> weights, Ensemble ensemble, double epsilon,
                                      std::size_t trials, SeedSpec seed, unsigned workers) {
  if (weights.empty()) throw InvalidQuery("small ball: empty weight vector");
  if (std::abs(norm2(weights) - 1.0) > 1e-10) throw InvalidQuery("small ball: weights must have unit norm");
  if (!(epsilon > 0.0)) throw InvalidQuery("small ball: epsilon must be positive");
  if (trials == 0) throw InvalidQuery("small ball: trials must be at least 1");

  std::vector<unsigned char> hit(trials, 0);
  parallel_for(trials, workers, [&](std::size_t t) {
    const Vector xi = sample_vector(ensemble, weights.size(), {seed.master_seed, seed.stream_index + t});
    hit[t] = std::abs(dot(weights, xi)) <= epsilon ? 1 : 0;
  });

  SmallBallEstimate est;
  est.epsilon = epsilon;
  est.trials = trials;
  est.hits = static_cast<std::size_t>(std::count(hit.begin(), hit.end(), 1));
  est.p_hat = static_cast<double>(est.hits) / static_cast<double>(trials);
  est.ci = wilson_interval(est.hits, trials);
  return est;
}

}  // namespace lsv
