#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lsv/error.hpp"
#include "lsv/harness.hpp"

using namespace lsv;

namespace {

const Ensemble kGaussian{EnsembleKind::gaussian};
const Ensemble kRademacher{EnsembleKind::rademacher};
const Ensemble kAll[] = {{EnsembleKind::gaussian}, {EnsembleKind::rademacher}, {EnsembleKind::uniform},
                         {EnsembleKind::student_t5}};

TailSweepConfig sweep(Ensemble e, std::vector<std::size_t> ns, std::vector<double> ks, std::size_t trials,
                      TailDirection d, std::uint64_t seed = 1) {
  TailSweepConfig c;
  c.ensemble = e;
  c.n_values = std::move(ns);
  c.k_values = std::move(ks);
  c.trials = trials;
  c.direction = d;
  c.master_seed = seed;
  c.workers = 1;
  return c;
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

TailEstimate synthetic(TailDirection d, double k, double p) {
  TailEstimate e;
  e.direction = d;
  e.n = 100;
  e.k = k;
  e.p_hat = p;
  return e;
}

// Brute-force oracle: sum over all n-tuples by recursion.
double markov_lhs_oracle(const FiniteDistribution& d, std::size_t n, double eps, std::size_t depth = 0,
                         double sum = 0.0, double prob = 1.0) {
  if (depth == n) return sum <= eps * static_cast<double>(n) ? prob : 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < d.values.size(); ++i)
    acc += markov_lhs_oracle(d, n, eps, depth + 1, sum + d.values[i], prob * d.probabilities[i]);
  return acc;
}

}  // namespace

TEST_CASE("trial streams separate resample attempts") {
  CHECK(trial_stream(9, 5, 0).stream_index == 5);
  CHECK(trial_stream(9, 5, 2).stream_index == 5 + (std::uint64_t{2} << 40));
  CHECK(trial_stream(9, 5, 1).master_seed == 9);
  CHECK(parse_direction("lower") == TailDirection::lower);
  CHECK_FALSE(parse_direction("sideways").has_value());
}

TEST_CASE("K = 0 upper and eps = 0 lower are certain") {
  const auto up = run_tail_sweep(sweep(kGaussian, {10}, {0.0}, 300, TailDirection::upper));
  REQUIRE(up.estimates.size() == 1);
  CHECK(up.estimates[0].p_hat == 1.0);
  CHECK(up.estimates[0].exceed_count == 300);
  const auto low = run_tail_sweep(sweep(kGaussian, {10}, {0.0}, 300, TailDirection::lower));
  CHECK(low.estimates[0].p_hat == 0.0);
  CHECK(low.estimates[0].ci_low == 0.0);
}

TEST_CASE("sweep invariants: ordering, CI bracketing, exact monotonicity") {
  auto cfg = sweep(kGaussian, {30, 10}, {8.0, 1.0, 4.0, 2.0, 0.5}, 500, TailDirection::upper, 3);
  const auto res = run_tail_sweep(cfg);
  REQUIRE(res.estimates.size() == 10);
  for (std::size_t i = 0; i < res.estimates.size(); ++i) {
    const auto& e = res.estimates[i];
    CHECK(e.n == (i < 5 ? 10u : 30u));
    CHECK(e.ci_low <= e.p_hat);
    CHECK(e.p_hat <= e.ci_high);
    CHECK(e.exceed_count <= e.trials);
    CHECK(e.trials == 500);
    CHECK(e.outside_theorem_range == (e.k < 2.0));
    if (i % 5 != 0) {
      CHECK(e.k > res.estimates[i - 1].k);
      CHECK(e.exceed_count <= res.estimates[i - 1].exceed_count);
    }
  }
  CHECK(res.witness_checked == 10);  // trials 0,100,..,400 at two n
  CHECK(res.witness_violations == 0);
}

TEST_CASE("upper and lower counts partition the trials") {
  for (double k : {0.3, 1.0, 2.5}) {
    const auto up = run_tail_sweep(sweep(kRademacher, {12}, {k}, 400, TailDirection::upper, 5));
    const auto low = run_tail_sweep(sweep(kRademacher, {12}, {k}, 400, TailDirection::lower, 5));
    CHECK(up.estimates[0].exceed_count + low.estimates[0].exceed_count == 400);
    CHECK(up.estimates[0].singular_count == low.estimates[0].singular_count);
  }
}

TEST_CASE("rademacher at n = 2 resamples singular draws") {
  // half of all 2x2 sign matrices are singular
  const auto res = run_tail_sweep(sweep(kRademacher, {2}, {1.0}, 400, TailDirection::upper, 6));
  CHECK(res.estimates[0].singular_count > 100);
  CHECK(res.estimates[0].trials == 400);
  CHECK(res.estimates[0].failed_count == 0);
}

TEST_CASE("gaussian n = 100 upper tail is nonincreasing beyond CI overlap") {
  const auto res = run_tail_sweep(sweep(kGaussian, {100}, {1, 2, 4, 8}, 2000, TailDirection::upper, 7));
  for (std::size_t i = 1; i < 4; ++i) {
    const auto& prev = res.estimates[i - 1];
    const auto& cur = res.estimates[i];
    CHECK(cur.p_hat <= prev.p_hat);
    CHECK(cur.ci_low <= prev.ci_high);
  }
  // P(sqrt(n) s_n > 1) for gaussian is close to exp(-3/2)
  CHECK(res.estimates[0].ci_low - 0.03 <= std::exp(-1.5));
  CHECK(res.estimates[0].ci_high + 0.03 >= std::exp(-1.5));
}

TEST_CASE("sweep output does not depend on the worker count") {
  auto cfg = sweep(kAll[3], {8, 16}, {0.5, 1.0, 2.0}, 300, TailDirection::upper, 11);
  const std::string ref = tail_csv(run_tail_sweep(cfg).estimates);
  for (unsigned w : {2u, 3u, 8u}) {
    cfg.workers = w;
    CHECK(tail_csv(run_tail_sweep(cfg).estimates) == ref);
  }
}

TEST_CASE("tail csv layout") {
  const auto res = run_tail_sweep(sweep(kGaussian, {5}, {0.1, 2}, 50, TailDirection::lower, 13));
  const auto ls = lines(tail_csv(res.estimates));
  REQUIRE(ls.size() == 3);
  CHECK(ls[0] == kTailCsvHeader);
  CHECK(ls[1].rfind("gaussian,5,0.1,lower,50,", 0) == 0);
  CHECK(ls[1].substr(ls[1].rfind(',') + 1) == "13");
  CHECK(std::count(ls[2].begin(), ls[2].end(), ',') == 10);
}

TEST_CASE("sweep configuration errors") {
  CHECK_THROWS_AS(run_tail_sweep(sweep(kGaussian, {1}, {1.0}, 10, TailDirection::upper)), InvalidDimension);
  CHECK_THROWS_AS(run_tail_sweep(sweep(kGaussian, {}, {1.0}, 10, TailDirection::upper)), std::invalid_argument);
  CHECK_THROWS_AS(run_tail_sweep(sweep(kGaussian, {3}, {}, 10, TailDirection::upper)), std::invalid_argument);
  CHECK_THROWS_AS(run_tail_sweep(sweep(kGaussian, {3}, {1.0}, 0, TailDirection::upper)), std::invalid_argument);
}

TEST_CASE("median of sqrt(n) s_n is stable in n and across ensembles") {
  const std::size_t ns[] = {50, 200};
  const auto g = median_scaling_report(kGaussian, ns, 2000, 21);
  REQUIRE(g.size() == 2);
  CHECK(std::abs(g[0].median - g[1].median) <= 0.25 * std::max(g[0].median, g[1].median));
  for (const auto& r : g) {
    CHECK(r.q1 <= r.median);
    CHECK(r.median <= r.q3);
    CHECK(r.iqr() > 0.0);
  }
  // known limit for the gaussian median: about 0.60
  CHECK(g[0].median == doctest::Approx(0.6013).epsilon(0.1));

  const std::size_t n100[] = {100};
  const auto gm = median_scaling_report(kGaussian, n100, 1000, 22);
  const auto rm = median_scaling_report(kRademacher, n100, 1000, 22);
  const double ratio = gm[0].median / rm[0].median;
  CHECK(ratio <= 2.0);
  CHECK(ratio >= 0.5);
}

TEST_CASE("median at n = 2 reproduces across seeds within 2%") {
  const std::size_t n2[] = {2};
  const auto a = median_scaling_report(kGaussian, n2, 100000, 31);
  const auto b = median_scaling_report(kGaussian, n2, 100000, 32);
  CHECK(std::abs(a[0].median - b[0].median) <= 0.02 * a[0].median);
}

TEST_CASE("gaussian distance to the other columns is half-normal") {
  const auto rep = distance_tail_experiment(kGaussian, 30, 5000, 41);
  CHECK(rep.samples.size() == 5000);
  CHECK(rep.ks_half_normal <= 0.03);
  REQUIRE(rep.thresholds.size() == 6);
  for (std::size_t i = 0; i < 6; ++i)
    CHECK(std::abs(rep.exceed_probability[i] - rep.half_normal_reference[i]) <= 0.03);
  CHECK(std::all_of(rep.samples.begin(), rep.samples.end(), [](double d) { return d > 0.0; }));
}

TEST_CASE("P(dist > 3) stays under 1% for all ensembles at n = 100") {
  for (auto e : kAll) {
    CAPTURE(e.name());
    const auto rep = distance_tail_experiment(e, 100, 5000, 42);
    CHECK(rep.thresholds.back() == 3.0);
    CHECK(rep.exceed_probability.back() <= 0.01);
  }
  CHECK(1.0 - half_normal_cdf(3.0) == doctest::Approx(0.0027).epsilon(0.01));
}

TEST_CASE("markov sum bound: documented enumeration cases") {
  const auto bern = check_markov_sum_bound({{0.0, 1.0}, {0.5, 0.5}}, 2, 0.25);
  CHECK(bern.lhs == doctest::Approx(0.25));
  CHECK(bern.rhs == doctest::Approx(1.0));
  CHECK(bern.holds);

  for (double eps : {1e-3, 0.5, 7.0}) {
    const auto zero = check_markov_sum_bound({{0.0}, {1.0}}, 5, eps);
    CHECK(zero.lhs == 1.0);
    CHECK(zero.rhs == 2.0);
  }

  const FiniteDistribution uni{{0, 1, 2, 3}, {0.25, 0.25, 0.25, 0.25}};
  const auto u = check_markov_sum_bound(uni, 4, 0.5);
  // sums <= 2 over {0..3}^4: 1 + 4 + 10 = 15 tuples
  CHECK(u.lhs == doctest::Approx(15.0 / 256.0));
  CHECK(u.rhs == doctest::Approx(1.0));  // 2 * P(Z <= 1)
  CHECK(u.holds);
}

TEST_CASE("markov sum bound holds on random finite laws") {
  std::uint32_t entry = 0;
  auto next = [&] { return EntryStream({51, 0}, 1, entry++, true).next_open01(); };
  for (int t = 0; t < 100; ++t) {
    const std::size_t m = 1 + static_cast<std::size_t>(next() * 4);
    const std::size_t n = 1 + static_cast<std::size_t>(next() * 6);
    FiniteDistribution d;
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      d.values.push_back(std::floor(next() * 8.0) / 4.0);
      d.probabilities.push_back(next());
      total += d.probabilities.back();
    }
    for (double& p : d.probabilities) p /= total;
    const double eps = 0.05 + next();
    const auto b = check_markov_sum_bound(d, n, eps);
    CHECK(b.lhs == doctest::Approx(markov_lhs_oracle(d, n, eps)).epsilon(1e-12));
    CHECK(b.lhs <= b.rhs);
    CHECK(b.holds);
  }
}

TEST_CASE("markov sum bound input errors") {
  CHECK_THROWS_AS(check_markov_sum_bound({{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10}, std::vector<double>(11, 1.0 / 11)}, 6, 0.1),
                  EnumerationTooLarge);
  CHECK_NOTHROW(check_markov_sum_bound({{0, 1, 2, 3, 4, 5, 6, 7, 8, 9}, std::vector<double>(10, 0.1)}, 6, 0.1));
  CHECK_THROWS_AS(check_markov_sum_bound({{-1.0}, {1.0}}, 2, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(check_markov_sum_bound({{0.0, 1.0}, {0.3, 0.3}}, 2, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(check_markov_sum_bound({{0.0}, {1.0}}, 2, 0.0), std::invalid_argument);
}

TEST_CASE("tail fit recovers synthetic constants") {
  std::vector<TailEstimate> up;
  for (double k : {2.0, 4.0, 8.0, 16.0}) up.push_back(synthetic(TailDirection::upper, k, 3.0 * std::log(k) / k));
  const auto f = fit_tail_model(up);
  CHECK(std::abs(f.constant - 3.0) <= 1e-6);
  CHECK(f.rms_residual <= 1e-12);
  CHECK(f.predict(8.0) == doctest::Approx(3.0 * std::log(8.0) / 8.0));

  std::vector<TailEstimate> low;
  for (double e : {0.05, 0.1, 0.2}) low.push_back(synthetic(TailDirection::lower, e, 1.4 * e));
  CHECK(std::abs(fit_tail_model(low).constant - 1.4) <= 1e-6);
}

TEST_CASE("tail fit needs three usable K at one n") {
  std::vector<TailEstimate> up;
  for (double k : {0.5, 1.0, 2.0, 4.0}) up.push_back(synthetic(TailDirection::upper, k, 0.1));
  CHECK_THROWS_AS(fit_tail_model(up), InsufficientData);  // K <= 1 is dropped
  up.push_back(synthetic(TailDirection::upper, 8.0, 0.01));
  CHECK_NOTHROW(fit_tail_model(up));
  up.back().n = 50;
  CHECK_THROWS_AS(fit_tail_model(up), InsufficientData);
  CHECK_THROWS_AS(fit_tail_model({}), InsufficientData);
}

TEST_CASE("fitted upper model dominates a real sweep at K >= 4") {
  const auto res = run_tail_sweep(sweep(kGaussian, {50}, {2, 4, 8, 16}, 1000, TailDirection::upper, 61));
  const auto fit = fit_tail_model(res.estimates);
  CHECK(fit.constant > 0.0);
  for (const auto& e : res.estimates)
    if (e.k >= 4.0) CHECK(fit.predict(e.k) >= e.p_hat - 2.0 * e.ci_width());
}
