#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lsv/ensembles.hpp"

using namespace lsv;

namespace {

const Ensemble kAll[] = {{EnsembleKind::gaussian}, {EnsembleKind::rademacher}, {EnsembleKind::uniform},
                         {EnsembleKind::student_t5}};

struct Moments {
  double mean, variance, fourth;
};

Moments moments(Ensemble e, std::size_t draws, std::uint64_t seed) {
  double s1 = 0, s2 = 0, s4 = 0;
  for (std::size_t i = 0; i < draws; ++i) {
    EntryStream s({seed, 0}, 1, static_cast<std::uint32_t>(i), true);
    const double x = sample_entry(e, s);
    s1 += x;
    s2 += x * x;
    s4 += x * x * x * x;
  }
  const double n = static_cast<double>(draws);
  const double mean = s1 / n;
  return {mean, s2 / n - mean * mean, s4 / n};
}

}  // namespace

TEST_CASE("philox4x32-10 known-answer vectors") {
  CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) == PhiloxCounter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
        PhiloxCounter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
        PhiloxCounter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("ensemble names round-trip") {
  for (auto e : kAll) CHECK(Ensemble::parse(e.name()) == e);
  CHECK_FALSE(Ensemble::parse("cauchy").has_value());
  CHECK(Ensemble{EnsembleKind::gaussian}.subgaussian());
  CHECK_FALSE(Ensemble{EnsembleKind::student_t5}.subgaussian());
}

TEST_CASE("uniforms stay strictly inside (0, 1)") {
  EntryStream s({123, 4}, 7, 9);
  for (int i = 0; i < 10000; ++i) {
    const double u = s.next_open01();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("support of bounded ensembles") {
  const double r3 = std::sqrt(3.0);
  for (std::uint32_t i = 0; i < 20000; ++i) {
    EntryStream a({9, 1}, 1, i, true);
    const double r = sample_entry({EnsembleKind::rademacher}, a);
    CHECK((r == 1.0 || r == -1.0));
    EntryStream b({9, 2}, 1, i, true);
    const double u = sample_entry({EnsembleKind::uniform}, b);
    CHECK(std::abs(u) <= r3);
  }
}

TEST_CASE("moment audit over 10^6 draws") {
  for (auto e : kAll) {
    CAPTURE(e.name());
    const auto m = moments(e, 1000000, 2024);
    CHECK(std::abs(m.mean) <= 0.01);
    CHECK(std::abs(m.variance - 1.0) <= 0.02);
    if (e.kind != EnsembleKind::student_t5) CHECK(m.fourth == doctest::Approx(e.fourth_moment()).epsilon(0.05));
  }
}

TEST_CASE("student_t5 mean and variance over 10^6 draws") {
  const auto m = moments({EnsembleKind::student_t5}, 1000000, 77);
  CHECK(m.mean >= -0.01);
  CHECK(m.mean <= 0.01);
  CHECK(m.variance >= 0.98);
  CHECK(m.variance <= 1.02);
}

TEST_CASE("sample_matrix replays bit-for-bit and separates streams") {
  for (auto e : kAll) {
    const Matrix a = sample_matrix(e, 6, {42, 3});
    const Matrix b = sample_matrix(e, 6, {42, 3});
    CHECK(a == b);
  }
  for (auto e : {Ensemble{EnsembleKind::gaussian}, Ensemble{EnsembleKind::uniform}, Ensemble{EnsembleKind::student_t5}}) {
    CHECK_FALSE(sample_matrix(e, 6, {42, 3}) == sample_matrix(e, 6, {42, 4}));
    CHECK_FALSE(sample_matrix(e, 6, {42, 3}) == sample_matrix(e, 6, {43, 3}));
  }
  CHECK_THROWS_AS(sample_matrix({EnsembleKind::gaussian}, 1, {0, 0}), InvalidDimension);
}

TEST_CASE("entry (i, j) does not depend on the other entries") {
  const Matrix a = sample_matrix({EnsembleKind::gaussian}, 5, {8, 8});
  EntryStream s({8, 8}, 5, 2 * 5 + 3);
  CHECK(a(2, 3) == sample_entry({EnsembleKind::gaussian}, s));
  // vectors live in a separate counter domain from matrix rows
  const Vector v = sample_vector({EnsembleKind::gaussian}, 5, {8, 8});
  CHECK(v[0] != a(0, 0));
}

TEST_CASE("gaussian matrix entries average to zero") {
  double sum = 0.0;
  const std::size_t n = 100, trials = 200;
  for (std::size_t t = 0; t < trials; ++t) {
    const Matrix a = sample_matrix({EnsembleKind::gaussian}, n, {5, t});
    for (double x : a.data()) sum += x;
  }
  CHECK(std::abs(sum / double(n * n * trials)) <= 0.01);
}
