#include <cmath>
#include <numbers>
#include <numeric>

#include "cdlab/error.hpp"
#include "cdlab/families.hpp"
#include "cdlab/rng.hpp"
#include "doctest.h"
#include "reference.hpp"

using namespace cdlab;

using reference::simpson;

TEST_CASE("philox4x32-10 matches the published known-answer vectors") {
  using C = Philox4x32::Counter;
  CHECK(Philox4x32::generate(C{0, 0, 0, 0}, {0, 0}) ==
        C{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(Philox4x32::generate(C{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                             {0xffffffffu, 0xffffffffu}) ==
        C{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
}

TEST_CASE("streams are reproducible and distinct per stream id") {
  Stream a(123, 7), b(123, 7), c(123, 8);
  for (int k = 0; k < 100; ++k) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    CHECK(x != c.next_u64());
  }
  Stream u(5);
  for (int k = 0; k < 1000; ++k) {
    const double v = u.uniform_open();
    CHECK(v > 0.0);
    CHECK(v < 1.0);
    CHECK(u.below(3) < 3u);
  }
}

TEST_CASE("log_density examples") {
  const Family loc = Family::gaussian_location();
  const Family scale = Family::gaussian_scale();
  CHECK(log_density(loc, 0.0, 0.0) == doctest::Approx(-0.918939).epsilon(1e-6));
  CHECK(log_density(loc, 1.0, 1.0) == doctest::Approx(-0.5 * std::log(2.0 * std::numbers::pi)).epsilon(1e-15));
  // -1/2 log(2 pi sigma^2) - y^2 / (2 sigma^2) with sigma^2 = 2, y = 1
  const double expected = -0.5 * std::log(4.0 * std::numbers::pi) - 0.25;
  CHECK(log_density(scale, 2.0, 1.0) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("inadmissible parameters raise domain errors") {
  const Family scale = Family::gaussian_scale();
  CHECK_THROWS_AS(log_density(scale, 0.0, 1.0), DomainError);
  CHECK_THROWS_AS(log_density(scale, -2.0, 1.0), DomainError);
  CHECK_THROWS_AS(sample(scale, -1.0, 1), DomainError);
  const Family tp = Family::two_point(FamilyKind::GaussianScale, 1.0, 3.0);
  CHECK_THROWS_AS(log_density(tp, 0.5, 0.0), DomainError);
  CHECK_THROWS_AS(Family::two_point(FamilyKind::GaussianScale, 0.0, 3.0), DomainError);
  CHECK_THROWS_AS(Family::two_point(FamilyKind::TwoPoint, 0.0, 3.0), ContractError);
}

TEST_CASE("two-point family delegates to its members") {
  const Family tp = Family::two_point(FamilyKind::GaussianScale, 1.0, 3.0);
  const Family scale = Family::gaussian_scale();
  for (double y : {-2.0, 0.0, 0.7, 5.0}) {
    CHECK(tp.log_density(0.0, y) == scale.log_density(1.0, y));
    CHECK(tp.log_density(1.0, y) == scale.log_density(3.0, y));
  }
  CHECK(tp.name() == "two-point(gaussian-scale)");
}

TEST_CASE("sample is deterministic in the seed") {
  const Family loc = Family::gaussian_location();
  CHECK(sample(loc, 0.0, 99) == sample(loc, 0.0, 99));
  CHECK(sample(loc, 0.0, 99) != sample(loc, 0.0, 100));
}

TEST_CASE("sample moments") {
  constexpr int kDraws = 100000;
  Stream stream(2024);
  const Family loc = Family::gaussian_location();
  double sum = 0.0;
  for (int k = 0; k < kDraws; ++k) sum += loc.sample(2.0, stream);
  CHECK(std::abs(sum / kDraws - 2.0) < 0.02);

  const Family scale = Family::gaussian_scale();
  std::vector<double> ys(kDraws);
  for (double& y : ys) y = scale.sample(4.0, stream);
  const double mean = std::accumulate(ys.begin(), ys.end(), 0.0) / kDraws;
  double ss = 0.0;
  for (double y : ys) ss += (y - mean) * (y - mean);
  CHECK(std::abs(ss / (kDraws - 1) - 4.0) < 0.1);
}

TEST_CASE("densities integrate to one") {
  const Family loc = Family::gaussian_location();
  const Family scale = Family::gaussian_scale();
  for (double mu : {-3.0, 0.0, 2.5}) {
    const double mass = simpson([&](double y) { return std::exp(loc.log_density(mu, y)); },
                                mu - 10.0, mu + 10.0, 20000);
    CHECK(std::abs(mass - 1.0) < 1e-8);
  }
  for (double var : {0.25, 1.0, 4.0}) {
    const double sd = std::sqrt(var);
    const double mass = simpson([&](double y) { return std::exp(scale.log_density(var, y)); },
                                -10.0 * sd, 10.0 * sd, 20000);
    CHECK(std::abs(mass - 1.0) < 1e-8);
  }
}

TEST_CASE("parameter multisets are order-free") {
  const ParameterMultiset a({3.0, -1.0, 2.0, 2.0});
  const ParameterMultiset b({2.0, 3.0, 2.0, -1.0});
  CHECK(a == b);
  CHECK(a.values()[0] == -1.0);
  CHECK(a.max() == 3.0);
  CHECK(a.max_abs() == 3.0);
  CHECK_FALSE(a == ParameterMultiset({3.0, -1.0, 2.0}));
  CHECK_THROWS_AS(ParameterMultiset({}), ContractError);
  CHECK_THROWS_AS(ParameterMultiset({std::nan("")}), ContractError);
  CHECK_THROWS_AS(ParameterMultiset({0.0, 1.0}).require_admissible(Family::gaussian_scale()), DomainError);
}

TEST_CASE("loglik_matrix examples") {
  const Family loc = Family::gaussian_location();
  const std::vector<double> y0{0.0};
  const auto one = loglik_matrix(loc, ParameterMultiset({0.0}), y0);
  CHECK(one(0, 0) == doctest::Approx(-0.918939).epsilon(1e-6));

  const std::vector<double> ys{0.0, 1.0};
  const auto two = loglik_matrix(loc, ParameterMultiset({1.0, 0.0}), ys);
  CHECK(two(0, 0) == doctest::Approx(-0.9189385332).epsilon(1e-10));
  CHECK(two(0, 1) == doctest::Approx(-1.4189385332).epsilon(1e-10));
  CHECK(two(1, 0) == doctest::Approx(-1.4189385332).epsilon(1e-10));
  CHECK(two(1, 1) == doctest::Approx(-0.9189385332).epsilon(1e-10));

  const std::vector<double> three{0.3, -1.2, 2.0};
  const auto equal = loglik_matrix(loc, ParameterMultiset({0.5, 0.5, 0.5}), three);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(equal(i, 0) == equal(i, 1));
    CHECK(equal(i, 1) == equal(i, 2));
  }
  CHECK_THROWS_AS(loglik_matrix(loc, ParameterMultiset({0.0, 1.0}), y0), ContractError);
}

TEST_CASE("permuting observations permutes rows exactly") {
  const Family loc = Family::gaussian_location();
  Stream stream(77);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> mus(6), ys(6);
    for (double& m : mus) m = stream.normal();
    for (double& y : ys) y = stream.normal();
    std::vector<std::size_t> sigma{3, 0, 5, 1, 4, 2};
    std::vector<double> moved(6);
    for (std::size_t k = 0; k < 6; ++k) moved[k] = ys[sigma[k]];
    const ParameterMultiset ms(mus);
    const auto a = loglik_matrix(loc, ms, ys);
    const auto b = loglik_matrix(loc, ms, moved);
    for (std::size_t k = 0; k < 6; ++k) {
      for (std::size_t j = 0; j < 6; ++j) CHECK(b(k, j) == a(sigma[k], j));
    }
  }
}

TEST_CASE("gaussian-location matrix is shift invariant") {
  const Family loc = Family::gaussian_location();
  // Dyadic inputs: the shifted differences are computed exactly.
  const std::vector<double> mus{-0.75, 0.125, 1.5};
  const std::vector<double> ys{0.25, -2.0, 3.375};
  const double shift = 5.0;
  std::vector<double> mus2 = mus, ys2 = ys;
  for (double& m : mus2) m += shift;
  for (double& y : ys2) y += shift;
  const auto a = loglik_matrix(loc, ParameterMultiset(mus), ys);
  const auto b = loglik_matrix(loc, ParameterMultiset(mus2), ys2);
  CHECK(a.entries() == b.entries());

  // Generic inputs: equal up to rounding of y - mu.
  Stream stream(3);
  std::vector<double> gm(5), gy(5);
  for (double& m : gm) m = stream.normal();
  for (double& y : gy) y = stream.normal();
  std::vector<double> gm2 = gm, gy2 = gy;
  for (double& m : gm2) m += 0.1;
  for (double& y : gy2) y += 0.1;
  const auto c = loglik_matrix(loc, ParameterMultiset(gm), gy);
  const auto d = loglik_matrix(loc, ParameterMultiset(gm2), gy2);
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 5; ++j) CHECK(std::abs(c(i, j) - d(i, j)) < 1e-12);
  }
}

TEST_CASE("log-likelihood matrices must be square and finite") {
  CHECK_THROWS_AS(LogLikelihoodMatrix(Matrix<double>(2, 3)), ContractError);
  Matrix<double> bad(2, 2);
  bad(1, 1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(LogLikelihoodMatrix{bad}, ContractError);
}
