#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "cdlab/error.hpp"
#include "cdlab/risklab.hpp"
#include "doctest.h"
#include "reference.hpp"

using namespace cdlab;
using reference::simpson;

namespace {

const Family kLoc = Family::gaussian_location();

double normal_pdf(double mean, double y) {
  return std::exp(-0.5 * (y - mean) * (y - mean)) / std::sqrt(2.0 * std::numbers::pi);
}

void check_same(const RiskEstimate& a, const RiskEstimate& b) {
  CHECK(a.mean == b.mean);
  CHECK(a.standard_error == b.standard_error);
  CHECK(a.reps == b.reps);
  CHECK(a.master_seed == b.master_seed);
}

void check_same(const GapReport& a, const GapReport& b) {
  CHECK(a.n == b.n);
  check_same(a.gap_sq, b.gap_sq);
  check_same(a.risk_s, b.risk_s);
  check_same(a.risk_pi, b.risk_pi);
  check_same(a.risk_diff, b.risk_diff);
  CHECK(a.pythagoras_residual == b.pythagoras_residual);
  CHECK(a.pythagoras_stderr == b.pythagoras_stderr);
}

bool within(const McEstimate& est, double truth, double sigmas = 3.0) {
  return std::abs(est.value - truth) <= sigmas * est.standard_error;
}

}  // namespace

TEST_CASE("draw_instance basics") {
  const ParameterMultiset one({4.0});
  for (std::uint64_t r = 0; r < 10; ++r) CHECK(draw_instance(kLoc, one, 1, r).labels[0] == 4.0);

  const ParameterMultiset pair({0.0, 1.0});
  constexpr int kDraws = 100000;
  int ones = 0;
  for (int r = 0; r < kDraws; ++r) ones += draw_instance(kLoc, pair, 2, static_cast<std::uint64_t>(r)).labels[0] == 1.0;
  CHECK(std::abs(static_cast<double>(ones) / kDraws - 0.5) < 0.005);

  const ParameterMultiset equal(std::vector<double>(5, 3.0));
  double sum = 0.0;
  for (int r = 0; r < 20000; ++r) {
    for (double y : draw_instance(kLoc, equal, 3, static_cast<std::uint64_t>(r)).ys) sum += y;
  }
  CHECK(std::abs(sum / 100000.0 - 3.0) < 0.02);
}

TEST_CASE("draw_instance depends on the multiset only") {
  const ParameterMultiset a({0.5, -1.0, 2.0, 0.5});
  const ParameterMultiset b({2.0, 0.5, 0.5, -1.0});
  for (std::uint64_t r = 0; r < 50; ++r) {
    const auto x = draw_instance(kLoc, a, 7, r);
    const auto y = draw_instance(kLoc, b, 7, r);
    CHECK(x.labels == y.labels);
    CHECK(x.ys == y.ys);
  }
  check_same(mc_gap(kLoc, a, Engine::Permanent, 50, 7), mc_gap(kLoc, b, Engine::Permanent, 50, 7));
}

TEST_CASE("all-equal parameters give a zero gap") {
  const ParameterMultiset equal(std::vector<double>(6, -0.2));
  for (Engine e : {Engine::Enumeration, Engine::Permanent, Engine::TwoValued}) {
    const auto r = mc_gap(kLoc, equal, e, 200, 5);
    CHECK(r.gap_sq.mean == 0.0);
    CHECK(r.risk_diff.mean == 0.0);
    CHECK(r.risk_s.mean == r.risk_pi.mean);
    CHECK(r.pythagoras_residual == 0.0);
  }
}

TEST_CASE("risk ordering and the Pythagorean identity for n = 2") {
  const ParameterMultiset pair({0.0, 1.0});
  const auto r = mc_gap(kLoc, pair, Engine::Enumeration, 100000, 11);
  CHECK(r.risk_s.mean >= r.risk_pi.mean - 3.0 * r.risk_diff.standard_error);
  CHECK(r.risk_diff.mean == r.risk_s.mean - r.risk_pi.mean);
  CHECK(r.pythagoras_residual <= 3.0 * r.pythagoras_stderr);
  CHECK(r.gap_sq.mean > 0.0);
  CHECK(r.gap_sq.reps == 100000);
  CHECK(r.gap_sq.master_seed == 11);
}

TEST_CASE("two-valued and permanent engines produce the same report") {
  const ParameterMultiset ms({0.0, 0.0, 0.0, 0.0, 1.0, 1.0});
  const auto a = mc_gap(kLoc, ms, Engine::TwoValued, 2000, 13);
  const auto b = mc_gap(kLoc, ms, Engine::Permanent, 2000, 13);
  const auto c = mc_gap(kLoc, ms, Engine::Enumeration, 2000, 13);
  for (const auto* other : {&b, &c}) {
    CHECK(std::abs(a.gap_sq.mean - other->gap_sq.mean) < 1e-9);
    CHECK(std::abs(a.gap_sq.standard_error - other->gap_sq.standard_error) < 1e-9);
    CHECK(std::abs(a.risk_s.mean - other->risk_s.mean) < 1e-9);
    CHECK(std::abs(a.risk_pi.mean - other->risk_pi.mean) < 1e-9);
    CHECK(std::abs(a.risk_diff.mean - other->risk_diff.mean) < 1e-9);
    CHECK(std::abs(a.risk_diff.standard_error - other->risk_diff.standard_error) < 1e-9);
    CHECK(std::abs(a.pythagoras_residual - other->pythagoras_residual) < 1e-9);
  }
}

TEST_CASE("mc_gap is independent of the worker count") {
  const ParameterMultiset ms({-0.7, -0.1, 0.2, 0.9, 1.0});
  check_same(mc_gap(kLoc, ms, Engine::Permanent, 300, 17, Parallel{1}),
             mc_gap(kLoc, ms, Engine::Permanent, 300, 17, Parallel{3}));
  const ParameterMultiset tv({0.0, 0.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0});
  check_same(mc_gap(kLoc, tv, Engine::TwoValued, 500, 17, Parallel{1}),
             mc_gap(kLoc, tv, Engine::TwoValued, 500, 17, Parallel{4}));
}

TEST_CASE("mc_gap contracts") {
  const ParameterMultiset ms({0.0, 1.0, 2.0});
  CHECK_THROWS_AS(mc_gap(kLoc, ms, Engine::Permanent, 1, 1), ContractError);
  CHECK_THROWS_AS(mc_gap(kLoc, ms, Engine::TwoValued, 10, 1), ContractError);
  CHECK_THROWS_AS(mc_gap(kLoc, ParameterMultiset(std::vector<double>(9, 0.0)), Engine::Enumeration, 10, 1),
                  CapacityError);
  CHECK_THROWS_AS(mc_gap(kLoc, ParameterMultiset(std::vector<double>(18, 0.0)), Engine::Permanent, 10, 1),
                  CapacityError);
  CHECK_THROWS_AS(mc_gap(Family::gaussian_scale(), ParameterMultiset({0.0, 1.0}), Engine::Permanent, 10, 1),
                  DomainError);
}

TEST_CASE("engine names round-trip") {
  for (Engine e : {Engine::Enumeration, Engine::Permanent, Engine::TwoValued}) {
    CHECK(parse_engine(to_string(e)) == e);
  }
  CHECK_FALSE(parse_engine("ryser").has_value());
}

TEST_CASE("parameter generators") {
  const auto tv = generate_mus(TwoValuedMus{0.0, 1.0, 0.25}, 10);
  CHECK(std::count(tv.values().begin(), tv.values().end(), 1.0) == 2);
  const auto tv4 = generate_mus(TwoValuedMus{0.0, 1.0, 0.1}, 100);
  CHECK(std::count(tv4.values().begin(), tv4.values().end(), 1.0) == 10);
  const auto iid = generate_mus(IidUniformMus{2.0, 5}, 40);
  CHECK(iid.min() >= -2.0);
  CHECK(iid.max() <= 2.0);
  CHECK(iid == generate_mus(IidUniformMus{2.0, 5}, 40));
  CHECK(generate_mus(ConstantMus{1.5}, 3).all_equal());
  CHECK_THROWS_AS(generate_mus(ExplicitMus{{1.0, 2.0}}, 3), ContractError);
  CHECK_THROWS_AS(generate_mus(TwoValuedMus{0.0, 1.0, 1.5}, 3), ContractError);
  CHECK_THROWS_AS(generate_mus(ConstantMus{1.0}, 0), ContractError);
}

TEST_CASE("gap_curve") {
  const auto single = gap_curve(kLoc, ExplicitMus{{0.0, 0.5, 1.0}}, {3}, Engine::Permanent, 400, 19);
  REQUIRE(single.size() == 1);
  CHECK(single[0].n == 3);
  check_same(single[0].report, mc_gap(kLoc, ParameterMultiset({0.0, 0.5, 1.0}), Engine::Permanent, 400, 19));

  const auto zero = gap_curve(kLoc, ConstantMus{0.3}, {2, 4, 8}, Engine::Enumeration, 50, 1);
  REQUIRE(zero.size() == 3);
  for (const auto& row : zero) {
    CHECK(row.report.gap_sq.mean == 0.0);
    CHECK(row.report.risk_diff.mean == 0.0);
  }
  // Capacity is checked for the whole grid up front.
  CHECK_THROWS_AS(gap_curve(kLoc, ConstantMus{0.3}, {2, 9}, Engine::Enumeration, 50, 1), CapacityError);
}

TEST_CASE("G1 diagnostics") {
  const auto equal = check_G1(kLoc, ParameterMultiset(std::vector<double>(4, 0.5)), 0.1, 1000, 1);
  CHECK(equal.max_second_moment.value == 1.0);
  CHECK(equal.min_exceed_prob.value == 1.0);
  CHECK(equal.values_used == 1);

  // E_0 (f_1 / f_0)^2 = e.
  const auto pair = check_G1(kLoc, ParameterMultiset({0.0, 1.0}), 0.1, 100000, 2);
  CHECK(within(pair.max_second_moment, std::exp(1.0)));
  CHECK(pair.max_abs_mu == 1.0);
  const double quadrature = simpson(
      [](double y) { return normal_pdf(1.0, y) * normal_pdf(1.0, y) / normal_pdf(0.0, y); }, -15.0, 17.0, 32000);
  CHECK(quadrature == doctest::Approx(std::exp(1.0)).epsilon(1e-9));

  const auto grid = generate_mus(IidUniformMus{1.0, 3}, 30);
  const auto r = check_G1(kLoc, grid, 0.1, 100000, 4);
  CHECK(r.max_second_moment.value <= std::exp(4.0) + 3.0 * r.max_second_moment.standard_error);
  const double mi = r.argmax_mu_i, mj = r.argmax_mu_j;
  const double exact = simpson(
      [&](double y) { return normal_pdf(mj, y) * normal_pdf(mj, y) / normal_pdf(mi, y); }, -20.0, 20.0, 40000);
  CHECK(exact <= std::exp(4.0));
  CHECK(r.min_exceed_prob.value > 0.0);
  CHECK_FALSE(r.subsampled);

  const auto wide = check_G1(kLoc, generate_mus(IidUniformMus{1.0, 3}, 80), 0.1, 200, 4);
  CHECK(wide.subsampled);
  CHECK(wide.values_used == kG1MaxValues);
  CHECK_THROWS_AS(check_G1(kLoc, grid, 0.0, 100, 1), ContractError);
}

TEST_CASE("G2 diagnostics") {
  const std::size_t n = 4;
  const auto equal = check_G2(kLoc, ParameterMultiset(std::vector<double>(n, 1.0)), 100, 1);
  CHECK(equal.sum_sq_weights.value == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(equal.inverse_min_weight.value == doctest::Approx(static_cast<double>(n)).epsilon(1e-14));
  CHECK(equal.weighted_inverse_min.value == doctest::Approx(1.0).epsilon(1e-14));

  // n = 2, mu = {0, 1}: each Y_i has marginal density (f_0 + f_1) / 2.
  const auto r = check_G2(kLoc, ParameterMultiset({0.0, 1.0}), 100000, 2);
  auto g = [](double y) {
    const double f0 = normal_pdf(0.0, y), f1 = normal_pdf(1.0, y);
    const double p0 = f0 / (f0 + f1), p1 = f1 / (f0 + f1);
    return std::array<double, 3>{f0 + f1, p0 * p0 + p1 * p1, std::min(p0, p1)};
  };
  const double q1 = simpson([&](double y) { auto v = g(y); return v[0] * v[1]; }, -12.0, 13.0, 25000);
  const double q2 = simpson([&](double y) { auto v = g(y); return v[0] / (2.0 * v[2]); }, -12.0, 13.0, 25000);
  const double q3 = simpson([&](double y) { auto v = g(y); return v[0] * v[1] / (2.0 * v[2]); }, -12.0, 13.0, 25000);
  CHECK(within(r.sum_sq_weights, q1));
  CHECK(within(r.inverse_min_weight, q2));
  CHECK(within(r.weighted_inverse_min, q3));
  CHECK(within(r.first_obs_sum_sq, q1 / 2.0));
  REQUIRE(r.gaussian_bound.has_value());
  CHECK(*r.gaussian_bound == doctest::Approx(std::exp(12.0) / 2.0));

  CHECK_FALSE(check_G2(Family::gaussian_scale(), ParameterMultiset({1.0, 2.0}), 10, 1).gaussian_bound);
}

TEST_CASE("G2 bound for uniform parameters") {
  const auto mus = generate_mus(IidUniformMus{1.0, 6}, 50);
  const auto r = check_G2(kLoc, mus, 20000, 3);
  CHECK(r.first_obs_sum_sq.value <= std::exp(12.0) / 50.0);
  CHECK(r.first_obs_sum_sq.value >= 1.0 / 50.0);
}

TEST_CASE("B1 diagnostics") {
  const auto repeated = check_B1(kLoc, ParameterMultiset({0.0, 0.0, 1.0, 1.0}), 1000, 1);
  CHECK(repeated.ratio_variances[0] == 0.0);
  CHECK(repeated.ratio_variances[2] == 0.0);
  CHECK(repeated.spread == 1.0);

  for (double d : {0.3, 1.0}) {
    const auto r = check_B1(kLoc, ParameterMultiset({0.0, d}), 100000, 2);
    CHECK(within(r.max_ratio_variance, std::exp(d * d) - 1.0));
  }

  std::vector<double> grid(100);
  for (std::size_t k = 0; k < 100; ++k) grid[k] = static_cast<double>(k) / 99.0;
  const auto r = check_B1(kLoc, ParameterMultiset(grid), 100000, 3);
  const double expected = std::expm1(1.0 / 9801.0);
  CHECK(expected == doctest::Approx(1.02e-4).epsilon(0.01));
  CHECK(r.max_ratio_variance.value == doctest::Approx(expected).epsilon(0.03));
  CHECK(r.implied_V == doctest::Approx(1.02).epsilon(0.03));
  CHECK(r.ratio_variances.size() == 99);

  CHECK_THROWS_AS(check_B1(kLoc, ParameterMultiset({1.0}), 100, 1), ContractError);
}

TEST_CASE("two-valued variance condition") {
  const auto same = check_two_valued_condition(kLoc, 0.5, 0.5, 1000, 1);
  CHECK(same.under_0.variance.value == 0.0);
  CHECK(same.under_1.variance.value == 0.0);
  CHECK_FALSE(same.flagged());

  const auto loc = check_two_valued_condition(kLoc, 0.0, 1.0, 100000, 2);
  CHECK(within(loc.under_0.variance, std::exp(1.0) - 1.0));
  CHECK(within(loc.under_1.variance, std::exp(1.0) - 1.0));
  CHECK(loc.under_0.trajectory.size() == 5);
  CHECK_FALSE(loc.flagged());

  const auto scale = check_two_valued_condition(Family::gaussian_scale(), 1.0, 3.0, 100000, 3, 4);
  CHECK(scale.under_0.heavy_tail);
  CHECK(scale.flagged());
}
