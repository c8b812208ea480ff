#include "cdlab/risklab.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cdlab/error.hpp"
#include "cdlab/exactcore.hpp"

namespace cdlab {

namespace {

struct Moments {
  double mean = 0.0;
  double standard_error = 0.0;
};

// Sample mean and its standard error (n - 1 denominator), both reduced
// pairwise in index order.
Moments mean_and_stderr(std::span<const double> xs) {
  const auto count = static_cast<double>(xs.size());
  const double mean = pairwise_sum(xs) / count;
  std::vector<double> dev(xs.size());
  for (std::size_t k = 0; k < xs.size(); ++k) dev[k] = (xs[k] - mean) * (xs[k] - mean);
  const double var = xs.size() > 1 ? pairwise_sum(dev) / (count - 1.0) : 0.0;
  return {mean, std::sqrt(var / count)};
}

McEstimate to_estimate(const Moments& m) { return {m.mean, m.standard_error}; }

// Unbiased sample variance with the large-sample standard error
// sqrt((m4 - s^4) / N).
McEstimate variance_estimate(std::span<const double> xs) {
  const auto count = static_cast<double>(xs.size());
  const double mean = pairwise_sum(xs) / count;
  std::vector<double> sq(xs.size()), quad(xs.size());
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double d = xs[k] - mean;
    sq[k] = d * d;
    quad[k] = sq[k] * sq[k];
  }
  const double m2 = pairwise_sum(sq) / count;
  const double m4 = pairwise_sum(quad) / count;
  const double var = pairwise_sum(sq) / (count - 1.0);
  return {var, std::sqrt(std::max(m4 - m2 * m2, 0.0) / count)};
}

void require_reps(std::size_t reps, const char* what) {
  if (reps < 2) {
    throw ContractError(std::string(what) + ": need at least 2 replications for a standard error");
  }
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

RiskEstimate to_risk(const Moments& m, std::size_t reps, std::uint64_t seed) {
  return {m.mean, m.standard_error, reps, seed};
}

}  // namespace

std::string to_string(Engine engine) {
  switch (engine) {
    case Engine::Enumeration: return "enum";
    case Engine::Permanent: return "permanent";
    case Engine::TwoValued: return "two-valued";
  }
  return "unknown";
}

std::optional<Engine> parse_engine(const std::string& name) {
  if (name == "enum") return Engine::Enumeration;
  if (name == "permanent") return Engine::Permanent;
  if (name == "two-valued") return Engine::TwoValued;
  return std::nullopt;
}

Instance draw_instance(const Family& family, const ParameterMultiset& mus, std::uint64_t seed,
                       std::uint64_t rep) {
  const std::size_t n = mus.size();
  Stream stream(seed, rep);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t i = n; i-- > 1;) std::swap(perm[i], perm[stream.below(i + 1)]);
  Instance inst{std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) inst.labels[i] = mus[perm[i]];
  for (std::size_t i = 0; i < n; ++i) inst.ys[i] = family.sample(inst.labels[i], stream);
  return inst;
}

void require_engine_capacity(Engine engine, const ParameterMultiset& mus) {
  const std::size_t n = mus.size();
  switch (engine) {
    case Engine::Enumeration:
      if (n > kMaxEnumerationSize) {
        throw CapacityError("enum engine supports n <= " + std::to_string(kMaxEnumerationSize) +
                            ", got n = " + std::to_string(n));
      }
      break;
    case Engine::Permanent:
      if (n < 2 || n > kMaxMinorTableSize) {
        throw CapacityError("permanent engine supports 2 <= n <= " +
                            std::to_string(kMaxMinorTableSize) + ", got n = " + std::to_string(n));
      }
      break;
    case Engine::TwoValued:
      if (!two_valued_spec(mus)) {
        throw ContractError("two-valued engine needs a multiset with at most two distinct values");
      }
      break;
  }
}

GapReport mc_gap(const Family& family, const ParameterMultiset& mus, Engine engine,
                 std::size_t reps, std::uint64_t seed, Parallel par) {
  require_reps(reps, "mc_gap");
  require_engine_capacity(engine, mus);
  mus.require_admissible(family);
  const std::optional<TwoValuedSpec> spec = two_valued_spec(mus);

  std::vector<double> gap(reps), loss_s(reps), loss_pi(reps), diff(reps), residual(reps);
  parallel_for(reps, par, [&](std::size_t r) {
    const Instance inst = draw_instance(family, mus, seed, r);
    EstimateVector s, pi;
    if (engine == Engine::TwoValued) {
      const std::vector<double> lr = log_likelihood_ratios(family, *spec, inst.ys);
      s = simple_rule_two_valued(lr, *spec);
      pi = pi_rule_two_valued(lr, *spec);
    } else {
      const LogLikelihoodMatrix loglik = loglik_matrix(family, mus, inst.ys);
      s = simple_rule(loglik, mus);
      pi = engine == Engine::Enumeration ? pi_rule_enum(loglik, mus) : pi_rule_permanent(loglik, mus);
    }
    gap[r] = squared_distance(s.values, pi.values);
    loss_s[r] = squared_distance(s.values, inst.labels);
    loss_pi[r] = squared_distance(pi.values, inst.labels);
    diff[r] = loss_s[r] - loss_pi[r];
    residual[r] = diff[r] - gap[r];
  });

  GapReport report;
  report.n = mus.size();
  report.gap_sq = to_risk(mean_and_stderr(gap), reps, seed);
  report.risk_s = to_risk(mean_and_stderr(loss_s), reps, seed);
  report.risk_pi = to_risk(mean_and_stderr(loss_pi), reps, seed);
  report.risk_diff = to_risk(mean_and_stderr(diff), reps, seed);
  report.risk_diff.mean = report.risk_s.mean - report.risk_pi.mean;
  report.pythagoras_residual = std::abs(report.risk_diff.mean - report.gap_sq.mean);
  report.pythagoras_stderr = mean_and_stderr(residual).standard_error;
  return report;
}

ParameterMultiset generate_mus(const MusGenerator& generator, std::size_t n) {
  if (n == 0) throw ContractError("generate_mus: n must be positive");
  return std::visit(
      [n](const auto& g) -> ParameterMultiset {
        using G = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<G, ExplicitMus>) {
          if (g.values.size() != n) {
            throw ContractError("explicit multiset has " + std::to_string(g.values.size()) +
                                " values, requested n = " + std::to_string(n));
          }
          return ParameterMultiset(g.values);
        } else if constexpr (std::is_same_v<G, IidUniformMus>) {
          Stream stream(g.seed, n);
          std::vector<double> values(n);
          for (double& v : values) v = -g.half_width + 2.0 * g.half_width * stream.uniform();
          return ParameterMultiset(std::move(values));
        } else if constexpr (std::is_same_v<G, TwoValuedMus>) {
          if (!(g.gamma >= 0.0 && g.gamma <= 1.0)) {
            throw ContractError("two-valued generator: gamma must lie in [0, 1]");
          }
          const auto K = static_cast<std::size_t>(std::floor(g.gamma * static_cast<double>(n) + 1e-9));
          std::vector<double> values(n, g.mu0);
          std::fill(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(std::min(K, n)), g.mu1);
          return ParameterMultiset(std::move(values));
        } else {
          return ParameterMultiset(std::vector<double>(n, g.value));
        }
      },
      generator);
}

std::vector<GapCurveRow> gap_curve(const Family& family, const MusGenerator& generator,
                                   const std::vector<std::size_t>& n_grid, Engine engine,
                                   std::size_t reps, std::uint64_t seed, Parallel par) {
  // Validate the whole grid before spending time on any row.
  std::vector<ParameterMultiset> multisets;
  multisets.reserve(n_grid.size());
  for (std::size_t n : n_grid) {
    multisets.push_back(generate_mus(generator, n));
    require_engine_capacity(engine, multisets.back());
  }
  std::vector<GapCurveRow> rows;
  rows.reserve(n_grid.size());
  for (std::size_t k = 0; k < n_grid.size(); ++k) {
    rows.push_back({n_grid[k], mc_gap(family, multisets[k], engine, reps, seed, par)});
  }
  return rows;
}

G1Report check_G1(const Family& family, const ParameterMultiset& mus, double gamma,
                  std::size_t reps, std::uint64_t seed, Parallel par) {
  if (!(gamma > 0.0)) throw ContractError("check_G1: gamma must be positive");
  require_reps(reps, "check_G1");
  mus.require_admissible(family);

  std::vector<double> distinct(mus.values().begin(), mus.values().end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  G1Report report;
  report.gamma = gamma;
  report.max_abs_mu = mus.max_abs();
  if (distinct.size() > kG1MaxValues) {
    std::vector<double> thinned(kG1MaxValues);
    for (std::size_t k = 0; k < kG1MaxValues; ++k) {
      thinned[k] = distinct[(k * (distinct.size() - 1)) / (kG1MaxValues - 1)];
    }
    distinct = std::move(thinned);
    report.subsampled = true;
  }
  report.values_used = distinct.size();
  const std::size_t d = distinct.size();

  struct PairStats {
    McEstimate second_moment;
    McEstimate exceed_prob;
  };
  Matrix<PairStats> stats(d, d);
  parallel_for(d, par, [&](std::size_t i) {
    Stream stream(seed, i);
    std::vector<double> ys(reps), base(reps);
    for (std::size_t r = 0; r < reps; ++r) {
      ys[r] = family.sample(distinct[i], stream);
      base[r] = family.log_density(distinct[i], ys[r]);
    }
    std::vector<double> sq(reps), hit(reps);
    for (std::size_t j = 0; j < d; ++j) {
      for (std::size_t r = 0; r < reps; ++r) {
        const double ratio = std::exp(family.log_density(distinct[j], ys[r]) - base[r]);
        sq[r] = ratio * ratio;
        hit[r] = ratio > gamma ? 1.0 : 0.0;
      }
      stats(i, j).second_moment = to_estimate(mean_and_stderr(sq));
      stats(i, j).exceed_prob = to_estimate(mean_and_stderr(hit));
    }
  });

  report.max_second_moment = stats(0, 0).second_moment;
  report.min_exceed_prob = stats(0, 0).exceed_prob;
  report.argmax_mu_i = report.argmax_mu_j = distinct[0];
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      if (stats(i, j).second_moment.value > report.max_second_moment.value) {
        report.max_second_moment = stats(i, j).second_moment;
        report.argmax_mu_i = distinct[i];
        report.argmax_mu_j = distinct[j];
      }
      if (stats(i, j).exceed_prob.value < report.min_exceed_prob.value) {
        report.min_exceed_prob = stats(i, j).exceed_prob;
      }
    }
  }
  return report;
}

G2Report check_G2(const Family& family, const ParameterMultiset& mus, std::size_t reps,
                  std::uint64_t seed, Parallel par) {
  require_reps(reps, "check_G2");
  mus.require_admissible(family);
  const std::size_t n = mus.size();
  const auto nd = static_cast<double>(n);

  std::vector<double> q1(reps), q2(reps), q3(reps), first(reps);
  parallel_for(reps, par, [&](std::size_t r) {
    const Instance inst = draw_instance(family, mus, seed, r);
    const WeightMatrix w = weights(loglik_matrix(family, mus, inst.ys));
    double sum_sq = 0.0, inv_min = 0.0, weighted = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      auto row = w.p.row(i);
      double row_sq = 0.0;
      for (double p : row) row_sq += p * p;
      const double min_p = *std::min_element(row.begin(), row.end());
      sum_sq += row_sq;
      inv_min += 1.0 / (nd * min_p);
      weighted += row_sq / (nd * min_p);
      if (i == 0) first[r] = row_sq;
    }
    q1[r] = sum_sq;
    q2[r] = inv_min;
    q3[r] = weighted;
  });

  G2Report report;
  report.sum_sq_weights = to_estimate(mean_and_stderr(q1));
  report.inverse_min_weight = to_estimate(mean_and_stderr(q2));
  report.weighted_inverse_min = to_estimate(mean_and_stderr(q3));
  report.first_obs_sum_sq = to_estimate(mean_and_stderr(first));
  if (family.kind() == FamilyKind::GaussianLocation) {
    const double a = mus.max_abs();
    report.gaussian_bound = std::exp(12.0 * a * a) / nd;
  }
  return report;
}

B1Report check_B1(const Family& family, const ParameterMultiset& mus, std::size_t reps,
                  std::uint64_t seed, Parallel par) {
  const std::size_t n = mus.size();
  if (n < 2) throw ContractError("check_B1: need at least two parameters");
  require_reps(reps, "check_B1");
  mus.require_admissible(family);

  std::vector<McEstimate> per_pair(n - 1);
  parallel_for(n - 1, par, [&](std::size_t j) {
    Stream stream(seed, j);
    std::vector<double> ratios(reps);
    for (std::size_t r = 0; r < reps; ++r) {
      const double y = family.sample(mus[j], stream);
      ratios[r] = std::exp(family.log_density(mus[j + 1], y) - family.log_density(mus[j], y));
    }
    per_pair[j] = variance_estimate(ratios);
  });

  B1Report report;
  report.spread = mus.max() - mus.min();
  report.ratio_variances.reserve(n - 1);
  for (std::size_t j = 0; j < n - 1; ++j) {
    report.ratio_variances.push_back(per_pair[j].value);
    if (j == 0 || per_pair[j].value > report.max_ratio_variance.value) {
      report.max_ratio_variance = per_pair[j];
      report.argmax_index = j;
    }
  }
  report.implied_V = static_cast<double>(n) * static_cast<double>(n) * report.max_ratio_variance.value;
  return report;
}

namespace {

RatioVarianceCheck ratio_variance_check(const Family& family, double from, double to,
                                        std::size_t reps, std::uint64_t seed,
                                        std::uint64_t stream_id, std::size_t doublings) {
  const std::size_t total = reps << doublings;
  Stream stream(seed, stream_id);
  std::vector<double> ratios(total);
  for (double& x : ratios) {
    const double y = family.sample(from, stream);
    x = std::exp(family.log_density(to, y) - family.log_density(from, y));
  }
  RatioVarianceCheck check;
  const std::span<const double> all(ratios);
  check.variance = variance_estimate(all.first(reps));
  check.trajectory.push_back(check.variance.value);
  for (std::size_t k = 1; k <= doublings; ++k) {
    const double previous = check.trajectory.back();
    const double current = variance_estimate(all.first(reps << k)).value;
    check.trajectory.push_back(current);
    const double change = std::abs(current - previous);
    if (previous == 0.0 ? change > 0.0 : change > kHeavyTailRelativeChange * std::abs(previous)) {
      check.heavy_tail = true;
    }
  }
  return check;
}

}  // namespace

TwoValuedConditionReport check_two_valued_condition(const Family& family, double mu0, double mu1,
                                                    std::size_t reps, std::uint64_t seed,
                                                    std::size_t doublings) {
  require_reps(reps, "check_two_valued_condition");
  family.require_admissible(mu0);
  family.require_admissible(mu1);
  if (doublings > 20) throw ContractError("check_two_valued_condition: at most 20 doublings");
  TwoValuedConditionReport report;
  report.under_0 = ratio_variance_check(family, mu0, mu1, reps, seed, 0, doublings);
  report.under_1 = ratio_variance_check(family, mu1, mu0, reps, seed, 1, doublings);
  return report;
}

}  // namespace cdlab
