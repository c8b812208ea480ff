#include "cdlab/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cdlab/error.hpp"

namespace cdlab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Tilted probabilities below this are set to zero. They cannot move P(K) at
// double precision and would otherwise drift into the (slow) subnormal range.
constexpr double kFlushToZero = 1e-280;

double flushed(double x) noexcept { return x < kFlushToZero ? 0.0 : x; }

void require_same_size(const LogLikelihoodMatrix& loglik, const ParameterMultiset& mus,
                       const char* what) {
  if (loglik.size() != mus.size()) {
    throw ContractError(std::string(what) + ": " + std::to_string(loglik.size()) +
                        " observations for " + std::to_string(mus.size()) + " parameters");
  }
}

double logistic(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Posterior mean of a weight vector given in log space.
double weighted_mean(std::span<const double> log_w, std::span<const double> values) {
  const double top = *std::max_element(log_w.begin(), log_w.end());
  double total = 0.0;
  double acc = 0.0;
  for (std::size_t j = 0; j < log_w.size(); ++j) {
    if (log_w[j] == kNegInf) continue;
    const double w = std::exp(log_w[j] - top);
    total += w;
    acc += w * values[j];
  }
  return acc / total;
}

void validate_two_valued(std::span<const double> log_rho, const TwoValuedSpec& spec) {
  if (log_rho.size() != spec.n) {
    throw ContractError("two-valued rule: " + std::to_string(log_rho.size()) +
                        " ratios for n = " + std::to_string(spec.n));
  }
  if (spec.K > spec.n) throw ContractError("two-valued rule: K exceeds n");
  for (double x : log_rho) {
    if (!std::isfinite(x)) throw ContractError("two-valued rule: log ratios must be finite");
  }
}

double two_valued_estimate(const TwoValuedSpec& spec, double prob_one) {
  const double lo = std::min(spec.mu0, spec.mu1);
  const double hi = std::max(spec.mu0, spec.mu1);
  return std::clamp(spec.mu0 + (spec.mu1 - spec.mu0) * prob_one, lo, hi);
}

// Tilt s such that sum_m logistic(s + lr_m) = K. With q_m = logistic(s + lr_m)
// the tilted table P(k) = t^k e_k(rho) / prod_m (1 + t rho_m), t = e^s, is the
// Poisson-binomial law of the number of label-1 observations; its mode sits
// at K, so P(K - 1) and P(K) are of order 1/sqrt(n) rather than e^{+-n}.
double solve_tilt(std::span<const double> lr, std::size_t K) {
  const auto [lo_it, hi_it] = std::minmax_element(lr.begin(), lr.end());
  double lo = -*hi_it - 50.0;
  double hi = -*lo_it + 50.0;
  const double target = static_cast<double>(K);
  double s = std::log(target / static_cast<double>(lr.size() - K));
  if (s <= lo || s >= hi) s = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    double sum = 0.0;
    double slope = 0.0;
    for (double x : lr) {
      const double q = logistic(s + x);
      sum += q;
      slope += q * (1.0 - q);
    }
    const double excess = sum - target;
    if (std::abs(excess) < 1e-10 * target) break;
    if (excess > 0.0) hi = s; else lo = s;
    double next = slope > 0.0 ? s - excess / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == s) break;
    s = next;
  }
  return s;
}

// Tilted table for all observations except `skip`, truncated at degree `top`.
std::vector<double> tilted_table(std::span<const double> q, std::span<const double> qc,
                                 std::size_t top, std::size_t skip) {
  std::vector<double> p(top + 1, 0.0), next(top + 1, 0.0);
  p[0] = 1.0;
  std::size_t seen = 0;
  for (std::size_t m = 0; m < q.size(); ++m) {
    if (m == skip) continue;
    ++seen;
    const std::size_t hi = std::min(seen, top);
    const double stay = qc[m];
    const double move = q[m];
    next[0] = flushed(stay * p[0]);
    for (std::size_t k = 1; k <= hi; ++k) next[k] = flushed(stay * p[k] + move * p[k - 1]);
    std::swap(p, next);
  }
  return p;
}

// Digits lost when `result` is obtained by subtracting from `minuend`.
double lost_digits(double minuend, double result) {
  if (!(minuend > 0.0)) return std::numeric_limits<double>::infinity();
  if (!(result > 0.0)) return std::numeric_limits<double>::infinity();
  return std::log10(minuend / result);
}

EstimateVector two_valued_posterior(std::span<const double> lr, const TwoValuedSpec& spec,
                                    const TwoValuedOptions& options) {
  const std::size_t n = spec.n;
  const std::size_t K = spec.K;
  const double s = solve_tilt(lr, K);
  std::vector<double> q(n), qc(n);
  for (std::size_t m = 0; m < n; ++m) {
    q[m] = logistic(s + lr[m]);
    qc[m] = logistic(-(s + lr[m]));
  }
  const std::vector<double> full = tilted_table(q, qc, n, n);

  EstimateVector out{std::vector<double>(n)};
  std::vector<double> loo(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    // loo[k] = tilted probability that the others hold exactly k label-1s.
    double worst = 0.0;
    if (q[i] <= 0.5) {
      const double scale = 1.0 / qc[i];
      loo[0] = flushed(full[0] * scale);
      for (std::size_t k = 1; k <= K; ++k) {
        const double numerator = full[k] - q[i] * loo[k - 1];
        if (k + 1 >= K) worst = std::max(worst, lost_digits(full[k], numerator));
        loo[k] = flushed(numerator * scale);
      }
    } else {
      const double scale = 1.0 / q[i];
      loo[n - 1] = flushed(full[n] * scale);
      for (std::size_t k = n - 1; k >= K; --k) {
        const double numerator = full[k] - qc[i] * loo[k];
        if (k <= K + 1) worst = std::max(worst, lost_digits(full[k], numerator));
        loo[k - 1] = flushed(numerator * scale);
      }
    }
    double with_one = loo[K - 1];
    double without = loo[K];
    if (worst > options.max_cancellation_digits) {
      const std::vector<double> fresh = tilted_table(q, qc, K, i);
      with_one = fresh[K - 1];
      without = fresh[K];
      if (options.stats) ++options.stats->recomputed;
    } else if (options.stats) {
      ++options.stats->downdated;
    }
    const double a = q[i] * with_one;
    const double b = qc[i] * without;
    out.values[i] = two_valued_estimate(spec, a / (a + b));
  }
  return out;
}

}  // namespace

WeightMatrix weights(const LogLikelihoodMatrix& loglik) {
  const std::size_t n = loglik.size();
  WeightMatrix w{Matrix<double>(n, n)};
  for (std::size_t i = 0; i < n; ++i) {
    auto row = loglik.row(i);
    const double top = *std::max_element(row.begin(), row.end());
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      w.p(i, j) = std::exp(row[j] - top);
      total += w.p(i, j);
    }
    for (std::size_t j = 0; j < n; ++j) w.p(i, j) /= total;
  }
  return w;
}

EstimateVector simple_rule(const LogLikelihoodMatrix& loglik, const ParameterMultiset& mus) {
  require_same_size(loglik, mus, "simple_rule");
  const std::size_t n = loglik.size();
  EstimateVector out{std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    out.values[i] = std::clamp(weighted_mean(loglik.row(i), mus.values()), mus.min(), mus.max());
  }
  return out;
}

EstimateVector pi_rule_enum(const LogLikelihoodMatrix& loglik, const ParameterMultiset& mus) {
  return enumerate_posterior(loglik, mus);
}

EstimateVector pi_rule_from_minors(const LogLikelihoodMatrix& loglik, const ParameterMultiset& mus,
                                   const Matrix<LogValue>& minors) {
  require_same_size(loglik, mus, "pi_rule_from_minors");
  const std::size_t n = loglik.size();
  if (minors.rows() != n || minors.cols() != n) {
    throw ContractError("pi_rule_from_minors: minor table has the wrong shape");
  }
  EstimateVector out{std::vector<double>(n)};
  std::vector<double> log_w(n);
  for (std::size_t i = 0; i < n; ++i) {
    // The common 1/(n-1)! factor of every f_{-j}(Y_{-i}) cancels here.
    for (std::size_t j = 0; j < n; ++j) {
      const LogValue& minor = minors(i, j);
      log_w[j] = minor.sign > 0 ? loglik(i, j) + minor.log_abs : kNegInf;
    }
    out.values[i] = std::clamp(weighted_mean(log_w, mus.values()), mus.min(), mus.max());
  }
  return out;
}

EstimateVector pi_rule_permanent(const LogLikelihoodMatrix& loglik, const ParameterMultiset& mus,
                                 Parallel par) {
  require_same_size(loglik, mus, "pi_rule_permanent");
  const std::size_t n = loglik.size();
  if (n < 2 || n > kMaxMinorTableSize) {
    throw CapacityError("pi_rule_permanent supports 2 <= n <= " +
                        std::to_string(kMaxMinorTableSize) + ", got n = " + std::to_string(n));
  }
  return detail::run_canonical(loglik.entries(), [&](const Matrix<double>& sorted) {
    const LogLikelihoodMatrix canonical(sorted);
    return pi_rule_from_minors(canonical, mus, permanental_minors_log(sorted, par));
  });
}

EstimateVector pi_rule_two_valued(std::span<const double> log_rho, const TwoValuedSpec& spec,
                                  const TwoValuedOptions& options) {
  validate_two_valued(log_rho, spec);
  if (spec.K == 0) return EstimateVector{std::vector<double>(spec.n, spec.mu0)};
  if (spec.K == spec.n) return EstimateVector{std::vector<double>(spec.n, spec.mu1)};
  Matrix<double> column(spec.n, 1);
  for (std::size_t m = 0; m < spec.n; ++m) column(m, 0) = log_rho[m];
  return detail::run_canonical(column, [&](const Matrix<double>& sorted) {
    return two_valued_posterior(sorted.data(), spec, options);
  });
}

EstimateVector simple_rule_two_valued(std::span<const double> log_rho, const TwoValuedSpec& spec) {
  validate_two_valued(log_rho, spec);
  if (spec.K == 0) return EstimateVector{std::vector<double>(spec.n, spec.mu0)};
  if (spec.K == spec.n) return EstimateVector{std::vector<double>(spec.n, spec.mu1)};
  const double log_odds = std::log(static_cast<double>(spec.K)) -
                          std::log(static_cast<double>(spec.n - spec.K));
  EstimateVector out{std::vector<double>(spec.n)};
  for (std::size_t i = 0; i < spec.n; ++i) {
    out.values[i] = two_valued_estimate(spec, logistic(log_rho[i] + log_odds));
  }
  return out;
}

std::optional<TwoValuedSpec> two_valued_spec(const ParameterMultiset& mus) {
  const double lo = mus.min();
  const double hi = mus.max();
  std::size_t K = 0;
  for (double v : mus.values()) {
    if (v == hi) {
      ++K;
    } else if (v != lo) {
      return std::nullopt;
    }
  }
  return TwoValuedSpec{K, mus.size(), lo, hi};
}

std::vector<double> log_likelihood_ratios(const Family& family, const TwoValuedSpec& spec,
                                          std::span<const double> ys) {
  std::vector<double> out(ys.size());
  for (std::size_t m = 0; m < ys.size(); ++m) {
    out[m] = family.log_density(spec.mu1, ys[m]) - family.log_density(spec.mu0, ys[m]);
  }
  return out;
}

}  // namespace cdlab
