#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "cdlab/exactcore.hpp"
#include "cdlab/families.hpp"
#include "cdlab/matrix.hpp"
#include "cdlab/parallel.hpp"

namespace cdlab {

/// p(i, j) = f_j(Y_i) / sum_k f_k(Y_i): the single-observation posterior
/// weight that observation i carries mu_j. Rows sum to one.
struct WeightMatrix {
  Matrix<double> p;
};

/// A multiset with (at most) two distinct values: K copies of mu1 and
/// n - K copies of mu0.
struct TwoValuedSpec {
  std::size_t K = 0;
  std::size_t n = 0;
  double mu0 = 0.0;
  double mu1 = 1.0;
};

/// Counts how each leave-one-out table in pi_rule_two_valued was formed.
struct TwoValuedStats {
  std::size_t downdated = 0;
  std::size_t recomputed = 0;
};

struct TwoValuedOptions {
  /// Decimal digits the downdating subtraction may lose before the
  /// leave-one-out table is rebuilt from scratch.
  double max_cancellation_digits = 6.0;
  TwoValuedStats* stats = nullptr;
};

WeightMatrix weights(const LogLikelihoodMatrix& loglik);

/// Best simple symmetric rule: mu_hat_i = sum_j mu_j p_j(Y_i).
EstimateVector simple_rule(const LogLikelihoodMatrix& loglik, const ParameterMultiset& mus);

/// Best permutation-invariant rule by enumerating all n! assignments (n <= 8).
EstimateVector pi_rule_enum(const LogLikelihoodMatrix& loglik, const ParameterMultiset& mus);

/// Best permutation-invariant rule from permanental minors (2 <= n <= 17):
/// mu_hat_i is proportional to sum_j mu_j f_j(Y_i) perm(minor_ij).
EstimateVector pi_rule_permanent(const LogLikelihoodMatrix& loglik, const ParameterMultiset& mus,
                                 Parallel par = {});

/// Combination step of pi_rule_permanent for a precomputed minor table,
/// applied in the row order given. Exposed for the engine validation
/// harness.
EstimateVector pi_rule_from_minors(const LogLikelihoodMatrix& loglik, const ParameterMultiset& mus,
                                   const Matrix<LogValue>& minors);

/// Best permutation-invariant rule when the multiset has two values.
/// log_rho[m] = log f_1(Y_m) - log f_0(Y_m).
EstimateVector pi_rule_two_valued(std::span<const double> log_rho, const TwoValuedSpec& spec,
                                  const TwoValuedOptions& options = {});

/// Best simple rule for a two-valued multiset:
/// P(M_i = 1 | Y_i) = K rho_i / (K rho_i + n - K).
EstimateVector simple_rule_two_valued(std::span<const double> log_rho, const TwoValuedSpec& spec);

/// The two-valued description of `mus`, or nullopt when it has more than
/// two distinct values. An all-equal multiset maps to K = n.
std::optional<TwoValuedSpec> two_valued_spec(const ParameterMultiset& mus);

/// log f_{mu1}(y_m) - log f_{mu0}(y_m) for each observation.
std::vector<double> log_likelihood_ratios(const Family& family, const TwoValuedSpec& spec,
                                          std::span<const double> ys);

}  // namespace cdlab
