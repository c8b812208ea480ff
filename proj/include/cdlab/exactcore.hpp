#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "cdlab/families.hpp"
#include "cdlab/matrix.hpp"
#include "cdlab/parallel.hpp"

namespace cdlab {

// Hard size limits of the exact kernels.
inline constexpr std::size_t kMaxEnumerationSize = 8;   // n! permutations
inline constexpr std::size_t kMaxPermanentSize = 25;    // one O(2^n n) Ryser sweep
inline constexpr std::size_t kMaxMinorTableSize = 17;   // n^2 sweeps of size n - 1

/// Stand-in for log(0) inside the permanent kernels.
inline constexpr double kLogZeroFloor = -745.0;

/// Signed number carried as (sign, log|x|).
struct LogValue {
  double log_abs = 0.0;
  int sign = 0;  // -1, 0 or +1; zero iff the value is exactly 0

  static LogValue zero() noexcept { return {0.0, 0}; }
  static LogValue from_log(double log_abs) noexcept { return {log_abs, 1}; }

  double value() const noexcept;

  friend bool operator==(const LogValue&, const LogValue&) = default;
};

/// log_e[k] = log e_k(rho_1, ..., rho_n) for the positive reals rho.
struct EspTable {
  std::vector<double> log_e;

  std::size_t degree() const noexcept { return log_e.empty() ? 0 : log_e.size() - 1; }
};

/// log perm(exp(log_entries)) by Ryser's formula over Gray-ordered column
/// subsets. Rows are shifted by their maximum before exponentiation and the
/// signed terms are accumulated in extended precision with Neumaier
/// compensation. -inf entries are floored at kLogZeroFloor.
LogValue permanent_log(const Matrix<double>& log_entries);

/// out(i, j) = log perm of log_entries with row i and column j deleted.
/// Each minor is an independent Ryser sweep, so the table is identical for
/// any worker count.
Matrix<LogValue> permanental_minors_log(const Matrix<double>& log_entries, Parallel par = {});

/// Elementary symmetric polynomials of exp(log_rhos) by the one-element-at-a-
/// time recurrence e_k <- e_k + rho_m e_{k-1}, evaluated with log-sum-exp.
/// With max_degree set only e_0..e_max_degree are formed (O(n K) work).
EspTable esp_log(std::span<const double> log_rhos,
                 std::optional<std::size_t> max_degree = std::nullopt);

/// Posterior mean of the labels under a uniformly random assignment of the
/// multiset to the observations, by summing over all n! permutations.
EstimateVector enumerate_posterior(const LogLikelihoodMatrix& loglik, const ParameterMultiset& mus);

/// log perm by direct n!-term expansion. Reference implementation for
/// validating the Ryser kernel; limited to kMaxEnumerationSize + 2.
LogValue permanent_by_enumeration(const Matrix<double>& log_entries);

namespace detail {

/// Lexicographic order of the rows of `m` (stable). Engines run on the
/// reordered matrix so that their output is exactly covariant under row
/// permutations.
std::vector<std::size_t> canonical_row_order(const Matrix<double>& m);

/// Evaluates `engine` on the canonically ordered rows and maps the result
/// back. Rows with identical content receive bitwise identical outputs.
template <class Engine>
EstimateVector run_canonical(const Matrix<double>& m, Engine&& engine);

}  // namespace detail

}  // namespace cdlab

#include "cdlab/detail/canonical.ipp"
