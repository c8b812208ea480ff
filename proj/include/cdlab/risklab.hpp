#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cdlab/families.hpp"
#include "cdlab/oracles.hpp"
#include "cdlab/parallel.hpp"

namespace cdlab {

enum class Engine { Enumeration, Permanent, TwoValued };

std::string to_string(Engine engine);
std::optional<Engine> parse_engine(const std::string& name);

/// Monte Carlo estimate of a total (summed over coordinates) risk.
struct RiskEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t reps = 0;
  std::uint64_t master_seed = 0;
};

struct GapReport {
  std::size_t n = 0;
  RiskEstimate gap_sq;     // E ||simple - PI||^2
  RiskEstimate risk_s;     // E ||simple - M||^2
  RiskEstimate risk_pi;    // E ||PI - M||^2
  RiskEstimate risk_diff;  // paired difference; mean is exactly risk_s.mean - risk_pi.mean
  double pythagoras_residual = 0.0;
  double pythagoras_stderr = 0.0;  // standard error of the per-replication residual
};

/// One draw from the permutation model: labels[i] = mu_{pi(i)} for a
/// uniform random permutation pi, ys[i] ~ F_{labels[i]} independently.
struct Instance {
  std::vector<double> labels;
  std::vector<double> ys;
};

/// Replication `rep` of the stream keyed by `seed`.
Instance draw_instance(const Family& family, const ParameterMultiset& mus, std::uint64_t seed,
                       std::uint64_t rep = 0);

/// Throws CapacityError (or ContractError for a non-two-valued multiset
/// under Engine::TwoValued) when the engine cannot handle `mus`.
void require_engine_capacity(Engine engine, const ParameterMultiset& mus);

/// Paired (common random numbers) estimate of both oracle risks and of the
/// squared distance between the rules.
GapReport mc_gap(const Family& family, const ParameterMultiset& mus, Engine engine,
                 std::size_t reps, std::uint64_t seed, Parallel par = {});

// Deterministic recipes for the parameter multiset at each size n.
struct ExplicitMus {
  std::vector<double> values;
};
struct IidUniformMus {
  double half_width = 1.0;  // mu_j ~ U[-A, A]
  std::uint64_t seed = 0;
};
struct TwoValuedMus {
  double mu0 = 0.0;
  double mu1 = 1.0;
  double gamma = 0.5;  // K = floor(gamma n)
};
struct ConstantMus {
  double value = 0.0;
};
using MusGenerator = std::variant<ExplicitMus, IidUniformMus, TwoValuedMus, ConstantMus>;

ParameterMultiset generate_mus(const MusGenerator& generator, std::size_t n);

struct GapCurveRow {
  std::size_t n = 0;
  GapReport report;
};

/// mc_gap at each n of the grid, all rows sharing the master seed.
std::vector<GapCurveRow> gap_curve(const Family& family, const MusGenerator& generator,
                                   const std::vector<std::size_t>& n_grid, Engine engine,
                                   std::size_t reps, std::uint64_t seed, Parallel par = {});

// ---------------------------------------------------------------------------
// Condition diagnostics. The checkers report realized quantities; deciding
// whether a sequence of them stays bounded is left to the caller.

struct McEstimate {
  double value = 0.0;
  double standard_error = 0.0;
};

struct G1Report {
  double gamma = 0.1;
  double max_abs_mu = 0.0;
  McEstimate max_second_moment;  // max_{i,j} E_{mu_i} (f_j / f_i)^2
  double argmax_mu_i = 0.0;
  double argmax_mu_j = 0.0;
  McEstimate min_exceed_prob;    // min_{i,j} P_{mu_i}(f_j / f_i > gamma)
  std::size_t values_used = 0;   // distinct parameter values entering the pairs
  bool subsampled = false;
};

/// Distinct parameter values beyond this count are thinned to this many
/// rank-equispaced values (always keeping the extremes).
inline constexpr std::size_t kG1MaxValues = 50;

G1Report check_G1(const Family& family, const ParameterMultiset& mus, double gamma,
                  std::size_t reps, std::uint64_t seed, Parallel par = {});

struct G2Report {
  McEstimate sum_sq_weights;        // E sum_i sum_j p_j(Y_i)^2
  McEstimate inverse_min_weight;    // sum_i E 1 / (n min_j p_j(Y_i))
  McEstimate weighted_inverse_min;  // E sum_i sum_j p_j(Y_i)^2 / (n min_j p_j(Y_i))
  McEstimate first_obs_sum_sq;      // E sum_j p_j(Y_1)^2
  /// (1/n) exp(12 A^2) with A = max |mu|; gaussian-location only.
  std::optional<double> gaussian_bound;
};

G2Report check_G2(const Family& family, const ParameterMultiset& mus, std::size_t reps,
                  std::uint64_t seed, Parallel par = {});

struct B1Report {
  double spread = 0.0;                // A_n = max mu - min mu
  McEstimate max_ratio_variance;      // max_j Var f_{(j+1)} / f_{(j)} (Y), Y ~ F_{mu_(j)}
  std::size_t argmax_index = 0;       // j of the maximizing consecutive pair
  double implied_V = 0.0;             // n^2 * max variance
  std::vector<double> ratio_variances;
};

B1Report check_B1(const Family& family, const ParameterMultiset& mus, std::size_t reps,
                  std::uint64_t seed, Parallel par = {});

struct RatioVarianceCheck {
  McEstimate variance;               // at the requested replication count
  std::vector<double> trajectory;    // estimates at reps, 2 reps, 4 reps, ...
  bool heavy_tail = false;           // some doubling moved the estimate by > 20%
};

struct TwoValuedConditionReport {
  RatioVarianceCheck under_0;  // Var f_1/f_0 (Y), Y ~ F_{mu0}
  RatioVarianceCheck under_1;  // Var f_0/f_1 (Y), Y ~ F_{mu1}
  bool flagged() const noexcept { return under_0.heavy_tail || under_1.heavy_tail; }
};

inline constexpr double kHeavyTailRelativeChange = 0.20;

TwoValuedConditionReport check_two_valued_condition(const Family& family, double mu0, double mu1,
                                                    std::size_t reps, std::uint64_t seed,
                                                    std::size_t doublings = 4);

}  // namespace cdlab
