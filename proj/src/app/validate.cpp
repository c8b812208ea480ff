#include "cdlab/app/validate.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <numeric>

#include "cdlab/error.hpp"
#include "cdlab/exactcore.hpp"
#include "cdlab/oracles.hpp"
#include "cdlab/risklab.hpp"
#include "json.hpp"

namespace cdlab::app {

using nlohmann::json;

namespace {

constexpr double kPermanentTolerance = 1e-10;
constexpr double kEngineTolerance = 1e-9;
constexpr double kFaultSize = 1e-6;

// Distinct substream families per property so that instances do not overlap.
enum StreamTag : std::uint64_t {
  kTagPermanent = 1ULL << 40,
  kTagEngines = 2ULL << 40,
  kTagCovariance = 3ULL << 40,
  kTagEsp = 4ULL << 40,
};

double max_abs_diff(const EstimateVector& a, const EstimateVector& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

double log_relative_error(const LogValue& a, const LogValue& b) {
  if (a.sign != b.sign) return std::numeric_limits<double>::infinity();
  if (a.sign == 0) return 0.0;
  return std::abs(std::expm1(a.log_abs - b.log_abs));
}

json matrix_json(const Matrix<double>& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    rows.push_back(std::vector<double>(m.row(i).begin(), m.row(i).end()));
  }
  return rows;
}

struct Recorder {
  PropertyOutcome outcome;

  void observe(double discrepancy, const std::function<json()>& describe) {
    ++outcome.checks;
    outcome.worst = std::max(outcome.worst, discrepancy);
    if (!(discrepancy <= outcome.tolerance) && outcome.passed) {
      outcome.passed = false;
      json replay = describe();
      replay["property"] = outcome.name;
      replay["discrepancy"] = discrepancy;
      replay["tolerance"] = outcome.tolerance;
      outcome.replay = replay.dump(2);
    }
  }
};

ParameterMultiset random_mus(Stream& stream, std::size_t n, bool two_valued) {
  std::vector<double> values(n);
  if (two_valued) {
    const std::size_t K = stream.below(n + 1);
    for (std::size_t j = 0; j < n; ++j) values[j] = j < K ? 1.0 : 0.0;
  } else {
    for (double& v : values) v = -1.0 + 2.0 * stream.uniform();
  }
  return ParameterMultiset(std::move(values));
}

PropertyOutcome permanent_vs_naive(const ValidateOptions& opt) {
  Recorder rec{{"permanent-vs-naive", true, 0, 0.0, kPermanentTolerance, {}}};
  for (std::size_t t = 0; t < opt.trials; ++t) {
    Stream stream(opt.seed, kTagPermanent + t);
    const std::size_t n = 1 + stream.below(opt.max_n);
    Matrix<double> m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) m(i, j) = -3.0 + 4.0 * stream.uniform();
    }
    const LogValue ryser = permanent_log(m);
    const LogValue naive = permanent_by_enumeration(m);
    rec.observe(log_relative_error(ryser, naive), [&] {
      return json{{"trial", t}, {"log_entries", matrix_json(m)},
                  {"ryser_log", ryser.log_abs}, {"naive_log", naive.log_abs}};
    });
  }
  return rec.outcome;
}

PropertyOutcome engine_agreement(const ValidateOptions& opt) {
  Recorder rec{{"engine-agreement", true, 0, 0.0, kEngineTolerance, {}}};
  const Family family = Family::gaussian_location();
  for (std::size_t t = 0; t < opt.trials; ++t) {
    Stream stream(opt.seed, kTagEngines + t);
    const std::size_t n = 2 + stream.below(opt.max_n - 1);
    const bool two_valued = t % 2 == 1;
    const ParameterMultiset mus = random_mus(stream, n, two_valued);
    const Instance inst = draw_instance(family, mus, opt.seed ^ kTagEngines, t);
    const LogLikelihoodMatrix loglik = loglik_matrix(family, mus, inst.ys);

    const EstimateVector by_enum = pi_rule_enum(loglik, mus);
    Matrix<LogValue> minors = permanental_minors_log(loglik.entries(), opt.par);
    if (opt.inject_fault) minors(0, 0).log_abs += kFaultSize;
    const EstimateVector by_perm = pi_rule_from_minors(loglik, mus, minors);
    double worst = max_abs_diff(by_enum, by_perm);
    std::optional<EstimateVector> by_two;
    if (two_valued) {
      const TwoValuedSpec spec = *two_valued_spec(mus);
      by_two = pi_rule_two_valued(log_likelihood_ratios(family, spec, inst.ys), spec);
      worst = std::max({worst, max_abs_diff(by_enum, *by_two), max_abs_diff(by_perm, *by_two)});
    }
    rec.observe(worst, [&] {
      json j{{"trial", t}, {"family", "gaussian-location"},
             {"mus", std::vector<double>(mus.values().begin(), mus.values().end())},
             {"ys", inst.ys}, {"enum", by_enum.values}, {"permanent", by_perm.values},
             {"fault_injected", opt.inject_fault}};
      if (by_two) j["two_valued"] = by_two->values;
      return j;
    });
  }
  return rec.outcome;
}

PropertyOutcome covariance(const ValidateOptions& opt) {
  Recorder rec{{"covariance", true, 0, 0.0, 0.0, {}}};
  const Family family = Family::gaussian_location();
  for (std::size_t t = 0; t < opt.trials; ++t) {
    Stream stream(opt.seed, kTagCovariance + t);
    const std::size_t n = 1 + stream.below(opt.max_n);
    const bool two_valued = t % 2 == 1;
    const ParameterMultiset mus = random_mus(stream, n, two_valued);
    const Instance inst = draw_instance(family, mus, opt.seed ^ kTagCovariance, t);

    std::vector<std::size_t> sigma(n);
    std::iota(sigma.begin(), sigma.end(), std::size_t{0});
    for (std::size_t i = n; i-- > 1;) std::swap(sigma[i], sigma[stream.below(i + 1)]);
    std::vector<double> permuted(n);
    for (std::size_t k = 0; k < n; ++k) permuted[k] = inst.ys[sigma[k]];

    const LogLikelihoodMatrix base = loglik_matrix(family, mus, inst.ys);
    const LogLikelihoodMatrix moved = loglik_matrix(family, mus, permuted);
    std::vector<std::pair<std::string, std::pair<EstimateVector, EstimateVector>>> runs;
    runs.push_back({"simple", {simple_rule(base, mus), simple_rule(moved, mus)}});
    runs.push_back({"enum", {pi_rule_enum(base, mus), pi_rule_enum(moved, mus)}});
    if (n >= 2) {
      runs.push_back({"permanent", {pi_rule_permanent(base, mus), pi_rule_permanent(moved, mus)}});
    }
    if (two_valued) {
      const TwoValuedSpec spec = *two_valued_spec(mus);
      runs.push_back({"two-valued",
                      {pi_rule_two_valued(log_likelihood_ratios(family, spec, inst.ys), spec),
                       pi_rule_two_valued(log_likelihood_ratios(family, spec, permuted), spec)}});
    }
    std::string broken;
    for (const auto& [name, outputs] : runs) {
      for (std::size_t k = 0; k < n; ++k) {
        if (outputs.second[k] != outputs.first[sigma[k]]) broken = name;
      }
    }
    // Simple rule: coordinate i must ignore every other observation.
    if (n >= 2) {
      std::vector<double> changed = inst.ys;
      const std::size_t k = stream.below(n);
      changed[k] += 1.0;
      const EstimateVector before = runs[0].second.first;
      const EstimateVector after = simple_rule(loglik_matrix(family, mus, changed), mus);
      for (std::size_t i = 0; i < n; ++i) {
        if (i != k && before[i] != after[i]) broken = "simple-locality";
      }
    }
    rec.observe(broken.empty() ? 0.0 : 1.0, [&] {
      return json{{"trial", t}, {"engine", broken},
                  {"mus", std::vector<double>(mus.values().begin(), mus.values().end())},
                  {"ys", inst.ys}, {"sigma", sigma}};
    });
  }
  return rec.outcome;
}

PropertyOutcome esp_bridge(const ValidateOptions& opt) {
  Recorder rec{{"esp-bridge", true, 0, 0.0, kPermanentTolerance, {}}};
  for (std::size_t t = 0; t < opt.trials; ++t) {
    Stream stream(opt.seed, kTagEsp + t);
    const std::size_t n = 1 + stream.below(opt.max_n);
    std::vector<double> lf0(n), lf1(n), lr(n);
    for (std::size_t i = 0; i < n; ++i) {
      lf0[i] = stream.normal();
      lf1[i] = stream.normal();
      lr[i] = lf1[i] - lf0[i];
    }
    const EspTable esp = esp_log(lr);
    const double base = std::accumulate(lf0.begin(), lf0.end(), 0.0);
    for (std::size_t K = 0; K <= n; ++K) {
      Matrix<double> m(n, n);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) m(i, j) = j < K ? lf1[i] : lf0[i];
      }
      const LogValue ryser = permanent_log(m);
      const double via_esp = std::lgamma(static_cast<double>(K) + 1.0) +
                             std::lgamma(static_cast<double>(n - K) + 1.0) + base + esp.log_e[K];
      rec.observe(log_relative_error(ryser, LogValue::from_log(via_esp)), [&] {
        return json{{"trial", t}, {"K", K}, {"log_f0", lf0}, {"log_f1", lf1},
                    {"ryser_log", ryser.log_abs}, {"esp_log", via_esp}};
      });
    }
  }
  return rec.outcome;
}

}  // namespace

std::vector<PropertyOutcome> run_validation(const ValidateOptions& options) {
  if (options.max_n < 2 || options.max_n > kValidateMaxN) {
    throw ContractError("validate: max_n must lie in [2, " + std::to_string(kValidateMaxN) + "]");
  }
  if (options.trials == 0) throw ContractError("validate: trials must be positive");
  return {permanent_vs_naive(options), engine_agreement(options), covariance(options),
          esp_bridge(options)};
}

}  // namespace cdlab::app
