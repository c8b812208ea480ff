#include "cdlab/app/commands.hpp"

#include <chrono>
#include <fstream>
#include <ostream>

#include "CLI11.hpp"
#include "cdlab/app/config.hpp"
#include "cdlab/app/records.hpp"
#include "cdlab/app/validate.hpp"
#include "cdlab/error.hpp"
#include "cdlab/risklab.hpp"
#include "json.hpp"

namespace cdlab::app {

using nlohmann::json;

namespace {

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  unsigned workers = 1;
  std::string out_path;
};

void write_output(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << content;
    return;
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw std::runtime_error("cannot open output file '" + path + "'");
  file << content;
}

ExperimentConfig prepare(const CommonFlags& flags) {
  ExperimentConfig config = load_config(flags.config_path);
  if (flags.seed) override_seed(config, *flags.seed);
  return config;
}

int cmd_gap(const CommonFlags& flags, const std::string& format_flag, bool wall_time,
            std::ostream& out) {
  ExperimentConfig config = prepare(flags);
  if (!config.engine) throw ConfigError({"engine: required for the gap command"});
  if (!format_flag.empty()) config.format = format_flag == "jsonl" ? OutputFormat::Jsonl : OutputFormat::Csv;
  const std::string path = flags.out_path.empty() ? config.output_path : flags.out_path;

  const std::vector<ParameterMultiset> multisets = materialize_mus(config);
  for (const auto& mus : multisets) {
    try {
      require_engine_capacity(*config.engine, mus);
    } catch (const ContractError& e) {
      throw ConfigError({std::string("engine: ") + e.what()});
    }
  }

  const std::string hash = config_hash(config);
  std::string content = config.format == OutputFormat::Csv ? csv_header() : std::string{};
  std::ostream& summary = path.empty() || path == "-" ? std::cerr : out;
  for (const auto& mus : multisets) {
    const auto start = std::chrono::steady_clock::now();
    const GapReport report = mc_gap(config.family, mus, *config.engine, config.reps, config.seed,
                                    Parallel{flags.workers});
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const ResultRecord record = make_record(hash, report, config.seed, wall_time ? seconds : 0.0);
    content += config.format == OutputFormat::Csv ? to_csv_row(record) : to_jsonl(record);
    summary << "n=" << report.n << " gap_sq=" << format_double(report.gap_sq.mean) << " +- "
            << format_double(report.gap_sq.standard_error)
            << " risk_diff=" << format_double(report.risk_diff.mean) << " +- "
            << format_double(report.risk_diff.standard_error)
            << " pythagoras_residual=" << format_double(report.pythagoras_residual)
            << " (" << seconds << " s)\n";
  }
  write_output(path, content, out);
  return kExitOk;
}

json estimate_json(const McEstimate& e) { return {{"value", e.value}, {"stderr", e.standard_error}}; }

json check_block(const std::string& block, const ExperimentConfig& config,
                 const ParameterMultiset& mus, Parallel par) {
  const CheckSettings& s = config.check;
  if (block == "G1") {
    const G1Report r = check_G1(config.family, mus, s.gamma, s.reps, config.seed, par);
    return {{"gamma", r.gamma},
            {"max_abs_mu", r.max_abs_mu},
            {"max_second_moment", estimate_json(r.max_second_moment)},
            {"argmax_pair", {r.argmax_mu_i, r.argmax_mu_j}},
            {"min_exceed_prob", estimate_json(r.min_exceed_prob)},
            {"values_used", r.values_used},
            {"subsampled", r.subsampled}};
  }
  if (block == "G2") {
    const G2Report r = check_G2(config.family, mus, s.reps, config.seed, par);
    json j{{"sum_sq_weights", estimate_json(r.sum_sq_weights)},
           {"inverse_min_weight", estimate_json(r.inverse_min_weight)},
           {"weighted_inverse_min", estimate_json(r.weighted_inverse_min)},
           {"first_obs_sum_sq", estimate_json(r.first_obs_sum_sq)}};
    if (r.gaussian_bound) {
      j["gaussian_bound"] = *r.gaussian_bound;
      j["within_gaussian_bound"] = r.first_obs_sum_sq.value <= *r.gaussian_bound;
    }
    return j;
  }
  if (block == "B1") {
    if (mus.size() < 2) return {{"skipped", "needs n >= 2"}};
    const B1Report r = check_B1(config.family, mus, s.reps, config.seed, par);
    return {{"spread", r.spread},
            {"max_ratio_variance", estimate_json(r.max_ratio_variance)},
            {"argmax_index", r.argmax_index},
            {"implied_V", r.implied_V},
            {"ratio_variances", r.ratio_variances}};
  }
  // two-valued
  double mu0 = 0.0, mu1 = 0.0;
  if (s.mu0 && s.mu1) {
    mu0 = *s.mu0;
    mu1 = *s.mu1;
  } else if (const auto spec = two_valued_spec(mus)) {
    mu0 = spec->mu0;
    mu1 = spec->mu1;
  } else {
    return {{"skipped", "multiset has more than two values; set check.mu0 and check.mu1"}};
  }
  const TwoValuedConditionReport r =
      check_two_valued_condition(config.family, mu0, mu1, s.reps, config.seed, s.doublings);
  auto side = [](const RatioVarianceCheck& c) {
    return json{{"variance", estimate_json(c.variance)},
                {"trajectory", c.trajectory},
                {"heavy_tail", c.heavy_tail}};
  };
  return {{"mu0", mu0}, {"mu1", mu1}, {"under_0", side(r.under_0)}, {"under_1", side(r.under_1)},
          {"flagged", r.flagged()}};
}

int cmd_check(const CommonFlags& flags, std::ostream& out) {
  ExperimentConfig config = prepare(flags);
  const std::string path = flags.out_path.empty() ? config.output_path : flags.out_path;
  const std::vector<ParameterMultiset> multisets = materialize_mus(config);
  json doc{{"config_hash", config_hash(config)}, {"seed", config.seed}, {"reports", json::array()}};
  std::ostream& summary = path.empty() || path == "-" ? std::cerr : out;
  for (const auto& mus : multisets) {
    json entry{{"n", mus.size()}};
    for (const auto& block : config.check.blocks) {
      entry[block] = check_block(block, config, mus, Parallel{flags.workers});
      summary << "n=" << mus.size() << " " << block << " done\n";
    }
    doc["reports"].push_back(std::move(entry));
  }
  write_output(path, doc.dump(2) + "\n", out);
  return kExitOk;
}

int cmd_validate(std::size_t max_n, std::size_t trials, std::uint64_t seed, unsigned workers,
                 const std::string& replay_path, bool inject_fault, std::ostream& out) {
  ValidateOptions options;
  options.max_n = max_n;
  options.trials = trials;
  options.seed = seed;
  options.par = Parallel{workers};
  options.inject_fault = inject_fault;
  const std::vector<PropertyOutcome> outcomes = run_validation(options);
  bool all_passed = true;
  json failures = json::array();
  for (const auto& o : outcomes) {
    out << (o.passed ? "PASS " : "FAIL ") << o.name << " checks=" << o.checks
        << " worst=" << o.worst << " tol=" << o.tolerance << "\n";
    if (!o.passed) {
      all_passed = false;
      failures.push_back(json::parse(o.replay));
    }
  }
  if (all_passed) return kExitOk;
  write_output(replay_path, failures.dump(2) + "\n", out);
  out << "replay written to " << replay_path << "\n";
  return kExitPropertyFailure;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Oracle estimators of the compound decision problem"};
  app.require_subcommand(1);

  CommonFlags gap_flags, check_flags;
  std::string format_flag;
  bool wall_time = false;
  auto* gap = app.add_subcommand("gap", "Monte Carlo risks of the simple and permutation-invariant oracles");
  gap->add_option("--config", gap_flags.config_path, "Experiment config (JSON)")->required();
  gap->add_option("--seed", gap_flags.seed, "Override the master seed");
  gap->add_option("--workers", gap_flags.workers, "Worker threads")->check(CLI::PositiveNumber);
  gap->add_option("--format", format_flag, "Output format")->check(CLI::IsMember({"csv", "jsonl"}));
  gap->add_option("--out", gap_flags.out_path, "Output file ('-' for stdout)");
  gap->add_flag("--wall-time", wall_time, "Record measured wall time (output is then not reproducible)");

  auto* check = app.add_subcommand("check", "Evaluate the G1, G2, B1 and two-valued conditions");
  check->add_option("--config", check_flags.config_path, "Experiment config (JSON)")->required();
  check->add_option("--seed", check_flags.seed, "Override the master seed");
  check->add_option("--workers", check_flags.workers, "Worker threads")->check(CLI::PositiveNumber);
  check->add_option("--out", check_flags.out_path, "Report file ('-' for stdout)");

  std::size_t max_n = kValidateMaxN;
  std::size_t trials = 50;
  std::uint64_t validate_seed = 1;
  unsigned validate_workers = 1;
  std::string replay_path = "validate_replay.json";
  bool inject_fault = false;
  auto* validate = app.add_subcommand("validate", "Cross-check the exact engines on random instances");
  validate->add_option("--max-n", max_n, "Largest instance size (<= 7)");
  validate->add_option("--trials", trials, "Random instances per property");
  validate->add_option("--seed", validate_seed, "Seed");
  validate->add_option("--workers", validate_workers, "Worker threads")->check(CLI::PositiveNumber);
  validate->add_option("--replay", replay_path, "Where to write failing instances");
  validate->add_flag("--inject-fault", inject_fault)->group("");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) reversed.pop_back();  // program name
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return kExitConfigError;
  }

  try {
    if (gap->parsed()) return cmd_gap(gap_flags, format_flag, wall_time, out);
    if (check->parsed()) return cmd_check(check_flags, out);
    return cmd_validate(max_n, trials, validate_seed, validate_workers, replay_path, inject_fault, out);
  } catch (const ConfigError& e) {
    err << e.what() << "\n";
    return kExitConfigError;
  } catch (const CapacityError& e) {
    err << "capacity: " << e.what() << "\n";
    return kExitCapacityError;
  } catch (const ContractError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
}

}  // namespace cdlab::app
