#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cdlab/families.hpp"
#include "cdlab/risklab.hpp"

namespace cdlab::app {

/// Schema violations, one message per offending field.
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(std::vector<std::string> diagnostics);
  const std::vector<std::string>& diagnostics() const noexcept { return diagnostics_; }

private:
  std::vector<std::string> diagnostics_;
};

enum class OutputFormat { Csv, Jsonl };

struct CheckSettings {
  std::vector<std::string> blocks{"G1", "G2", "B1", "two-valued"};
  double gamma = 0.1;
  std::size_t reps = 100000;
  std::size_t doublings = 4;
  std::optional<double> mu0;  // two-valued block; defaults to min/max of the multiset
  std::optional<double> mu1;
};

struct ExperimentConfig {
  Family family = Family::gaussian_location();
  MusGenerator mus;
  std::vector<std::size_t> n_grid;
  std::optional<Engine> engine;
  std::size_t reps = 10000;
  std::uint64_t seed = 1;
  std::string output_path;
  OutputFormat format = OutputFormat::Csv;
  CheckSettings check;
  /// Canonical JSON of the fields that determine the numbers (output
  /// location and format excluded).
  std::string canonical;
};

/// Parses and schema-checks a JSON experiment description. Throws
/// ConfigError listing every problem found.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Replaces the seed (and the canonical text) after command-line overrides.
void override_seed(ExperimentConfig& config, std::uint64_t seed);

/// 16 hex digits of FNV-1a 64 over the canonical text.
std::string config_hash(const ExperimentConfig& config);

/// Multisets for every n of the grid; throws CapacityError when the engine
/// cannot handle one of them.
std::vector<ParameterMultiset> materialize_mus(const ExperimentConfig& config);

}  // namespace cdlab::app
