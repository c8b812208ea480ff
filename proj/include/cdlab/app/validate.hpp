#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cdlab/parallel.hpp"

namespace cdlab::app {

inline constexpr std::size_t kValidateMaxN = 7;

struct ValidateOptions {
  std::size_t max_n = kValidateMaxN;
  std::size_t trials = 50;
  std::uint64_t seed = 1;
  Parallel par;
  /// Test hook: perturbs one permanental minor by a relative 1e-6 inside the
  /// engine-agreement property.
  bool inject_fault = false;
};

struct PropertyOutcome {
  std::string name;
  bool passed = true;
  std::size_t checks = 0;
  double worst = 0.0;      // largest observed discrepancy
  double tolerance = 0.0;
  std::string replay;      // JSON description of the first failing instance
};

/// Cross-engine property suite on random instances. Throws ContractError
/// for max_n outside [2, kValidateMaxN] or trials == 0.
std::vector<PropertyOutcome> run_validation(const ValidateOptions& options);

}  // namespace cdlab::app
