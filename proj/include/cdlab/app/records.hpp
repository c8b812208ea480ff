#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "cdlab/risklab.hpp"

namespace cdlab::app {

/// One output row of the gap command.
struct ResultRecord {
  std::string config_hash;
  std::size_t n = 0;
  std::size_t reps = 0;
  double gap_sq = 0.0;
  double gap_sq_stderr = 0.0;
  double risk_s = 0.0;
  double risk_s_stderr = 0.0;
  double risk_pi = 0.0;
  double risk_pi_stderr = 0.0;
  double risk_diff = 0.0;
  double risk_diff_stderr = 0.0;
  double pythagoras_residual = 0.0;
  double pythagoras_stderr = 0.0;
  double wall_time = 0.0;
  std::uint64_t seed = 0;

  friend bool operator==(const ResultRecord&, const ResultRecord&) = default;
};

ResultRecord make_record(const std::string& config_hash, const GapReport& report,
                         std::uint64_t seed, double wall_time);

/// Shortest decimal string that parses back to exactly `x`.
std::string format_double(double x);

std::string csv_quote(std::string_view field);
std::string csv_header();
std::string to_csv_row(const ResultRecord& record);
std::string to_jsonl(const ResultRecord& record);

/// RFC-4180 reader for files written by to_csv_row (header required).
std::vector<ResultRecord> parse_csv(std::string_view text);

/// Splits RFC-4180 text into rows of unquoted fields.
std::vector<std::vector<std::string>> split_csv(std::string_view text);

}  // namespace cdlab::app
