#include "cdlab/app/records.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>
#include <system_error>

#include "cdlab/error.hpp"

namespace cdlab::app {

namespace {

constexpr const char* kColumns[] = {
    "config_hash",      "n",                   "reps",          "gap_sq",
    "gap_sq_stderr",    "risk_s",              "risk_s_stderr", "risk_pi",
    "risk_pi_stderr",   "risk_diff",           "risk_diff_stderr",
    "pythagoras_residual", "pythagoras_stderr", "wall_time",    "seed"};

std::vector<std::string> fields_of(const ResultRecord& r) {
  return {r.config_hash,
          std::to_string(r.n),
          std::to_string(r.reps),
          format_double(r.gap_sq),
          format_double(r.gap_sq_stderr),
          format_double(r.risk_s),
          format_double(r.risk_s_stderr),
          format_double(r.risk_pi),
          format_double(r.risk_pi_stderr),
          format_double(r.risk_diff),
          format_double(r.risk_diff_stderr),
          format_double(r.pythagoras_residual),
          format_double(r.pythagoras_stderr),
          format_double(r.wall_time),
          std::to_string(r.seed)};
}

template <class T>
T parse_number(const std::string& text) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ContractError("csv: cannot parse number '" + text + "'");
  }
  return value;
}

}  // namespace

ResultRecord make_record(const std::string& config_hash, const GapReport& report,
                         std::uint64_t seed, double wall_time) {
  ResultRecord r;
  r.config_hash = config_hash;
  r.n = report.n;
  r.reps = report.gap_sq.reps;
  r.gap_sq = report.gap_sq.mean;
  r.gap_sq_stderr = report.gap_sq.standard_error;
  r.risk_s = report.risk_s.mean;
  r.risk_s_stderr = report.risk_s.standard_error;
  r.risk_pi = report.risk_pi.mean;
  r.risk_pi_stderr = report.risk_pi.standard_error;
  r.risk_diff = report.risk_diff.mean;
  r.risk_diff_stderr = report.risk_diff.standard_error;
  r.pythagoras_residual = report.pythagoras_residual;
  r.pythagoras_stderr = report.pythagoras_stderr;
  r.wall_time = wall_time;
  r.seed = seed;
  return r;
}

std::string format_double(double x) {
  if (!std::isfinite(x)) throw ContractError("result fields must be finite");
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc{}) throw std::runtime_error("format_double: buffer too small");
  return std::string(buf, ptr);
}

std::string csv_quote(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string csv_header() {
  std::string out;
  for (const char* c : kColumns) {
    if (!out.empty()) out += ',';
    out += c;
  }
  return out + "\r\n";
}

std::string to_csv_row(const ResultRecord& record) {
  std::string out;
  bool first = true;
  for (const auto& f : fields_of(record)) {
    if (!first) out += ',';
    out += csv_quote(f);
    first = false;
  }
  return out + "\r\n";
}

std::string to_jsonl(const ResultRecord& record) {
  const auto fields = fields_of(record);
  std::string out = "{";
  for (std::size_t k = 0; k < fields.size(); ++k) {
    if (k > 0) out += ',';
    out += '"';
    out += kColumns[k];
    out += "\":";
    // config_hash is the only string column and is plain hex.
    out += k == 0 ? "\"" + fields[k] + "\"" : fields[k];
  }
  return out + "}\n";
}

std::vector<std::vector<std::string>> split_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool row_has_content = false;
  for (std::size_t k = 0; k < text.size(); ++k) {
    const char c = text[k];
    if (in_quotes) {
      if (c == '"') {
        if (k + 1 < text.size() && text[k + 1] == '"') {
          field += '"';
          ++k;
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      in_quotes = true;
      row_has_content = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      row_has_content = true;
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && k + 1 < text.size() && text[k + 1] == '\n') ++k;
      if (row_has_content || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
      }
      field.clear();
      row.clear();
      row_has_content = false;
    } else {
      field += c;
      row_has_content = true;
    }
  }
  if (in_quotes) throw ContractError("csv: unterminated quoted field");
  if (row_has_content || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<ResultRecord> parse_csv(std::string_view text) {
  const auto rows = split_csv(text);
  constexpr std::size_t kWidth = std::size(kColumns);
  if (rows.empty() || rows[0].size() != kWidth) throw ContractError("csv: missing or malformed header");
  for (std::size_t k = 0; k < kWidth; ++k) {
    if (rows[0][k] != kColumns[k]) throw ContractError("csv: unexpected column '" + rows[0][k] + "'");
  }
  std::vector<ResultRecord> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& f = rows[r];
    if (f.size() != kWidth) throw ContractError("csv: row " + std::to_string(r) + " has wrong width");
    ResultRecord rec;
    rec.config_hash = f[0];
    rec.n = parse_number<std::size_t>(f[1]);
    rec.reps = parse_number<std::size_t>(f[2]);
    rec.gap_sq = parse_number<double>(f[3]);
    rec.gap_sq_stderr = parse_number<double>(f[4]);
    rec.risk_s = parse_number<double>(f[5]);
    rec.risk_s_stderr = parse_number<double>(f[6]);
    rec.risk_pi = parse_number<double>(f[7]);
    rec.risk_pi_stderr = parse_number<double>(f[8]);
    rec.risk_diff = parse_number<double>(f[9]);
    rec.risk_diff_stderr = parse_number<double>(f[10]);
    rec.pythagoras_residual = parse_number<double>(f[11]);
    rec.pythagoras_stderr = parse_number<double>(f[12]);
    rec.wall_time = parse_number<double>(f[13]);
    rec.seed = parse_number<std::uint64_t>(f[14]);
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace cdlab::app
