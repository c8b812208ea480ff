#include "cdlab/exactcore.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>

#include "cdlab/error.hpp"

namespace cdlab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Neumaier compensated accumulator.
struct CompensatedSum {
  long double sum = 0.0L;
  long double carry = 0.0L;

  void add(long double x) noexcept {
    const long double t = sum + x;
    if (std::fabs(sum) >= std::fabs(x)) {
      carry += (sum - t) + x;
    } else {
      carry += (x - t) + sum;
    }
    sum = t;
  }
  long double value() const noexcept { return sum + carry; }
};

double log_add_exp(double a, double b) noexcept {
  if (a < b) std::swap(a, b);
  if (b == kNegInf) return a;
  return a + std::log1p(std::exp(b - a));
}

void require_square(const Matrix<double>& m, const char* what) {
  if (!m.square()) throw ContractError(std::string(what) + ": matrix must be square");
}

// Replaces -inf by the floor, rejects NaN and +inf.
double floored(double x) {
  if (std::isnan(x) || x == std::numeric_limits<double>::infinity()) {
    throw ContractError("log entries must be finite or -inf");
  }
  return std::max(x, kLogZeroFloor);
}

// Rows shifted to a maximum of 0 and exponentiated; returns the total shift.
double shifted_exponentials(const Matrix<double>& log_entries, Matrix<long double>& out) {
  const std::size_t n = log_entries.rows();
  out = Matrix<long double>(n, n);
  double shift = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row_max = kNegInf;
    for (std::size_t j = 0; j < n; ++j) row_max = std::max(row_max, floored(log_entries(i, j)));
    for (std::size_t j = 0; j < n; ++j) {
      out(i, j) = std::exp(static_cast<long double>(floored(log_entries(i, j)) - row_max));
    }
    shift += row_max;
  }
  return shift;
}

LogValue to_log_value(long double value, double shift) {
  if (value == 0.0L) return LogValue::zero();
  return {static_cast<double>(std::log(std::fabs(value))) + shift, value > 0.0L ? 1 : -1};
}

LogValue ryser(const Matrix<double>& log_entries) {
  const std::size_t n = log_entries.rows();
  if (n == 0) return LogValue::from_log(0.0);
  Matrix<long double> a;
  const double shift = shifted_exponentials(log_entries, a);

  std::vector<CompensatedSum> row_sums(n);
  CompensatedSum total;
  std::uint64_t subset = 0;
  bool odd_size = false;
  const std::uint64_t count = std::uint64_t{1} << n;
  for (std::uint64_t k = 1; k < count; ++k) {
    const auto column = static_cast<std::size_t>(std::countr_zero(k));
    subset ^= std::uint64_t{1} << column;
    const bool added = (subset >> column) & 1u;
    odd_size = !odd_size;
    long double product = 1.0L;
    for (std::size_t i = 0; i < n; ++i) {
      row_sums[i].add(added ? a(i, column) : -a(i, column));
      product *= row_sums[i].value();
    }
    total.add(odd_size ? -product : product);
  }
  const long double perm = (n % 2 == 1) ? -total.value() : total.value();
  return to_log_value(perm, shift);
}

Matrix<double> minor_of(const Matrix<double>& m, std::size_t row, std::size_t col) {
  const std::size_t n = m.rows();
  Matrix<double> out(n - 1, n - 1);
  for (std::size_t i = 0, oi = 0; i < n; ++i) {
    if (i == row) continue;
    for (std::size_t j = 0, oj = 0; j < n; ++j) {
      if (j == col) continue;
      out(oi, oj++) = m(i, j);
    }
    ++oi;
  }
  return out;
}

}  // namespace

double LogValue::value() const noexcept {
  if (sign == 0) return 0.0;
  return sign * std::exp(log_abs);
}

LogValue permanent_log(const Matrix<double>& log_entries) {
  require_square(log_entries, "permanent_log");
  if (log_entries.rows() > kMaxPermanentSize) {
    throw CapacityError("permanent_log supports n <= " + std::to_string(kMaxPermanentSize) +
                        ", got n = " + std::to_string(log_entries.rows()));
  }
  return ryser(log_entries);
}

Matrix<LogValue> permanental_minors_log(const Matrix<double>& log_entries, Parallel par) {
  require_square(log_entries, "permanental_minors_log");
  const std::size_t n = log_entries.rows();
  if (n < 2 || n > kMaxMinorTableSize) {
    throw CapacityError("permanental_minors_log supports 2 <= n <= " +
                        std::to_string(kMaxMinorTableSize) + ", got n = " + std::to_string(n));
  }
  Matrix<LogValue> out(n, n);
  parallel_for(n * n, par, [&](std::size_t k) {
    const std::size_t i = k / n;
    const std::size_t j = k % n;
    out(i, j) = ryser(minor_of(log_entries, i, j));
  });
  return out;
}

EspTable esp_log(std::span<const double> log_rhos, std::optional<std::size_t> max_degree) {
  for (double x : log_rhos) {
    if (!std::isfinite(x)) throw ContractError("esp_log: inputs must be finite");
  }
  const std::size_t n = log_rhos.size();
  const std::size_t top = std::min(n, max_degree.value_or(n));
  std::vector<double> log_e(top + 1, kNegInf);
  log_e[0] = 0.0;
  for (std::size_t m = 0; m < n; ++m) {
    for (std::size_t k = std::min(m + 1, top); k >= 1; --k) {
      log_e[k] = log_add_exp(log_e[k], log_rhos[m] + log_e[k - 1]);
    }
  }
  return EspTable{std::move(log_e)};
}

EstimateVector enumerate_posterior(const LogLikelihoodMatrix& loglik, const ParameterMultiset& mus) {
  const std::size_t n = loglik.size();
  if (mus.size() != n) throw ContractError("enumerate_posterior: size mismatch");
  if (n > kMaxEnumerationSize) {
    throw CapacityError("enumerate_posterior supports n <= " + std::to_string(kMaxEnumerationSize) +
                        ", got n = " + std::to_string(n));
  }
  return detail::run_canonical(loglik.entries(), [&](const Matrix<double>& m) {
    std::vector<std::size_t> assignment(n);
    std::iota(assignment.begin(), assignment.end(), std::size_t{0});

    std::vector<double> log_weights;
    do {
      double lw = 0.0;
      for (std::size_t i = 0; i < n; ++i) lw += m(i, assignment[i]);
      log_weights.push_back(lw);
    } while (std::next_permutation(assignment.begin(), assignment.end()));
    const double top = *std::max_element(log_weights.begin(), log_weights.end());

    std::iota(assignment.begin(), assignment.end(), std::size_t{0});
    std::vector<double> weighted(n, 0.0);
    double total = 0.0;
    std::size_t index = 0;
    do {
      const double w = std::exp(log_weights[index++] - top);
      total += w;
      for (std::size_t i = 0; i < n; ++i) weighted[i] += w * mus[assignment[i]];
    } while (std::next_permutation(assignment.begin(), assignment.end()));

    EstimateVector est{std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) {
      est.values[i] = std::clamp(weighted[i] / total, mus.min(), mus.max());
    }
    return est;
  });
}

LogValue permanent_by_enumeration(const Matrix<double>& log_entries) {
  require_square(log_entries, "permanent_by_enumeration");
  const std::size_t n = log_entries.rows();
  if (n > kMaxEnumerationSize + 2) {
    throw CapacityError("permanent_by_enumeration supports n <= " +
                        std::to_string(kMaxEnumerationSize + 2));
  }
  if (n == 0) return LogValue::from_log(0.0);
  Matrix<long double> a;
  const double shift = shifted_exponentials(log_entries, a);
  std::vector<std::size_t> assignment(n);
  std::iota(assignment.begin(), assignment.end(), std::size_t{0});
  CompensatedSum total;
  do {
    long double product = 1.0L;
    for (std::size_t i = 0; i < n; ++i) product *= a(i, assignment[i]);
    total.add(product);
  } while (std::next_permutation(assignment.begin(), assignment.end()));
  return to_log_value(total.value(), shift);
}

namespace detail {

std::vector<std::size_t> canonical_row_order(const Matrix<double>& m) {
  std::vector<std::size_t> order(m.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    auto ra = m.row(a);
    auto rb = m.row(b);
    return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
  });
  return order;
}

}  // namespace detail

}  // namespace cdlab
