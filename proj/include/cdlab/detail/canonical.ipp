#pragma once

namespace cdlab::detail {

template <class Engine>
EstimateVector run_canonical(const Matrix<double>& m, Engine&& engine) {
  const std::vector<std::size_t> order = canonical_row_order(m);
  const std::size_t n = m.rows();
  Matrix<double> sorted(n, m.cols());
  for (std::size_t r = 0; r < n; ++r) {
    auto src = m.row(order[r]);
    std::copy(src.begin(), src.end(), sorted.row(r).begin());
  }
  const EstimateVector canonical = engine(sorted);
  EstimateVector out{std::vector<double>(n)};
  for (std::size_t r = 0; r < n; ++r) {
    const bool same_as_previous =
        r > 0 && std::equal(sorted.row(r).begin(), sorted.row(r).end(), sorted.row(r - 1).begin());
    const double value = same_as_previous ? out.values[order[r - 1]] : canonical.values[r];
    out.values[order[r]] = value;
  }
  return out;
}

}  // namespace cdlab::detail
