#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cdlab/matrix.hpp"
#include "cdlab/rng.hpp"

namespace cdlab {

enum class FamilyKind {
  GaussianLocation,  // N(mu, 1)
  GaussianScale,     // N(0, mu), mu is the variance
  TwoPoint,          // labels {0, 1} mapped onto two members of a Gaussian family
};

/// A parametrized family F_mu with densities taken w.r.t. Lebesgue measure.
class Family {
public:
  static Family gaussian_location();
  static Family gaussian_scale();
  /// Two members of `base` (location or scale) addressed by labels 0 and 1.
  static Family two_point(FamilyKind base, double theta0, double theta1);

  FamilyKind kind() const noexcept { return kind_; }
  FamilyKind base_kind() const noexcept { return base_; }
  double theta0() const noexcept { return theta_[0]; }
  double theta1() const noexcept { return theta_[1]; }

  bool admissible(double mu) const noexcept;
  /// Throws DomainError when mu is not admissible.
  void require_admissible(double mu) const;

  double log_density(double mu, double y) const;
  double sample(double mu, Stream& stream) const;

  std::string name() const;

  friend bool operator==(const Family&, const Family&) = default;

private:
  Family(FamilyKind kind, FamilyKind base, double t0, double t1)
      : kind_(kind), base_(base), theta_{t0, t1} {}

  // Parameter of the underlying Gaussian for an admissible mu.
  double member(double mu) const noexcept;

  FamilyKind kind_;
  FamilyKind base_;
  double theta_[2];
};

std::string to_string(FamilyKind kind);

/// The known multiset {mu_1, ..., mu_n}, stored sorted ascending.
class ParameterMultiset {
public:
  explicit ParameterMultiset(std::vector<double> values);

  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t j) const { return values_[j]; }
  double min() const noexcept { return values_.front(); }
  double max() const noexcept { return values_.back(); }
  double max_abs() const noexcept;
  bool all_equal() const noexcept { return values_.front() == values_.back(); }

  void require_admissible(const Family& family) const;

  friend bool operator==(const ParameterMultiset&, const ParameterMultiset&) = default;

private:
  std::vector<double> values_;
};

/// entries(i, j) = log f_{mu_j}(y_i). Rows are observations, columns are
/// parameters; every entry is finite.
class LogLikelihoodMatrix {
public:
  explicit LogLikelihoodMatrix(Matrix<double> entries);

  std::size_t size() const noexcept { return entries_.rows(); }
  double operator()(std::size_t i, std::size_t j) const { return entries_(i, j); }
  std::span<const double> row(std::size_t i) const { return entries_.row(i); }
  const Matrix<double>& entries() const noexcept { return entries_; }

private:
  Matrix<double> entries_;
};

double log_density(const Family& family, double mu, double y);

/// One draw from F_mu using substream 0 of `seed`.
double sample(const Family& family, double mu, std::uint64_t seed);

LogLikelihoodMatrix loglik_matrix(const Family& family, const ParameterMultiset& mus,
                                  std::span<const double> ys);

}  // namespace cdlab
