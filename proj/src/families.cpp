#include "cdlab/families.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cdlab/error.hpp"

namespace cdlab {

namespace {

constexpr double kHalfLogTwoPi = 0.91893853320467274178;  // 0.5 * log(2 pi)

bool is_gaussian(FamilyKind kind) {
  return kind == FamilyKind::GaussianLocation || kind == FamilyKind::GaussianScale;
}

bool gaussian_admissible(FamilyKind kind, double mu) {
  if (!std::isfinite(mu)) return false;
  return kind == FamilyKind::GaussianLocation || mu > 0.0;
}

double gaussian_log_density(FamilyKind kind, double mu, double y) {
  if (kind == FamilyKind::GaussianLocation) {
    const double z = y - mu;
    return -kHalfLogTwoPi - 0.5 * z * z;
  }
  return -kHalfLogTwoPi - 0.5 * std::log(mu) - 0.5 * y * y / mu;
}

}  // namespace

std::string to_string(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::GaussianLocation: return "gaussian-location";
    case FamilyKind::GaussianScale: return "gaussian-scale";
    case FamilyKind::TwoPoint: return "two-point";
  }
  return "unknown";
}

Family Family::gaussian_location() {
  return {FamilyKind::GaussianLocation, FamilyKind::GaussianLocation, 0.0, 0.0};
}

Family Family::gaussian_scale() {
  return {FamilyKind::GaussianScale, FamilyKind::GaussianScale, 0.0, 0.0};
}

Family Family::two_point(FamilyKind base, double theta0, double theta1) {
  if (!is_gaussian(base)) throw ContractError("two-point family needs a Gaussian base family");
  if (!gaussian_admissible(base, theta0) || !gaussian_admissible(base, theta1)) {
    throw DomainError("two-point member parameters are not admissible for " + to_string(base));
  }
  return {FamilyKind::TwoPoint, base, theta0, theta1};
}

bool Family::admissible(double mu) const noexcept {
  if (kind_ == FamilyKind::TwoPoint) return mu == 0.0 || mu == 1.0;
  return gaussian_admissible(kind_, mu);
}

void Family::require_admissible(double mu) const {
  if (!admissible(mu)) {
    throw DomainError("parameter " + std::to_string(mu) + " is not admissible for " + name());
  }
}

double Family::member(double mu) const noexcept {
  if (kind_ == FamilyKind::TwoPoint) return mu == 0.0 ? theta_[0] : theta_[1];
  return mu;
}

double Family::log_density(double mu, double y) const {
  require_admissible(mu);
  return gaussian_log_density(base_, member(mu), y);
}

double Family::sample(double mu, Stream& stream) const {
  require_admissible(mu);
  const double theta = member(mu);
  const double z = stream.normal();
  return base_ == FamilyKind::GaussianLocation ? theta + z : std::sqrt(theta) * z;
}

std::string Family::name() const {
  if (kind_ != FamilyKind::TwoPoint) return to_string(kind_);
  return "two-point(" + to_string(base_) + ")";
}

ParameterMultiset::ParameterMultiset(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw ContractError("parameter multiset must hold at least one value");
  for (double v : values_) {
    if (!std::isfinite(v)) throw ContractError("parameter multiset values must be finite");
  }
  std::sort(values_.begin(), values_.end());
}

double ParameterMultiset::max_abs() const noexcept {
  return std::max(std::abs(values_.front()), std::abs(values_.back()));
}

void ParameterMultiset::require_admissible(const Family& family) const {
  for (double v : values_) family.require_admissible(v);
}

LogLikelihoodMatrix::LogLikelihoodMatrix(Matrix<double> entries) : entries_(std::move(entries)) {
  if (!entries_.square()) throw ContractError("log-likelihood matrix must be square");
  if (entries_.rows() == 0) throw ContractError("log-likelihood matrix must be non-empty");
  for (double v : entries_.data()) {
    if (!std::isfinite(v)) throw ContractError("log-likelihood entries must be finite");
  }
}

double log_density(const Family& family, double mu, double y) { return family.log_density(mu, y); }

double sample(const Family& family, double mu, std::uint64_t seed) {
  Stream stream(seed);
  return family.sample(mu, stream);
}

LogLikelihoodMatrix loglik_matrix(const Family& family, const ParameterMultiset& mus,
                                  std::span<const double> ys) {
  const std::size_t n = mus.size();
  if (ys.size() != n) {
    throw ContractError("loglik_matrix: " + std::to_string(ys.size()) + " observations for " +
                        std::to_string(n) + " parameters");
  }
  mus.require_admissible(family);
  Matrix<double> out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) out(i, j) = family.log_density(mus[j], ys[i]);
  }
  return LogLikelihoodMatrix(std::move(out));
}

}  // namespace cdlab
