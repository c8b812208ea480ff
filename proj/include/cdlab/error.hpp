#pragma once

#include <stdexcept>
#include <string>

namespace cdlab {

// Parameter outside the family's admissible set (e.g. a non-positive variance).
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

// Caller broke a precondition: shape mismatch, too few replications, ...
class ContractError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Problem size beyond a documented hard limit of an exact kernel.
class CapacityError : public std::length_error {
public:
  using std::length_error::length_error;
};

}  // namespace cdlab
