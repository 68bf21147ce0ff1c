#pragma once

#include <stdexcept>
#include <string>

namespace khess {

// Precondition violated on the arguments of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Two eigenvalues too close for a divided difference.
class DegenerateSpectrum : public DomainError {
public:
    using DomainError::DomainError;
};

// A spectrum left the (closed) cone where a quantity is defined.
class AdmissibilityError : public DomainError {
public:
    using DomainError::DomainError;
};

// Sublevel set of a candidate reached the bounding box.
class GrowthViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace khess
