#pragma once

#include <stdexcept>
#include <string>

namespace mink {

struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// Expansion formulas that only hold on one sign branch of the pivot.
struct BranchError : DomainError {
    using DomainError::DomainError;
};

struct NormalizationError : DomainError {
    using DomainError::DomainError;
};

struct DegenerateTransformError : DomainError {
    using DomainError::DomainError;
};

struct SamplingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InitializationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EllipticityError : std::runtime_error {
    EllipticityError(const std::string& what, long node) : std::runtime_error(what), node(node) {}
    long node;
};

}  // namespace mink
