#pragma once

#include <stdexcept>
#include <string>

namespace lamdual {

// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// A point lies outside the open domain of a potential or scheme.
struct DomainViolation : Error {
    using Error::Error;
};

// An integrand evaluated to NaN or +-inf at a quadrature node.
struct NonFiniteIntegrand : Error {
    using Error::Error;
};

// Optimizer start point not strictly inside the feasible set.
struct StartOutsideDomain : Error {
    using Error::Error;
};

// Backtracking line search failed to find an admissible ascent step.
struct NoAscentDirection : Error {
    using Error::Error;
};

// Objective exceeded the configured cap; supremum treated as +inf.
struct Unbounded : Error {
    using Error::Error;
};

// The deformed-gradient normalization 1 - lambda grad(f).u was not positive.
struct NormalizationViolation : Error {
    using Error::Error;
};

// A requested dual point is not in the range of the deformed gradient map.
struct NotInRange : Error {
    using Error::Error;
};

// An entropy or divergence integral is not finite.
struct IntegralDiverged : Error {
    using Error::Error;
};

// Parameter vector outside the family's natural domain.
struct ParameterOutsideDomain : Error {
    using Error::Error;
};

// Normalization shift outside the admissible range of a parameter conversion.
struct ReparameterizationOutOfRange : Error {
    using Error::Error;
};

// A density or weight that must be positive was not.
struct PositivityViolation : Error {
    using Error::Error;
};

// Operation requires the family's support to be parameter independent.
struct SupportConditionViolated : Error {
    using Error::Error;
};

// A moment constraint that should hold by construction was violated.
struct ConstraintViolated : Error {
    using Error::Error;
};

// A path left the chart (parameter or dual domain) it was drawn in.
struct ChartViolation : Error {
    using Error::Error;
};

// Requested capability is not available for this object (e.g. no sampler).
struct NotImplemented : Error {
    using Error::Error;
};

// A divergence evaluated to +-inf where a finite value is required.
struct InfiniteDivergence : Error {
    using Error::Error;
};

}  // namespace lamdual
