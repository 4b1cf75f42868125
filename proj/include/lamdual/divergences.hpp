#pragma once

#include "lamdual/lambda_core.hpp"

namespace lamdual {

/**
 * Strictly positive probability vector on a finite set. Entries must sum to
 * one within 1e-12; use normalized() to build one from raw positive weights.
 */
class DiscreteDensity {
  public:
    explicit DiscreteDensity(VectorXd p);
    static DiscreteDensity normalized(const VectorXd& w);

    int size() const { return static_cast<int>(p_.size()); }
    double operator[](int i) const { return p_[i]; }
    const VectorXd& probs() const { return p_; }

  private:
    VectorXd p_;
};

/**
 * Density with respect to the reference measure represented by its scheme:
 * expectations are integrate(g * pdf). The support predicate defaults to
 * pdf > 0. validate() checks normalization against the scheme tolerance.
 */
struct DensityFunction {
    ScalarFn pdf;
    IntegrationScheme scheme;
    PredicateFn support = nullptr;

    bool in_support(const VectorXd& x) const {
        return support ? support(x) : pdf(x) > 0.0;
    }
    // NormalizationViolation if |integral - 1| exceeds the scheme tolerance.
    void validate() const;
};

DensityFunction as_density_function(const DiscreteDensity& p);

// Escort transform p^alpha / integral of p^alpha. IntegralDiverged when the
// normalizer is zero or not finite.
DiscreteDensity escort(double alpha, const DiscreteDensity& p);
DensityFunction escort(double alpha, const DensityFunction& p);

// Entropies. q = 1 routes to the Shannon limit; q must be positive.
double shannon_entropy(const DiscreteDensity& p);
double shannon_entropy(const DensityFunction& p);
double tsallis_entropy(double q, const DiscreteDensity& p);
double tsallis_entropy(double q, const DensityFunction& p);
double renyi_entropy(double q, const DiscreteDensity& p);
double renyi_entropy(double q, const DensityFunction& p);

// Divergences between densities over the same reference measure. q = 1 and
// alpha = +-1 route to the KL limits.
double kl_divergence(const DiscreteDensity& p, const DiscreteDensity& r);
double kl_divergence(const DensityFunction& p, const DensityFunction& r);
double renyi_divergence(double q, const DiscreteDensity& p, const DiscreteDensity& r);
double renyi_divergence(double q, const DensityFunction& p, const DensityFunction& r);
double alpha_divergence(double alpha, const DiscreteDensity& p, const DiscreteDensity& r);
double alpha_divergence(double alpha, const DensityFunction& p, const DensityFunction& r);

/**
 * Logarithmic divergence of a potential f:
 *   L[u : u'] = f(u) - f(u') - (1/lambda) log(1 + lambda grad f(u').(u - u'))
 * with the extended log convention (+inf possible for lambda > 0). The
 * classical limit is the Bregman divergence.
 */
double log_divergence(const LambdaParam& lam, const Potential& f, const VectorXd& u,
                      const VectorXd& up);
double bregman_divergence(const Potential& f, const VectorXd& u, const VectorXd& up);

/**
 * Potential on the open probability simplex in R^d (coordinates p_1..p_d,
 * p_0 = 1 - sum) whose value at p is minus the Renyi entropy of order
 * q = 1 - lambda of the escort of exponent 1/q of p. Its logarithmic
 * divergence reproduces the Renyi divergence between the escorts, and it is
 * the dual potential of the finite simplex family. The gradient is analytic.
 */
Potential negative_renyi_escort_potential(const LambdaParam& lam, int d);

}  // namespace lamdual
