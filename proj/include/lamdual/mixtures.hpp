#pragma once

#include <vector>

#include "lamdual/families.hpp"

namespace lamdual {

/**
 * A finite set of component densities over one shared reference measure,
 * together with mixing weights on the closed simplex. Weights must be
 * nonnegative and sum to one within 1e-12. On finite-sum schemes the
 * components must be affinely independent as vectors of node values.
 */
class MixtureSpec {
  public:
    MixtureSpec(std::vector<DensityFunction> components, VectorXd weights);
    static MixtureSpec discrete(const std::vector<DiscreteDensity>& components, VectorXd weights);

    int size() const { return static_cast<int>(components_.size()); }
    const std::vector<DensityFunction>& components() const { return components_; }
    const VectorXd& weights() const { return weights_; }
    const IntegrationScheme& scheme() const { return components_.front().scheme; }

    MixtureSpec with_weights(VectorXd weights) const;

  private:
    std::vector<DensityFunction> components_;
    VectorXd weights_;
};

/**
 * Normalized alpha-mixture: the density proportional to
 *   (sum_i w_i p_i(x)^{(1-alpha)/2})^{2/(1-alpha)}.
 * alpha = -1 is the linear mixture, alpha -> 1 routes to the normalized
 * geometric mixture. For alpha < 1 the support is the union of component
 * supports; for alpha > 1 (negative exponent) it is the intersection.
 */
DensityFunction alpha_mixture(double alpha, const MixtureSpec& spec);

/**
 * lambda-mixture of q = 1 - lambda: the density whose escort of order q is
 * the eta-weighted average of the component escorts,
 *   p_eta proportional to (sum_i eta_i ptilde_i(x))^{1/q},
 * ptilde_i = p_i^q / integral(p_i^q). The classical limit is the linear
 * mixture. Here the mixture weights of spec play the role of eta.
 */
DensityFunction lambda_mixture(const LambdaParam& lam, const MixtureSpec& spec);

/**
 * Dual potential of the lambda-mixture family at mixture coordinates eta
 * (full vector on the closed simplex): minus the Renyi entropy of order q
 * of p_eta, equal to (q/lambda) log integral((sum eta_i ptilde_i)^{1/q}).
 * Classically this is minus the Shannon entropy of the linear mixture.
 */
double mixture_dual_potential(const LambdaParam& lam, const MixtureSpec& spec,
                              const VectorXd& eta);

/**
 * The same dual potential as a Potential on the open simplex in the chart
 * eta_bar = (eta_1, ..., eta_d), eta_0 = 1 - sum. The gradient is analytic.
 * Its logarithmic divergence reproduces the Renyi divergence of order q
 * between the mixtures: L[eta : eta'] = H_q(p_eta || p_eta').
 */
Potential mixture_dual_potential_fn(const LambdaParam& lam, const MixtureSpec& spec);

/**
 * Primal coordinates dual to eta_bar under the lambda-gradient of the dual
 * potential, computed from the mixture density directly:
 *   vartheta_i = (1/lambda) (I_i / I_0 - 1),  I_i = integral(p_eta^lambda ptilde_i).
 * Classical limit: integral(log(p_eta) (p_i - p_0)).
 */
VectorXd mixture_primal_variable(const LambdaParam& lam, const MixtureSpec& spec,
                                 const VectorXd& eta_bar);

/**
 * Natural parameter of the alpha-mixture of family members, alpha = 1 - 2 lambda:
 *   vartheta(w) = sum_i c_i vartheta^(i),  c_i = w_i a_i / sum_j w_j a_j,
 * a_i = exp(-lambda phi(vartheta^(i))). The family density at vartheta(w)
 * equals the alpha-mixture of the member densities pointwise. Requires a
 * support that does not depend on the parameter (SupportConditionViolated
 * otherwise). Classically every a_i = 1.
 */
VectorXd embed_alpha_mixture(const LambdaExpFamily& family,
                             const std::vector<VectorXd>& member_params, const VectorXd& w);

/**
 * The curve t -> vartheta(w(t)) for w(t) = (1-t) w0 + t w1 traced on a
 * uniform t-grid. It stays on the chord between the endpoints up to a time
 * change s(t); s is recovered by projecting onto the chord and the residual
 * measures the distance from the chord (zero in exact arithmetic).
 */
struct InterpolationPath {
    VectorXd t;
    VectorXd s;
    std::vector<VectorXd> vartheta;
    double max_chord_residual = 0.0;
};

InterpolationPath interpolation_path(const LambdaExpFamily& family,
                                     const std::vector<VectorXd>& member_params,
                                     const VectorXd& w0, const VectorXd& w1, int steps);

/**
 * Brute-force check that the alpha-mixture minimizes the weighted sum of
 * alpha-divergences p -> sum_i w_i D_alpha[p_i : p] over the simplex.
 * Discrete state spaces only (at most 4 states); the simplex is scanned on
 * a grid of interior compositions with cells_per_axis cells per axis.
 */
struct BarycenterCheck {
    VectorXd grid_argmin;
    VectorXd mixture;
    double discrepancy = 0.0;
};

BarycenterCheck alpha_barycenter_check(double alpha, const MixtureSpec& spec,
                                       int cells_per_axis);

/**
 * Weight conversion between the alpha-mixture of the component densities
 * (weights w, alpha = 2 lambda - 1) and the lambda-mixture (weights eta),
 * which coincide pointwise under
 *   eta_i = w_i Z_i / sum_j w_j Z_j,  Z_i = integral(p_i^q).
 */
class MixtureReparameterization {
  public:
    explicit MixtureReparameterization(VectorXd z) : z_(std::move(z)) {}

    const VectorXd& escort_normalizers() const { return z_; }
    VectorXd eta_from_weights(const VectorXd& w) const;
    VectorXd weights_from_eta(const VectorXd& eta) const;

  private:
    VectorXd z_;
};

MixtureReparameterization mixture_reparameterization(const LambdaParam& lam,
                                                     const MixtureSpec& spec);

}  // namespace lamdual
