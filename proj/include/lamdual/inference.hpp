#pragma once

#include <cstdint>
#include <vector>

#include "lamdual/divergences.hpp"
#include "lamdual/families.hpp"

namespace lamdual {

/**
 * Dual potential psi of a family: the deformed conjugate of the natural
 * potential, expressed on the dual-parameter domain. Closed forms for the
 * simplex, Dirichlet-perturbation and Gaussian-location kinds, and for the
 * q-Gaussian scale family with lambda <= 0; additive constants are calibrated
 * once through the conjugacy identity phi + psi = (1/lambda) log(1 + lambda
 * vartheta.eta) at a reference dual pair.
 *
 * The simplex psi is extended to the closed simplex (vertices included) so
 * that divergences from observed statistics are well defined; points outside
 * the closed simplex evaluate to +infinity.
 *
 * SupportConditionViolated when the support depends on the parameter,
 * NotImplemented for other kinds.
 */
Potential family_dual_potential(const LambdaExpFamily& fam);

/**
 * Max over the grid of | log-likelihood - divergence representation |:
 * the log density against the carrier measure, (1/lambda) log(1 + lambda
 * vartheta.F(x)) - phi(vartheta), must equal psi(eta) + (1/lambda) log(1 +
 * lambda grad psi(eta).(F(x) - eta)), i.e. psi(F(x)) minus the logarithmic
 * divergence from F(x) to the dual parameter eta. Grid points are sample-space
 * points; DomainViolation when one falls outside the member's support.
 */
double likelihood_divergence_repr_check(const LambdaExpFamily& fam, const VectorXd& vartheta,
                                        const std::vector<VectorXd>& x_grid);

struct MleResult {
    VectorXd eta_hat;        // minimizer of the mean divergence from the data
    VectorXd vartheta_hat;   // its image under the inverse deformed gradient
    double mean_divergence;  // at eta_hat, including the psi(y_i) terms
    bool converged = false;
    int iterations = 0;
};

/**
 * Maximum likelihood as a dual-chart barycenter: minimizes the mean
 * logarithmic divergence from the observed statistics F(x_i) over eta. Rows
 * of `data` are observations. Per-datum sums use compensated accumulation.
 * Starts from the better of the mean and the coordinatewise median of the
 * statistics; optimizer errors propagate (e.g. when the minimizer sits on the
 * chart boundary).
 */
MleResult mle_barycenter(const LambdaExpFamily& fam, const MatrixXd& data,
                         const OptimizerConfig& cfg = {});

// Expectation of the logarithmic divergence L[Y : eta_prime] under the member
// at vartheta, by quadrature over the family scheme.
double expected_log_divergence(const LambdaExpFamily& fam, const VectorXd& vartheta,
                               const VectorXd& eta_prime);

struct DualBarycenterReport {
    VectorXd grid_argmin;     // minimizer of eta' -> E[L[Y : eta']] over the grid
    double argmin_objective;  // objective at grid_argmin
    VectorXd dual_parameter;  // the predicted minimizer
    double objective_at_dual;
};

// The dual parameter as the right barycenter of the member's own statistic
// distribution: scans eta' over the grid and reports the argmin next to
// dual_parameter(vartheta) for comparison at grid resolution.
DualBarycenterReport dual_barycenter_check(const LambdaExpFamily& fam, const VectorXd& vartheta,
                                           const std::vector<VectorXd>& eta_grid);

struct MaxentReport {
    double entropy_star;                     // Renyi entropy of the member
    std::vector<double> entropy_gaps;        // member minus competitor, per competitor
    std::vector<double> identity_residuals;  // |gap - Renyi divergence to the member|
    double min_gap = 0.0;
    double max_identity_residual = 0.0;
};

/**
 * Renyi maximum entropy under an escort moment constraint, for finite-state
 * families. Every competitor must match the member's escort mean within a
 * pinned tolerance (ConstraintViolated otherwise); the report carries the
 * entropy gaps, all nonnegative when the member maximizes entropy, and the
 * residuals of the additive gap identity. NotImplemented for non-finite
 * schemes.
 */
MaxentReport maxent_check(const LambdaExpFamily& fam, const VectorXd& vartheta_star,
                          const std::vector<DiscreteDensity>& competitors);

/**
 * Random competitors satisfying the escort mean constraint exactly. The
 * constraint is linear in the escort powers p^q, so candidates are drawn from
 * the null space of the centered statistic matrix and mapped back through the
 * 1/q power. When the constraint pins the distribution uniquely (e.g. the
 * full simplex family) every competitor equals the member itself.
 */
std::vector<DiscreteDensity> maxent_competitors(const LambdaExpFamily& fam,
                                                const VectorXd& vartheta_star, int count,
                                                std::uint64_t seed);

}  // namespace lamdual
