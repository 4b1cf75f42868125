#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>

#include "lamdual/divergences.hpp"
#include "lamdual/lambda_core.hpp"

namespace lamdual {

// The three coordinate systems of one family member: natural (divisive),
// subtractive and dual.
struct FamilyPoint {
    VectorXd vartheta;
    VectorXd theta;
    VectorXd eta;
};

// Subtractive normalization of a family member: density =
// q_exp(q, theta.F(x) - phi_q).
struct SubtractiveForm {
    VectorXd theta;
    double phi_q = 0.0;
};

/**
 * Parametric family with densities q_exp(q, vartheta.F(x)) * e^{-potential}
 * with respect to the reference measure carried by the scheme. Instances are
 * immutable after construction (cached constants included) and all evaluation
 * is pure, so a family can be shared freely across threads.
 */
class LambdaExpFamily {
  public:
    struct Config {
        std::string kind;
        LambdaParam lam = LambdaParam::classical();
        int statistic_dim = 0;
        int sample_dim = 0;
        std::function<VectorXd(const VectorXd&)> statistic;
        IntegrationScheme scheme = IntegrationScheme::finite_states(1);
        Domain natural_domain = Domain::all(0);
        // Closed forms; when absent the potential falls back to quadrature and
        // the gradient to finite differences.
        ScalarFn potential;
        GradientFn potential_gradient;
        // Parameter-fitted scheme (e.g. support-restricted); defaults to `scheme`.
        std::function<IntegrationScheme(const VectorXd&)> scheme_for;
        // (vartheta, x) -> density support; defaults to 1 + lambda vartheta.F(x) > 0.
        std::function<bool(const VectorXd&, const VectorXd&)> support;
        std::function<MatrixXd(const VectorXd&, int, std::uint64_t)> sampler;
        bool parameter_dependent_support = false;
        std::map<std::string, double> parameters;  // serialization payload
        MatrixXd statistic_matrix;                 // extra payload for finite-state kinds
    };

    explicit LambdaExpFamily(Config cfg);

    const std::string& kind() const { return cfg_.kind; }
    const LambdaParam& lam() const { return cfg_.lam; }
    int statistic_dim() const { return cfg_.statistic_dim; }
    int sample_dim() const { return cfg_.sample_dim; }
    const Domain& natural_domain() const { return cfg_.natural_domain; }
    const IntegrationScheme& scheme() const { return cfg_.scheme; }
    IntegrationScheme scheme_for(const VectorXd& vartheta) const;
    bool has_parameter_dependent_support() const { return cfg_.parameter_dependent_support; }
    bool has_closed_form_potential() const { return static_cast<bool>(cfg_.potential); }
    bool has_sampler() const { return static_cast<bool>(cfg_.sampler); }
    const std::map<std::string, double>& parameters() const { return cfg_.parameters; }

    VectorXd statistic(const VectorXd& x) const { return cfg_.statistic(x); }
    bool in_support(const VectorXd& vartheta, const VectorXd& x) const;

    // ParameterOutsideDomain when vartheta is not in the natural domain.
    double density(const VectorXd& vartheta, const VectorXd& x) const;
    DensityFunction density_function(const VectorXd& vartheta) const;

    // Closed form when available, else potential_by_quadrature. IntegralDiverged
    // when vartheta is outside the natural domain.
    double potential(const VectorXd& vartheta) const;
    // log of the normalization integral of q_exp(q, vartheta.F).
    double potential_by_quadrature(const VectorXd& vartheta) const;
    // The potential as an optimizable object on the natural domain.
    Potential potential_fn() const;

    // Subtractive-normalization potential phi_q(theta), solved from the
    // normalization condition. SupportConditionViolated when the support
    // depends on the parameter.
    double subtractive_potential(const VectorXd& theta) const;
    SubtractiveForm to_subtractive(const VectorXd& vartheta) const;
    // Inverse reparameterization theta -> vartheta = theta / (1 - lambda phi_q).
    // ReparameterizationOutOfRange when 1 - lambda phi_q(theta) <= 0.
    VectorXd to_divisive(const VectorXd& theta) const;
    VectorXd to_divisive(const VectorXd& theta, double phi_q) const;

    // Dual parameter along the deformed-gradient route.
    VectorXd dual_parameter(const VectorXd& vartheta) const;
    // Expectation of F under the escort density, by direct quadrature. Kept
    // independent of dual_parameter so the two routes can be cross-checked.
    VectorXd escort_mean(const VectorXd& vartheta) const;
    FamilyPoint point(const VectorXd& vartheta) const;

    // n i.i.d. draws as rows; deterministic in the seed. NotImplemented when
    // the family has no sampler.
    MatrixXd sample(const VectorXd& vartheta, int n, std::uint64_t seed) const;

    std::string to_json() const;

  private:
    Config cfg_;
};

// Rebuilds a built-in family from its JSON descriptor. NotImplemented for
// kinds without a registered builder.
LambdaExpFamily family_from_json(const std::string& text);

// ---------------------------------------------------------------------------
// built-in families

// Probability simplex on d+1 states with indicator statistics.
LambdaExpFamily simplex_family(const LambdaParam& lam, int d);

// Centered one-dimensional family with statistic -x^2 and scale parameter
// vartheta in (0, infinity). Requires lambda in (-2, 1); for lambda > 0 the
// support depends on the parameter.
LambdaExpFamily q_gaussian_family(const LambdaParam& lam, int quadrature_nodes = 256);

// Location-scale Cauchy on the line, lambda = -1, statistic (x, x^2).
LambdaExpFamily cauchy_family(int quadrature_nodes = 256);

// Location-scale Student-t on R^n (n = 1 or 2) with dof degrees of freedom,
// lambda = -2 / (dof + n), statistic (x_i; x_i x_j, i <= j).
LambdaExpFamily student_t_family(double dof, int n, int quadrature_nodes = 256);

// Perturbation model on the open simplex: Q = center (+) D with D Dirichlet
// of concentration 1/(sigma (1+d)) in each coordinate; lambda = -sigma.
LambdaExpFamily dirichlet_perturbation_family(double sigma, int d, int nodes_per_axis = 64);

// Finite-state family from an explicit statistic matrix (row i = F(state i)).
LambdaExpFamily discrete_family(const LambdaParam& lam, const MatrixXd& statistic_by_state);

// Classical (lambda = 0) location family: density e^{vartheta x - vartheta^2/2}
// with respect to the standard normal reference measure, i.e. N(vartheta, 1).
LambdaExpFamily gaussian_location_family(int quadrature_nodes = 256);

/**
 * Reparameterizes a power family p ~ (sum_i theta_i F_i)^{1/lambda} with
 * F_0 > 0 into this library's form: statistics F_i/F_0 for i >= 1 and the
 * reference measure reweighted by F_0^{1/lambda}. PositivityViolation if F_0
 * is not positive at every scheme node. Coefficients map through
 * alpha_family_natural.
 */
LambdaExpFamily alpha_family_reparameterize(std::vector<ScalarFn> statistics,
                                            const IntegrationScheme& base_scheme,
                                            const LambdaParam& lam);
// Coefficients theta in R^{d+1} (theta_0 > 0) -> natural parameter in R^d.
VectorXd alpha_family_natural(const LambdaParam& lam, const VectorXd& theta);

/**
 * Local subtractive -> divisive conversion with a shifted statistic
 * F - c * theta0, for use when 1 - lambda phi_q(theta) <= 0. Requires
 * 1 - lambda phi_q(theta) + c lambda theta.theta0 > 0. Returns the shifted
 * family (quadrature potential) together with the converted parameter.
 */
struct ShiftedDivisive {
    LambdaExpFamily family;
    VectorXd vartheta;
};
ShiftedDivisive shifted_divisive(const LambdaExpFamily& fam, const VectorXd& theta,
                                 const VectorXd& theta0, double c);

// ---------------------------------------------------------------------------
// coordinate helpers

// u in the open simplex -> natural parameter (component-wise Box-Cox of
// u_i/u_0), and back.
VectorXd simplex_natural(const LambdaParam& lam, const VectorXd& u);
VectorXd simplex_probabilities(const LambdaParam& lam, const VectorXd& vartheta);

VectorXd cauchy_natural(double mu, double sigma);
std::pair<double, double> cauchy_location_scale(const VectorXd& vartheta);

VectorXd student_t_natural(double dof, const VectorXd& mu, const MatrixXd& sigma);
void student_t_location_scale(double dof, const VectorXd& vartheta, VectorXd& mu,
                              MatrixXd& sigma);

VectorXd dirichlet_natural(double sigma, const VectorXd& center);
VectorXd dirichlet_center(double sigma, const VectorXd& vartheta);

// Gauss-type rule for the normalized Beta(a, b) weight on (0, 1); endpoint
// singularities are absorbed by power substitutions, so smooth integrands
// converge at spectral rate.
IntegrationScheme beta_weight_scheme(double a, double b, int n);

}  // namespace lamdual
