#pragma once

#include <optional>
#include <vector>

#include "lamdual/numerics.hpp"

namespace lamdual {

// Deformation parameters with |lambda| below this are routed to the classical
// (lambda -> 0) formulas to avoid catastrophic cancellation.
inline constexpr double kClassicalLambdaThreshold = 1e-8;

/**
 * Deformation parameter. Carries lambda != 0 together with q = 1 - lambda, or
 * the classical limit in which every formula degenerates to its lambda -> 0
 * form (cost -u.v, Bregman divergences, Shannon/KL limits).
 */
class LambdaParam {
  public:
    explicit LambdaParam(double lambda)
        : lambda_(std::abs(lambda) < kClassicalLambdaThreshold ? 0.0 : lambda),
          classical_(std::abs(lambda) < kClassicalLambdaThreshold) {}

    static LambdaParam classical() { return LambdaParam(0.0); }

    double value() const { return lambda_; }
    double q() const { return 1.0 - lambda_; }
    bool is_classical() const { return classical_; }

  private:
    double lambda_;
    bool classical_;
};

/**
 * Scalar function on an open convex domain, with optional analytic gradient
 * and Hessian. Missing derivatives fall back to central finite differences
 * restricted to the domain. Instances are immutable and safe to share.
 */
class Potential {
  public:
    Potential(Domain domain, ScalarFn value, GradientFn gradient = nullptr,
              HessianFn hessian = nullptr);

    const Domain& domain() const { return domain_; }
    double value(const VectorXd& u) const;
    VectorXd gradient(const VectorXd& u) const;
    MatrixXd hessian(const VectorXd& u) const;
    bool has_analytic_gradient() const { return static_cast<bool>(grad_); }

  private:
    Domain domain_;
    ScalarFn value_;
    GradientFn grad_;
    HessianFn hess_;
};

/**
 * Logarithmic cost -(1/lambda) log(1 + lambda u.v), extended by the
 * conventions log t = -inf for t <= 0. In the classical limit this is -u.v.
 * Values +inf (lambda > 0) and -inf (lambda < 0) are returned in-band.
 */
double cost(const LambdaParam& lam, const VectorXd& u, const VectorXd& v);
double cost(const LambdaParam& lam, double uv);  // from the inner product directly

/**
 * Deformed exponential [1 + (1-q) t]_+^{1/(1-q)}, with exp(t) at q = 1 and the
 * convention 0^s = +inf for s < 0. Satisfies exp(-cost(lam, u, v)) =
 * q_exp(1 - lambda, u.v).
 */
double q_exp(double q, double t);

struct ConjugateResult {
    double value = 0.0;
    VectorXd argmax;
    bool converged = false;
    int iterations = 0;
};

/**
 * Numerical conjugate  f^c(v) = sup_u { (1/lambda) log(1 + lambda u.v) - f(u) }
 * (classical: sup { u.v - f(u) }), maximized over the domain of f intersected
 * with { u : 1 + lambda u.v > 0 }. The start defaults to the domain anchor.
 */
ConjugateResult conjugate(const LambdaParam& lam, const Potential& f, const VectorXd& v,
                          const OptimizerConfig& cfg = {},
                          std::optional<VectorXd> start = std::nullopt);

// Conjugate on a list of dual points, warm-starting each solve from the
// previous argmax.
std::vector<ConjugateResult> conjugate_grid(const LambdaParam& lam, const Potential& f,
                                            const std::vector<VectorXd>& vs,
                                            const OptimizerConfig& cfg = {});

/**
 * The numerical conjugate as a Potential on a caller-supplied dual domain.
 * The gradient uses the envelope identity  grad f^c(v) = u* / (1 + lambda u*.v)
 * with u* the inner argmax. Stateless; each evaluation starts from the anchor.
 */
Potential conjugate_potential(const LambdaParam& lam, const Potential& f, Domain dual_domain,
                              const OptimizerConfig& cfg = {});

/**
 * Deformed gradient  v = grad f(u) / (1 - lambda grad f(u).u).
 * Throws NormalizationViolation when the denominator is not positive.
 */
VectorXd lambda_gradient(const LambdaParam& lam, const Potential& f, const VectorXd& u);

/**
 * Inverse of the deformed gradient map: the u with lambda_gradient(u) = v,
 * found as the conjugate argmax and polished by a damped Newton iteration on
 * the residual. Throws NotInRange if the residual cannot be driven below the
 * tolerance.
 */
VectorXd inverse_lambda_gradient(const LambdaParam& lam, const Potential& f, const VectorXd& v,
                                 const OptimizerConfig& cfg = {},
                                 std::optional<VectorXd> start = std::nullopt);

struct RegularityReport {
    bool hessian_condition_ok = false;
    double worst_eigenvalue = 0.0;   // min over the grid of the smallest eigenvalue
    bool normalization_ok = false;
    double min_normalization = 0.0;  // min over the grid of 1 - lambda grad f(u).u
    int points_checked = 0;
};

/**
 * Checks the two conditions for regular c_lambda-convexity on a grid:
 * positive definiteness of  hess f + lambda (grad f)(grad f)^T  and positivity
 * of  1 - lambda grad f(u).u.
 */
RegularityReport check_regularity(const LambdaParam& lam, const Potential& f,
                                  const std::vector<VectorXd>& grid);

/**
 * |f(u) + f^c(v) - (1/lambda) log(1 + lambda u.v)| at v = lambda_gradient(u).
 * Zero (up to solver error) exactly when the generalized Fenchel identity
 * holds with equality.
 */
double duality_gap(const LambdaParam& lam, const Potential& f, const VectorXd& u,
                   const OptimizerConfig& cfg = {});

// Box-Cox transform (s^lambda - 1)/lambda with log s at lambda = 0, and its
// inverse (1 + lambda t)^(1/lambda). DomainViolation for s <= 0 or
// 1 + lambda t <= 0.
double box_cox(const LambdaParam& lam, double s);
double box_cox_inverse(const LambdaParam& lam, double t);

}  // namespace lamdual
