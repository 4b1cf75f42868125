#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "lamdual/errors.hpp"

namespace lamdual {

using Eigen::MatrixXd;
using Eigen::VectorXd;

using ScalarFn = std::function<double(const VectorXd&)>;
using GradientFn = std::function<VectorXd(const VectorXd&)>;
using HessianFn = std::function<MatrixXd(const VectorXd&)>;
using PredicateFn = std::function<bool(const VectorXd&)>;

/**
 * Open convex subset of R^d described by box bounds, strict half-space
 * constraints A x < b and an optional extra predicate. Every domain carries an
 * explicit interior anchor point used as a default start for optimization.
 *
 * contains(x, margin) shrinks the box and half-space parts by `margin`
 * (half-spaces by margin * ||row||); the predicate part is evaluated as-is.
 */
class Domain {
  public:
    static Domain all(int dim);
    static Domain box(VectorXd lo, VectorXd hi);  // open box, +-inf entries allowed
    static Domain positive_orthant(int dim);
    // { x : x_i > 0, sum x_i < 1 }
    static Domain open_simplex(int dim);
    static Domain halfspaces(MatrixXd a, VectorXd b, VectorXd anchor);
    static Domain predicate(int dim, PredicateFn pred, VectorXd anchor);

    bool contains(const VectorXd& x, double margin = 0.0) const;
    // DomainViolation with a short description if contains() fails.
    void require(const VectorXd& x, double margin = 0.0) const;

    // Same set with one more strict half-space a.x < b.
    Domain with_halfspace(const VectorXd& a, double b) const;
    Domain with_anchor(VectorXd anchor) const;

    int dim() const { return dim_; }
    const VectorXd& anchor() const { return anchor_; }
    const VectorXd& lower() const { return lo_; }
    const VectorXd& upper() const { return hi_; }

  private:
    Domain(int dim, VectorXd lo, VectorXd hi, VectorXd anchor);
    int dim_ = 0;
    VectorXd lo_, hi_;
    MatrixXd a_;  // 0 x dim when absent
    VectorXd b_;
    PredicateFn pred_;
    VectorXd anchor_;
};

/**
 * Deterministic cubature rule: a fixed list of nodes and positive weights,
 * integrate(g) = sum_k w_k g(x_k). Construction fully determines the rule, so
 * results are reproducible bit-for-bit. Copies share node storage.
 *
 * Factories:
 *  - finite_sum: caller-supplied nodes and weights (counting measures, custom rules)
 *  - finite_states: n unit-weight nodes 0..n-1 for densities on a finite set
 *  - gauss_legendre: n-point rule on [a, b]
 *  - tangent_gauss_legendre: rule on the whole line via x = tan t
 *  - tangent_gauss_legendre_2d: tensor product of the above on R^2
 *  - simplex_grid: cell-center rule on the open unit simplex in R^dim
 *  - monte_carlo_simplex: seeded uniform draws on the simplex, weight vol/n
 *
 * reweighted(rho) folds a positive density rho into the weights, turning a rule
 * for dx into a rule for rho(x) dx.
 */
class IntegrationScheme {
  public:
    enum class Kind {
        FiniteSum,
        GaussLegendre,
        TangentGaussLegendre,
        SimplexGrid,
        MonteCarlo,
    };

    static IntegrationScheme finite_sum(std::vector<VectorXd> nodes, VectorXd weights);
    static IntegrationScheme finite_states(int n);
    static IntegrationScheme gauss_legendre(double a, double b, int n);
    static IntegrationScheme tangent_gauss_legendre(int n);
    static IntegrationScheme tangent_gauss_legendre_2d(int n_per_axis);
    static IntegrationScheme simplex_grid(int dim, int cells_per_axis);
    static IntegrationScheme monte_carlo_simplex(int dim, int n, std::uint64_t seed);

    double integrate(const ScalarFn& g) const;

    IntegrationScheme reweighted(const ScalarFn& rho) const;

    Kind kind() const { return kind_; }
    int node_count() const { return static_cast<int>(data_->nodes.size()); }
    const std::vector<VectorXd>& nodes() const { return data_->nodes; }
    const VectorXd& weights() const { return data_->weights; }
    // Reporting tolerance associated with the rule (used by validation checks).
    double tolerance() const { return tolerance_; }
    IntegrationScheme with_tolerance(double tol) const;

  private:
    struct Data {
        std::vector<VectorXd> nodes;
        VectorXd weights;
    };
    IntegrationScheme(Kind kind, std::shared_ptr<const Data> data, double tol);
    Kind kind_;
    std::shared_ptr<const Data> data_;
    double tolerance_;
};

// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
void gauss_legendre_nodes(int n, std::vector<double>& nodes, std::vector<double>& weights);

/**
 * Central finite differences. Gradient uses step h_i = cbrt(eps) * (1 + |u_i|)
 * (optionally scaled); value-based Hessians use eps^(1/4) * (1 + |u_i|). When a
 * domain is given, steps are halved until the stencil stays inside it.
 */
VectorXd fd_gradient(const ScalarFn& f, const VectorXd& u, const Domain* dom = nullptr,
                     double step_scale = 1.0);
MatrixXd fd_hessian(const ScalarFn& f, const VectorXd& u, const Domain* dom = nullptr,
                    double step_scale = 1.0);
// Hessian as the symmetrized central difference of an analytic gradient.
MatrixXd fd_hessian_from_gradient(const GradientFn& grad, const VectorXd& u,
                                  const Domain* dom = nullptr, double step_scale = 1.0);

struct OptimizerConfig {
    int max_iterations = 20000;
    double gradient_tolerance = 1e-9;
    double step_shrink_factor = 0.5;
    double domain_margin = 1e-12;
    // Objective values above this throw Unbounded.
    double value_cap = 1e12;
};

struct MaximizeResult {
    VectorXd argmax;
    double value = 0.0;
    bool converged = false;
    int iterations = 0;
    double gradient_norm = 0.0;
};

/**
 * Projected gradient ascent with Armijo backtracking over an open domain.
 * Steps that leave the margin-shrunk domain or fail the Armijo test are
 * shrunk geometrically; the accepted step size carries over (doubled) as the
 * next trial. Stops when the gradient norm falls below the tolerance.
 *
 * Throws StartOutsideDomain, NoAscentDirection (no admissible step while the
 * gradient is still large) and Unbounded (objective exceeded value_cap).
 */
MaximizeResult maximize(const ScalarFn& objective, const GradientFn& gradient, const Domain& dom,
                        const VectorXd& start, const OptimizerConfig& cfg = {});
// Gradient-free overload; uses fd_gradient internally.
MaximizeResult maximize(const ScalarFn& objective, const Domain& dom, const VectorXd& start,
                        const OptimizerConfig& cfg = {});

// Compensated (Kahan) accumulation.
class KahanSum {
  public:
    void add(double x) {
        double y = x - carry_;
        double t = sum_ + y;
        carry_ = (t - sum_) - y;
        sum_ = t;
    }
    double value() const { return sum_; }

  private:
    double sum_ = 0.0;
    double carry_ = 0.0;
};

// First n points of the Halton sequence mapped into the box [lo, hi],
// optionally filtered by a domain (with margin). Deterministic.
std::vector<VectorXd> halton_grid(const VectorXd& lo, const VectorXd& hi, int n,
                                  const Domain* filter = nullptr, double margin = 1e-6);

}  // namespace lamdual
