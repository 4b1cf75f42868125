#pragma once

#include <vector>

#include "lamdual/families.hpp"

namespace lamdual {

/**
 * Riemannian metric induced by the logarithmic divergence of a potential,
 *   g(u) = hess f(u) + lambda grad f(u) grad f(u)^T,
 * equivalently the conformal Hessian exp(-lambda f) hess((exp(lambda f)-1)/lambda).
 * at() checks that the result is symmetric positive definite.
 */
class MetricTensor {
  public:
    MetricTensor(LambdaParam lam, Potential f);

    MatrixXd at(const VectorXd& u) const;
    const LambdaParam& lam() const { return lam_; }
    const Potential& potential() const { return f_; }

  private:
    LambdaParam lam_;
    Potential f_;
};

MetricTensor metric(const LambdaParam& lam, Potential f);

/**
 * Probes the local quadratic approximation L[u + delta : u] ~ 1/2 delta^T g delta
 * over seeded random directions of the given radius, in both divergence
 * orientations. max_gap scales like radius^3, so halving the radius divides
 * it by about eight; the metric estimated from second differences of either
 * orientation is the same.
 */
struct QuadraticApproxReport {
    double max_gap = 0.0;    // worst |L - quadratic| over the probed deltas
    double max_ratio = 0.0;  // worst |L - quadratic| / |delta|^3
    MatrixXd forward_metric; // second-difference estimate from L[u + delta : u]
    MatrixXd reverse_metric; // second-difference estimate from L[u : u + delta]
};

QuadraticApproxReport quadratic_approx_check(const LambdaParam& lam, const Potential& f,
                                             const VectorXd& u, double radius,
                                             int directions = 32, std::uint64_t seed = 7);

/**
 * Fisher information matrix of the family at vartheta, by quadrature of
 * score score^T p dnu with a finite-difference score in the natural
 * parameter. For the divisive potential of the family,
 * metric(lam, potential_fn) equals q times this matrix.
 */
MatrixXd fisher_metric(const LambdaExpFamily& fam, const VectorXd& vartheta);

/**
 * Pre-geodesic of the dually flat pair of charts: a straight segment in the
 * natural parameter (primal) or in the dual parameter (dual), reported in
 * both charts. Dual-chart points are inverted through the deformed gradient
 * map with warm starts along the path. ChartViolation if the chord leaves
 * the chart.
 */
enum class GeodesicChart { Primal, Dual };

struct PreGeodesic {
    VectorXd t;
    std::vector<VectorXd> primal;  // vartheta along the path
    std::vector<VectorXd> dual;    // eta along the path
};

PreGeodesic pre_geodesic(const LambdaExpFamily& fam, GeodesicChart chart, const VectorXd& a,
                         const VectorXd& b, int steps);

/**
 * Both sides of the generalized Pythagorean relation
 *   L[Q:P] + L[R:Q] = L[R:P]
 * together with the g-inner product at Q of the primal tangent toward R and
 * the dual tangent toward P pulled back to the primal chart; the relation
 * holds exactly when that inner product vanishes. InfiniteDivergence if any
 * of the three divergences is not finite.
 */
struct PythagorasReport {
    double lhs = 0.0;     // L[Q:P] + L[R:Q]
    double rhs = 0.0;     // L[R:P]
    double inner = 0.0;   // g_Q(R - Q, pullback of eta_P - eta_Q)
};

PythagorasReport pythagoras_check(const LambdaParam& lam, const Potential& f, const VectorXd& p,
                                  const VectorXd& q, const VectorXd& r);

}  // namespace lamdual
