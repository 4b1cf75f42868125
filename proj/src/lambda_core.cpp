#include "lamdual/lambda_core.hpp"

#include <cmath>
#include <limits>
#include <memory>

namespace lamdual {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

// ---------------------------------------------------------------------------
// Potential

Potential::Potential(Domain domain, ScalarFn value, GradientFn gradient, HessianFn hessian)
    : domain_(std::move(domain)), value_(std::move(value)), grad_(std::move(gradient)),
      hess_(std::move(hessian)) {}

double Potential::value(const VectorXd& u) const {
    domain_.require(u);
    return value_(u);
}

VectorXd Potential::gradient(const VectorXd& u) const {
    domain_.require(u);
    if (grad_) return grad_(u);
    return fd_gradient(value_, u, &domain_);
}

MatrixXd Potential::hessian(const VectorXd& u) const {
    domain_.require(u);
    if (hess_) return hess_(u);
    if (grad_) return fd_hessian_from_gradient(grad_, u, &domain_);
    return fd_hessian(value_, u, &domain_);
}

// ---------------------------------------------------------------------------
// cost / q_exp

double cost(const LambdaParam& lam, double uv) {
    if (lam.is_classical()) return -uv;
    const double l = lam.value();
    const double s = 1.0 + l * uv;
    if (s <= 0.0) return (l > 0.0) ? kInf : -kInf;
    return -std::log1p(l * uv) / l;
}

double cost(const LambdaParam& lam, const VectorXd& u, const VectorXd& v) {
    return cost(lam, u.dot(v));
}

double q_exp(double q, double t) {
    const double oml = 1.0 - q;  // this is lambda
    if (std::abs(oml) < kClassicalLambdaThreshold) return std::exp(t);
    const double s = 1.0 + oml * t;
    if (s <= 0.0) return (1.0 / oml > 0.0) ? 0.0 : kInf;
    return std::exp(std::log(s) / oml);
}

// ---------------------------------------------------------------------------
// conjugate

namespace {

struct ConjugateObjective {
    const LambdaParam& lam;
    const Potential& f;
    const VectorXd& v;

    double value(const VectorXd& u) const {
        if (lam.is_classical()) return u.dot(v) - f.value(u);
        const double s = 1.0 + lam.value() * u.dot(v);
        if (s <= 0.0) return -kInf;
        return std::log1p(lam.value() * u.dot(v)) / lam.value() - f.value(u);
    }
    VectorXd grad(const VectorXd& u) const {
        if (lam.is_classical()) return v - f.gradient(u);
        return v / (1.0 + lam.value() * u.dot(v)) - f.gradient(u);
    }
};

Domain conjugate_domain(const LambdaParam& lam, const Potential& f, const VectorXd& v) {
    if (lam.is_classical() || v.squaredNorm() == 0.0) return f.domain();
    // keep iterates where 1 + lambda u.v > 0
    return f.domain().with_halfspace(-lam.value() * v, 1.0);
}

VectorXd feasible_start(const Domain& dom, const OptimizerConfig& cfg,
                        const std::optional<VectorXd>& start, const LambdaParam& lam,
                        const VectorXd& v) {
    if (start && dom.contains(*start, cfg.domain_margin)) return *start;
    if (dom.contains(dom.anchor(), cfg.domain_margin)) return dom.anchor();
    if (!lam.is_classical() && v.size() > 0) {
        // walk from the anchor in the direction that raises 1 + lambda u.v
        VectorXd dir = (lam.value() > 0 ? 1.0 : -1.0) * v.normalized();
        VectorXd u = dom.anchor();
        double t = 1e-6;
        for (int i = 0; i < 200; ++i) {
            if (dom.contains(u + t * dir, cfg.domain_margin)) return u + t * dir;
            t *= 1.5;
        }
    }
    throw StartOutsideDomain("conjugate: no feasible start point found");
}

}  // namespace

ConjugateResult conjugate(const LambdaParam& lam, const Potential& f, const VectorXd& v,
                          const OptimizerConfig& cfg, std::optional<VectorXd> start) {
    ConjugateObjective obj{lam, f, v};
    const Domain dom = conjugate_domain(lam, f, v);
    const VectorXd u0 = feasible_start(dom, cfg, start, lam, v);
    MaximizeResult m = maximize([&obj](const VectorXd& u) { return obj.value(u); },
                                [&obj](const VectorXd& u) { return obj.grad(u); }, dom, u0, cfg);
    ConjugateResult r;
    r.value = m.value;
    r.argmax = m.argmax;
    r.converged = m.converged;
    r.iterations = m.iterations;
    return r;
}

std::vector<ConjugateResult> conjugate_grid(const LambdaParam& lam, const Potential& f,
                                            const std::vector<VectorXd>& vs,
                                            const OptimizerConfig& cfg) {
    std::vector<ConjugateResult> out;
    out.reserve(vs.size());
    std::optional<VectorXd> warm;
    for (const VectorXd& v : vs) {
        ConjugateResult r = conjugate(lam, f, v, cfg, warm);
        warm = r.argmax;
        out.push_back(std::move(r));
    }
    return out;
}

Potential conjugate_potential(const LambdaParam& lam, const Potential& f, Domain dual_domain,
                              const OptimizerConfig& cfg) {
    // own a copy so the result stays valid when f was a temporary
    auto fp = std::make_shared<const Potential>(f);
    ScalarFn value = [lam, fp, cfg](const VectorXd& v) { return conjugate(lam, *fp, v, cfg).value; };
    GradientFn grad = [lam, fp, cfg](const VectorXd& v) {
        const ConjugateResult r = conjugate(lam, *fp, v, cfg);
        if (lam.is_classical()) return r.argmax;
        return VectorXd(r.argmax / (1.0 + lam.value() * r.argmax.dot(v)));
    };
    return Potential(std::move(dual_domain), std::move(value), std::move(grad));
}

// ---------------------------------------------------------------------------
// deformed gradient and its inverse

VectorXd lambda_gradient(const LambdaParam& lam, const Potential& f, const VectorXd& u) {
    const VectorXd g = f.gradient(u);
    if (lam.is_classical()) return g;
    const double denom = 1.0 - lam.value() * g.dot(u);
    if (!(denom > 0.0))
        throw NormalizationViolation("lambda_gradient: 1 - lambda grad f(u).u = " +
                                     std::to_string(denom) + " is not positive");
    return g / denom;
}

VectorXd inverse_lambda_gradient(const LambdaParam& lam, const Potential& f, const VectorXd& v,
                                 const OptimizerConfig& cfg, std::optional<VectorXd> start) {
    VectorXd u = conjugate(lam, f, v, cfg, std::move(start)).argmax;
    const double tol = std::max(cfg.gradient_tolerance, 1e-12) * (1.0 + v.norm());
    auto residual = [&](const VectorXd& x) -> VectorXd { return lambda_gradient(lam, f, x) - v; };
    VectorXd r = residual(u);
    for (int it = 0; it < 60 && r.norm() > tol; ++it) {
        MatrixXd jac(u.size(), u.size());
        const double h = std::cbrt(std::numeric_limits<double>::epsilon());
        for (int i = 0; i < u.size(); ++i) {
            VectorXd up = u, um = u;
            const double hi = h * (1.0 + std::abs(u[i]));
            up[i] += hi;
            um[i] -= hi;
            if (!f.domain().contains(up) || !f.domain().contains(um)) {
                jac.col(i) = VectorXd::Zero(u.size());
                jac(i, i) = 1.0;
                continue;
            }
            jac.col(i) = (residual(up) - residual(um)) / (2.0 * hi);
        }
        VectorXd step = jac.fullPivLu().solve(-r);
        double t = 1.0;
        bool moved = false;
        while (t > 1e-12) {
            const VectorXd cand = u + t * step;
            if (f.domain().contains(cand, cfg.domain_margin)) {
                const VectorXd rc = residual(cand);
                if (rc.norm() < r.norm()) {
                    u = cand;
                    r = rc;
                    moved = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if (!moved) break;
    }
    if (r.norm() > std::max(1e-6, tol))
        throw NotInRange("inverse_lambda_gradient: residual " + std::to_string(r.norm()) +
                         " too large; v may be outside the gradient range");
    return u;
}

// ---------------------------------------------------------------------------
// regularity / duality gap

RegularityReport check_regularity(const LambdaParam& lam, const Potential& f,
                                  const std::vector<VectorXd>& grid) {
    RegularityReport rep;
    rep.worst_eigenvalue = kInf;
    rep.min_normalization = kInf;
    for (const VectorXd& u : grid) {
        const VectorXd g = f.gradient(u);
        const MatrixXd h = f.hessian(u);
        const MatrixXd m = h + lam.value() * g * g.transpose();
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(m);
        rep.worst_eigenvalue = std::min(rep.worst_eigenvalue, es.eigenvalues().minCoeff());
        rep.min_normalization = std::min(rep.min_normalization, 1.0 - lam.value() * g.dot(u));
        ++rep.points_checked;
    }
    rep.hessian_condition_ok = rep.points_checked > 0 && rep.worst_eigenvalue > 0.0;
    rep.normalization_ok = rep.points_checked > 0 && rep.min_normalization > 0.0;
    return rep;
}

double duality_gap(const LambdaParam& lam, const Potential& f, const VectorXd& u,
                   const OptimizerConfig& cfg) {
    const VectorXd v = lambda_gradient(lam, f, u);
    const double fc = conjugate(lam, f, v, cfg, u).value;
    const double pairing = lam.is_classical()
                               ? u.dot(v)
                               : std::log1p(lam.value() * u.dot(v)) / lam.value();
    return std::abs(f.value(u) + fc - pairing);
}

// ---------------------------------------------------------------------------
// Box-Cox

double box_cox(const LambdaParam& lam, double s) {
    if (!(s > 0.0)) throw DomainViolation("box_cox: argument must be positive");
    if (lam.is_classical()) return std::log(s);
    return std::expm1(lam.value() * std::log(s)) / lam.value();
}

double box_cox_inverse(const LambdaParam& lam, double t) {
    if (lam.is_classical()) return std::exp(t);
    const double s = 1.0 + lam.value() * t;
    if (!(s > 0.0)) throw DomainViolation("box_cox_inverse: 1 + lambda t must be positive");
    return std::exp(std::log1p(lam.value() * t) / lam.value());
}

}  // namespace lamdual
