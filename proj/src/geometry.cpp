#include "lamdual/geometry.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <utility>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "lamdual/divergences.hpp"
#include "lamdual/errors.hpp"

namespace lamdual {

namespace {

// forward difference Jacobian of the deformed gradient map u -> eta
MatrixXd dual_map_jacobian(const LambdaParam& lam, const Potential& f, const VectorXd& u) {
    const int d = static_cast<int>(u.size());
    const double h0 = std::cbrt(std::numeric_limits<double>::epsilon());
    MatrixXd jac(d, d);
    for (int i = 0; i < d; ++i) {
        double h = h0 * (1.0 + std::abs(u[i]));
        VectorXd up = u, um = u;
        for (int tries = 0;; ++tries) {
            up[i] = u[i] + h;
            um[i] = u[i] - h;
            if (f.domain().contains(up) && f.domain().contains(um)) break;
            if (tries > 60)
                throw DomainViolation("dual map Jacobian: no interior step at coordinate " +
                                      std::to_string(i));
            h /= 2.0;
        }
        jac.col(i) = (lambda_gradient(lam, f, up) - lambda_gradient(lam, f, um)) / (2.0 * h);
    }
    return jac;
}

}  // namespace

MetricTensor::MetricTensor(LambdaParam lam, Potential f)
    : lam_(std::move(lam)), f_(std::move(f)) {}

MatrixXd MetricTensor::at(const VectorXd& u) const {
    MatrixXd g = f_.hessian(u);
    if (!lam_.is_classical()) {
        const VectorXd grad = f_.gradient(u);
        g += lam_.value() * grad * grad.transpose();
    }
    const double scale = 1.0 + g.cwiseAbs().maxCoeff();
    if ((g - g.transpose()).cwiseAbs().maxCoeff() > 1e-6 * scale)
        throw ConstraintViolated("metric: asymmetric Hessian estimate");
    g = 0.5 * (g + g.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(g);
    if (!(eig.eigenvalues().minCoeff() > 0.0))
        throw DomainViolation("metric: not positive definite at the queried point");
    return g;
}

MetricTensor metric(const LambdaParam& lam, Potential f) {
    return MetricTensor(lam, std::move(f));
}

QuadraticApproxReport quadratic_approx_check(const LambdaParam& lam, const Potential& f,
                                             const VectorXd& u, double radius, int directions,
                                             std::uint64_t seed) {
    if (!(radius > 0.0)) throw DomainViolation("quadratic_approx_check: radius must be positive");
    if (directions < 1) throw DomainViolation("quadratic_approx_check: need directions");
    f.domain().require(u);
    const int d = static_cast<int>(u.size());
    const MatrixXd g = metric(lam, f).at(u);

    QuadraticApproxReport report;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    for (int k = 0; k < directions; ++k) {
        VectorXd dir(d);
        do {
            for (int i = 0; i < d; ++i) dir[i] = gauss(rng);
        } while (dir.norm() < 1e-12);
        dir.normalize();
        const VectorXd delta = radius * dir;
        if (!f.domain().contains(u + delta) || !f.domain().contains(u - delta))
            throw DomainViolation("quadratic_approx_check: ball leaves the domain");
        const double quad = 0.5 * delta.dot(g * delta);
        const double forward = log_divergence(lam, f, u + delta, u);
        const double reverse = log_divergence(lam, f, u, u + delta);
        for (double value : {forward, reverse}) {
            if (!std::isfinite(value))
                throw InfiniteDivergence("quadratic_approx_check: divergence not finite");
            const double gap = std::abs(value - quad);
            report.max_gap = std::max(report.max_gap, gap);
            report.max_ratio = std::max(report.max_ratio, gap / (radius * radius * radius));
        }
    }

    // metric estimates by symmetrized second differences of each orientation
    const double h = radius / 2.0;
    const auto probe = [&](bool forward, const VectorXd& delta) {
        if (!f.domain().contains(u + delta))
            throw DomainViolation("quadratic_approx_check: probe leaves the domain");
        return forward ? log_divergence(lam, f, u + delta, u)
                       : log_divergence(lam, f, u, u + delta);
    };
    for (bool forward : {true, false}) {
        MatrixXd est(d, d);
        for (int i = 0; i < d; ++i) {
            VectorXd ei = VectorXd::Zero(d);
            ei[i] = h;
            est(i, i) = (probe(forward, ei) + probe(forward, -ei)) / (h * h);
            for (int j = i + 1; j < d; ++j) {
                VectorXd ej = VectorXd::Zero(d);
                ej[j] = h;
                const double plus = probe(forward, ei + ej) + probe(forward, -ei - ej);
                const double minus = probe(forward, ei - ej) + probe(forward, ej - ei);
                est(i, j) = est(j, i) = (plus - minus) / (4.0 * h * h);
            }
        }
        (forward ? report.forward_metric : report.reverse_metric) = est;
    }
    return report;
}

MatrixXd fisher_metric(const LambdaExpFamily& fam, const VectorXd& vartheta) {
    fam.natural_domain().require(vartheta);
    const int d = fam.statistic_dim();
    const Domain& dom = fam.natural_domain();
    const IntegrationScheme sch = fam.scheme_for(vartheta);

    const double h0 = std::cbrt(std::numeric_limits<double>::epsilon());
    VectorXd h(d);
    std::vector<VectorXd> plus, minus;
    for (int i = 0; i < d; ++i) {
        double hi = h0 * (1.0 + std::abs(vartheta[i]));
        VectorXd up = vartheta, um = vartheta;
        for (int tries = 0;; ++tries) {
            up[i] = vartheta[i] + hi;
            um[i] = vartheta[i] - hi;
            if (dom.contains(up) && dom.contains(um)) break;
            if (tries > 60)
                throw ParameterOutsideDomain("fisher_metric: no interior step at coordinate " +
                                             std::to_string(i));
            hi /= 2.0;
        }
        h[i] = hi;
        plus.push_back(up);
        minus.push_back(um);
    }

    MatrixXd fisher = MatrixXd::Zero(d, d);
    const auto& nodes = sch.nodes();
    const VectorXd& w = sch.weights();
    VectorXd score(d);
    for (int k = 0; k < static_cast<int>(nodes.size()); ++k) {
        if (w[k] == 0.0) continue;
        const double p = fam.density(vartheta, nodes[k]);
        if (!(p > 0.0)) continue;
        bool interior = true;
        for (int i = 0; i < d; ++i) {
            const double pp = fam.density(plus[i], nodes[k]);
            const double pm = fam.density(minus[i], nodes[k]);
            if (!(pp > 0.0) || !(pm > 0.0)) {
                interior = false;  // support boundary crosses this node
                break;
            }
            score[i] = (std::log(pp) - std::log(pm)) / (2.0 * h[i]);
        }
        if (!interior) continue;
        fisher.noalias() += (w[k] * p) * score * score.transpose();
    }
    return 0.5 * (fisher + fisher.transpose());
}

PreGeodesic pre_geodesic(const LambdaExpFamily& fam, GeodesicChart chart, const VectorXd& a,
                         const VectorXd& b, int steps) {
    if (steps < 2) throw DomainViolation("pre_geodesic: need at least two steps");
    PreGeodesic path;
    path.t = VectorXd::LinSpaced(steps, 0.0, 1.0);
    path.primal.reserve(steps);
    path.dual.reserve(steps);
    if (chart == GeodesicChart::Primal) {
        for (int k = 0; k < steps; ++k) {
            const double t = path.t[k];
            VectorXd vartheta = (1.0 - t) * a + t * b;
            if (!fam.natural_domain().contains(vartheta))
                throw ChartViolation("pre_geodesic: chord leaves the natural domain");
            path.dual.push_back(fam.dual_parameter(vartheta));
            path.primal.push_back(std::move(vartheta));
        }
        return path;
    }
    const Potential f = fam.potential_fn();
    std::optional<VectorXd> warm;
    for (int k = 0; k < steps; ++k) {
        const double t = path.t[k];
        VectorXd eta = (1.0 - t) * a + t * b;
        VectorXd vartheta;
        try {
            vartheta = inverse_lambda_gradient(fam.lam(), f, eta, {}, warm);
        } catch (const Error& err) {
            throw ChartViolation(std::string("pre_geodesic: dual point cannot be inverted: ") +
                                 err.what());
        }
        warm = vartheta;
        path.primal.push_back(std::move(vartheta));
        path.dual.push_back(std::move(eta));
    }
    return path;
}

PythagorasReport pythagoras_check(const LambdaParam& lam, const Potential& f, const VectorXd& p,
                                  const VectorXd& q, const VectorXd& r) {
    f.domain().require(p);
    f.domain().require(q);
    f.domain().require(r);
    const double l_qp = log_divergence(lam, f, q, p);
    const double l_rq = log_divergence(lam, f, r, q);
    const double l_rp = log_divergence(lam, f, r, p);
    if (!std::isfinite(l_qp) || !std::isfinite(l_rq) || !std::isfinite(l_rp))
        throw InfiniteDivergence("pythagoras_check: a divergence is not finite");

    PythagorasReport report;
    report.lhs = l_qp + l_rq;
    report.rhs = l_rp;

    const MatrixXd g = metric(lam, f).at(q);
    const VectorXd primal_tangent = r - q;
    const VectorXd dual_delta = lambda_gradient(lam, f, p) - lambda_gradient(lam, f, q);
    const MatrixXd jac = dual_map_jacobian(lam, f, q);
    const VectorXd pullback = jac.fullPivLu().solve(dual_delta);
    report.inner = primal_tangent.dot(g * pullback);
    return report;
}

}  // namespace lamdual
