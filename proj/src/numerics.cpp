#include "lamdual/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace lamdual {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string point_str(const VectorXd& x) {
    std::ostringstream os;
    os << "(";
    for (int i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
    os << ")";
    return os.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// Domain

Domain::Domain(int dim, VectorXd lo, VectorXd hi, VectorXd anchor)
    : dim_(dim), lo_(std::move(lo)), hi_(std::move(hi)), a_(0, dim), b_(0),
      anchor_(std::move(anchor)) {}

Domain Domain::all(int dim) {
    return Domain(dim, VectorXd::Constant(dim, -kInf), VectorXd::Constant(dim, kInf),
                  VectorXd::Zero(dim));
}

Domain Domain::box(VectorXd lo, VectorXd hi) {
    const int d = static_cast<int>(lo.size());
    VectorXd anchor(d);
    for (int i = 0; i < d; ++i) {
        const double a = lo[i], b = hi[i];
        if (std::isfinite(a) && std::isfinite(b))
            anchor[i] = 0.5 * (a + b);
        else if (std::isfinite(a))
            anchor[i] = a + 1.0;
        else if (std::isfinite(b))
            anchor[i] = b - 1.0;
        else
            anchor[i] = 0.0;
    }
    return Domain(d, std::move(lo), std::move(hi), std::move(anchor));
}

Domain Domain::positive_orthant(int dim) {
    return box(VectorXd::Zero(dim), VectorXd::Constant(dim, kInf));
}

Domain Domain::open_simplex(int dim) {
    Domain d = positive_orthant(dim);
    d = d.with_halfspace(VectorXd::Ones(dim), 1.0);
    return d.with_anchor(VectorXd::Constant(dim, 1.0 / (dim + 1)));
}

Domain Domain::halfspaces(MatrixXd a, VectorXd b, VectorXd anchor) {
    Domain d = all(static_cast<int>(a.cols()));
    d.a_ = std::move(a);
    d.b_ = std::move(b);
    d.anchor_ = std::move(anchor);
    return d;
}

Domain Domain::predicate(int dim, PredicateFn pred, VectorXd anchor) {
    Domain d = all(dim);
    d.pred_ = std::move(pred);
    d.anchor_ = std::move(anchor);
    return d;
}

bool Domain::contains(const VectorXd& x, double margin) const {
    if (x.size() != dim_) return false;
    for (int i = 0; i < dim_; ++i) {
        if (!std::isfinite(x[i])) return false;
        if (std::isfinite(lo_[i]) && !(x[i] > lo_[i] + margin)) return false;
        if (std::isfinite(hi_[i]) && !(x[i] < hi_[i] - margin)) return false;
    }
    for (int k = 0; k < a_.rows(); ++k) {
        const double slack = b_[k] - a_.row(k).dot(x);
        if (!(slack > margin * a_.row(k).norm())) return false;
    }
    if (pred_ && !pred_(x)) return false;
    return true;
}

void Domain::require(const VectorXd& x, double margin) const {
    if (!contains(x, margin))
        throw DomainViolation("point " + point_str(x) + " outside domain");
}

Domain Domain::with_halfspace(const VectorXd& a, double b) const {
    Domain d = *this;
    d.a_.conservativeResize(a_.rows() + 1, dim_);
    d.a_.row(d.a_.rows() - 1) = a.transpose();
    d.b_.conservativeResize(b_.size() + 1);
    d.b_[d.b_.size() - 1] = b;
    return d;
}

Domain Domain::with_anchor(VectorXd anchor) const {
    Domain d = *this;
    d.anchor_ = std::move(anchor);
    return d;
}

// ---------------------------------------------------------------------------
// Gauss-Legendre nodes

void gauss_legendre_nodes(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        // Chebyshev-based initial guess, then Newton on P_n.
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (x * p0 - p1) / (x * x - 1.0);
            const double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * pp * pp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
}

// ---------------------------------------------------------------------------
// IntegrationScheme

IntegrationScheme::IntegrationScheme(Kind kind, std::shared_ptr<const Data> data, double tol)
    : kind_(kind), data_(std::move(data)), tolerance_(tol) {}

IntegrationScheme IntegrationScheme::finite_sum(std::vector<VectorXd> nodes, VectorXd weights) {
    if (static_cast<int>(nodes.size()) != weights.size())
        throw Error("finite_sum: node/weight length mismatch");
    for (int i = 0; i < weights.size(); ++i)
        if (!(weights[i] > 0.0) || !std::isfinite(weights[i]))
            throw PositivityViolation("finite_sum: weights must be positive and finite");
    auto d = std::make_shared<Data>();
    d->nodes = std::move(nodes);
    d->weights = std::move(weights);
    return IntegrationScheme(Kind::FiniteSum, std::move(d), 1e-12);
}

IntegrationScheme IntegrationScheme::finite_states(int n) {
    std::vector<VectorXd> nodes(n);
    for (int i = 0; i < n; ++i) nodes[i] = VectorXd::Constant(1, static_cast<double>(i));
    return finite_sum(std::move(nodes), VectorXd::Ones(n));
}

IntegrationScheme IntegrationScheme::gauss_legendre(double a, double b, int n) {
    std::vector<double> x, w;
    gauss_legendre_nodes(n, x, w);
    auto d = std::make_shared<Data>();
    d->nodes.resize(n);
    d->weights.resize(n);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (int i = 0; i < n; ++i) {
        d->nodes[i] = VectorXd::Constant(1, mid + half * x[i]);
        d->weights[i] = half * w[i];
    }
    return IntegrationScheme(Kind::GaussLegendre, std::move(d), 1e-9);
}

IntegrationScheme IntegrationScheme::tangent_gauss_legendre(int n) {
    std::vector<double> x, w;
    gauss_legendre_nodes(n, x, w);
    auto d = std::make_shared<Data>();
    d->nodes.resize(n);
    d->weights.resize(n);
    for (int i = 0; i < n; ++i) {
        const double t = 0.5 * M_PI * x[i];
        const double c = std::cos(t);
        d->nodes[i] = VectorXd::Constant(1, std::tan(t));
        d->weights[i] = 0.5 * M_PI * w[i] / (c * c);
    }
    return IntegrationScheme(Kind::TangentGaussLegendre, std::move(d), 1e-9);
}

IntegrationScheme IntegrationScheme::tangent_gauss_legendre_2d(int n_per_axis) {
    IntegrationScheme one = tangent_gauss_legendre(n_per_axis);
    auto d = std::make_shared<Data>();
    const int n = one.node_count();
    d->nodes.reserve(static_cast<std::size_t>(n) * n);
    d->weights.resize(n * n);
    int k = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            VectorXd p(2);
            p << one.nodes()[i][0], one.nodes()[j][0];
            d->nodes.push_back(std::move(p));
            d->weights[k++] = one.weights()[i] * one.weights()[j];
        }
    return IntegrationScheme(Kind::TangentGaussLegendre, std::move(d), 1e-8);
}

IntegrationScheme IntegrationScheme::simplex_grid(int dim, int cells_per_axis) {
    auto d = std::make_shared<Data>();
    const double h = 1.0 / cells_per_axis;
    const double cell_vol = std::pow(h, dim);
    std::vector<int> idx(dim, 0);
    std::vector<VectorXd> nodes;
    while (true) {
        VectorXd p(dim);
        double s = 0.0;
        for (int i = 0; i < dim; ++i) {
            p[i] = (idx[i] + 0.5) * h;
            s += p[i];
        }
        if (s < 1.0) nodes.push_back(std::move(p));
        int i = 0;
        for (; i < dim; ++i) {
            if (++idx[i] < cells_per_axis) break;
            idx[i] = 0;
        }
        if (i == dim) break;
    }
    d->weights = VectorXd::Constant(static_cast<int>(nodes.size()), cell_vol);
    d->nodes = std::move(nodes);
    return IntegrationScheme(Kind::SimplexGrid, std::move(d), 1e-3);
}

IntegrationScheme IntegrationScheme::monte_carlo_simplex(int dim, int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::exponential_distribution<double> expo(1.0);
    auto d = std::make_shared<Data>();
    d->nodes.resize(n);
    double vol = 1.0;
    for (int i = 2; i <= dim; ++i) vol /= i;  // volume of the corner simplex is 1/dim!
    d->weights = VectorXd::Constant(n, vol / n);
    for (int k = 0; k < n; ++k) {
        VectorXd e(dim + 1);
        for (int i = 0; i <= dim; ++i) e[i] = expo(rng);
        d->nodes[k] = e.head(dim) / e.sum();
    }
    return IntegrationScheme(Kind::MonteCarlo, std::move(d), 1e-2);
}

double IntegrationScheme::integrate(const ScalarFn& g) const {
    KahanSum acc;
    const auto& nodes = data_->nodes;
    const auto& w = data_->weights;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        const double wk = w[static_cast<int>(k)];
        if (wk == 0.0) continue;  // node outside the effective support of the measure
        const double v = g(nodes[k]);
        if (!std::isfinite(v))
            throw NonFiniteIntegrand("integrand not finite at node " + point_str(nodes[k]));
        acc.add(wk * v);
    }
    return acc.value();
}

IntegrationScheme IntegrationScheme::reweighted(const ScalarFn& rho) const {
    auto d = std::make_shared<Data>();
    d->nodes = data_->nodes;
    d->weights = data_->weights;
    for (int k = 0; k < d->weights.size(); ++k) {
        const double r = rho(d->nodes[k]);
        // zero is fine: tails of a reference density may underflow at far nodes
        if (!(r >= 0.0) || !std::isfinite(r))
            throw PositivityViolation("reweighted: density must be nonnegative and finite at nodes");
        d->weights[k] *= r;
    }
    return IntegrationScheme(kind_, std::move(d), tolerance_);
}

IntegrationScheme IntegrationScheme::with_tolerance(double tol) const {
    return IntegrationScheme(kind_, data_, tol);
}

// ---------------------------------------------------------------------------
// Finite differences

namespace {

double admissible_step(const Domain* dom, const VectorXd& u, int i, double h) {
    if (!dom) return h;
    VectorXd p = u, m = u;
    for (int tries = 0; tries < 60; ++tries) {
        p[i] = u[i] + h;
        m[i] = u[i] - h;
        if (dom->contains(p) && dom->contains(m)) {
            // Close to the boundary the integrand is typically singular; a
            // step that barely fits still has O(1) relative truncation error,
            // so back further away once clipping has happened.
            return tries == 0 ? h : h / 64.0;
        }
        h *= 0.5;
    }
    throw DomainViolation("finite-difference stencil cannot stay inside the domain");
}

}  // namespace

VectorXd fd_gradient(const ScalarFn& f, const VectorXd& u, const Domain* dom, double step_scale) {
    const double base = std::cbrt(std::numeric_limits<double>::epsilon()) * step_scale;
    VectorXd g(u.size());
    VectorXd p = u;
    for (int i = 0; i < u.size(); ++i) {
        const double h = admissible_step(dom, u, i, base * (1.0 + std::abs(u[i])));
        p[i] = u[i] + h;
        const double fp = f(p);
        p[i] = u[i] - h;
        const double fm = f(p);
        p[i] = u[i];
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

MatrixXd fd_hessian(const ScalarFn& f, const VectorXd& u, const Domain* dom, double step_scale) {
    const int n = static_cast<int>(u.size());
    const double base =
        std::pow(std::numeric_limits<double>::epsilon(), 0.25) * step_scale;
    VectorXd h(n);
    for (int i = 0; i < n; ++i)
        h[i] = admissible_step(dom, u, i, base * (1.0 + std::abs(u[i])));
    MatrixXd hess(n, n);
    const double f0 = f(u);
    VectorXd p = u;
    for (int i = 0; i < n; ++i) {
        p[i] = u[i] + h[i];
        const double fp = f(p);
        p[i] = u[i] - h[i];
        const double fm = f(p);
        p[i] = u[i];
        hess(i, i) = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
        for (int j = i + 1; j < n; ++j) {
            p[i] = u[i] + h[i];
            p[j] = u[j] + h[j];
            const double fpp = f(p);
            p[j] = u[j] - h[j];
            const double fpm = f(p);
            p[i] = u[i] - h[i];
            const double fmm = f(p);
            p[j] = u[j] + h[j];
            const double fmp = f(p);
            p[i] = u[i];
            p[j] = u[j];
            hess(i, j) = hess(j, i) = (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[j]);
        }
    }
    return hess;
}

MatrixXd fd_hessian_from_gradient(const GradientFn& grad, const VectorXd& u, const Domain* dom,
                                  double step_scale) {
    const int n = static_cast<int>(u.size());
    const double base = std::cbrt(std::numeric_limits<double>::epsilon()) * step_scale;
    MatrixXd jac(n, n);
    VectorXd p = u;
    for (int i = 0; i < n; ++i) {
        const double h = admissible_step(dom, u, i, base * (1.0 + std::abs(u[i])));
        p[i] = u[i] + h;
        const VectorXd gp = grad(p);
        p[i] = u[i] - h;
        const VectorXd gm = grad(p);
        p[i] = u[i];
        jac.col(i) = (gp - gm) / (2.0 * h);
    }
    return 0.5 * (jac + jac.transpose());
}

// ---------------------------------------------------------------------------
// maximize

MaximizeResult maximize(const ScalarFn& objective, const GradientFn& gradient, const Domain& dom,
                        const VectorXd& start, const OptimizerConfig& cfg) {
    if (!dom.contains(start, cfg.domain_margin))
        throw StartOutsideDomain("maximize: start point " + point_str(start) +
                                 " not inside the domain");
    VectorXd u = start;
    double fu = objective(u);
    if (!std::isfinite(fu)) throw StartOutsideDomain("maximize: objective not finite at start");
    double trial = 1.0;
    constexpr double kArmijo = 1e-4;
    MaximizeResult res;
    int it = 0;
    for (; it < cfg.max_iterations; ++it) {
        if (fu > cfg.value_cap)
            throw Unbounded("maximize: objective exceeded the configured cap");
        const VectorXd g = gradient(u);
        const double gn = g.norm();
        res.gradient_norm = gn;
        if (!std::isfinite(gn)) throw Error("maximize: gradient not finite");
        if (gn <= cfg.gradient_tolerance) {
            res.converged = true;
            break;
        }
        double t = trial;
        bool accepted = false;
        const double tiny = 1e-20 * (1.0 + u.norm()) / gn;
        while (t > tiny) {
            const VectorXd cand = u + t * g;
            if (dom.contains(cand, cfg.domain_margin)) {
                const double fc = objective(cand);
                if (std::isfinite(fc) && fc >= fu + kArmijo * t * gn * gn) {
                    u = cand;
                    fu = fc;
                    accepted = true;
                    break;
                }
            }
            t *= cfg.step_shrink_factor;
        }
        if (!accepted) throw NoAscentDirection("maximize: no admissible ascent step found");
        trial = std::min(t * 2.0, 1e8);
    }
    res.argmax = u;
    res.value = fu;
    res.iterations = it;
    return res;
}

MaximizeResult maximize(const ScalarFn& objective, const Domain& dom, const VectorXd& start,
                        const OptimizerConfig& cfg) {
    GradientFn g = [&objective, &dom](const VectorXd& u) {
        return fd_gradient(objective, u, &dom);
    };
    return maximize(objective, g, dom, start, cfg);
}

// ---------------------------------------------------------------------------
// Halton grid

namespace {

double halton_value(int index, int base) {
    double f = 1.0, r = 0.0;
    for (int i = index; i > 0; i /= base) {
        f /= base;
        r += f * (i % base);
    }
    return r;
}

}  // namespace

std::vector<VectorXd> halton_grid(const VectorXd& lo, const VectorXd& hi, int n,
                                  const Domain* filter, double margin) {
    static const int primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29};
    const int d = static_cast<int>(lo.size());
    if (d > 10) throw Error("halton_grid: dimension too large");
    std::vector<VectorXd> pts;
    pts.reserve(n);
    int index = 1;
    int emitted = 0;
    const int limit = 1000 * n + 1000;
    while (emitted < n && index < limit) {
        VectorXd p(d);
        for (int i = 0; i < d; ++i)
            p[i] = lo[i] + (hi[i] - lo[i]) * halton_value(index, primes[i]);
        ++index;
        if (filter && !filter->contains(p, margin)) continue;
        pts.push_back(std::move(p));
        ++emitted;
    }
    return pts;
}

}  // namespace lamdual
