#include "lamdual/families.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace lamdual {

namespace {

using nlohmann::json;

double lgamma_s(double x) { return std::lgamma(x); }

// (1 + lambda t)^{1/lambda} for 1 + lambda t > 0, via log1p for accuracy.
double power_q_exp(double lambda, double t) {
    return std::exp(std::log1p(lambda * t) / lambda);
}

std::mt19937_64 seeded(std::uint64_t seed) { return std::mt19937_64(seed); }

double standard_normal(std::mt19937_64& rng) {
    std::normal_distribution<double> n01(0.0, 1.0);
    return n01(rng);
}

double gamma_draw(std::mt19937_64& rng, double shape) {
    std::gamma_distribution<double> g(shape, 1.0);
    return g(rng);
}

double uniform_draw(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return u(rng);
}

int categorical_draw(std::mt19937_64& rng, const VectorXd& probs) {
    double u = uniform_draw(rng);
    double acc = 0.0;
    for (int i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        if (u < acc) return i;
    }
    return static_cast<int>(probs.size()) - 1;
}

std::string scheme_kind_name(IntegrationScheme::Kind k) {
    switch (k) {
        case IntegrationScheme::Kind::FiniteSum: return "finite_sum";
        case IntegrationScheme::Kind::GaussLegendre: return "gauss_legendre";
        case IntegrationScheme::Kind::TangentGaussLegendre: return "tangent_gauss_legendre";
        case IntegrationScheme::Kind::SimplexGrid: return "simplex_grid";
        case IntegrationScheme::Kind::MonteCarlo: return "monte_carlo";
    }
    return "unknown";
}

}  // namespace

// ---------------------------------------------------------------------------
// LambdaExpFamily

LambdaExpFamily::LambdaExpFamily(Config cfg) : cfg_(std::move(cfg)) {
    if (cfg_.lam.q() <= 0.0)
        throw DomainViolation("family requires q = 1 - lambda > 0 (lambda < 1)");
    if (!cfg_.statistic) throw Error("family: statistic function required");
    if (cfg_.statistic_dim <= 0) throw Error("family: statistic dimension must be positive");
    if (cfg_.natural_domain.dim() != cfg_.statistic_dim)
        throw Error("family: natural domain dimension mismatch");
}

IntegrationScheme LambdaExpFamily::scheme_for(const VectorXd& vartheta) const {
    return cfg_.scheme_for ? cfg_.scheme_for(vartheta) : cfg_.scheme;
}

bool LambdaExpFamily::in_support(const VectorXd& vartheta, const VectorXd& x) const {
    if (cfg_.support) return cfg_.support(vartheta, x);
    if (cfg_.lam.is_classical()) return true;
    return 1.0 + cfg_.lam.value() * vartheta.dot(cfg_.statistic(x)) > 0.0;
}

double LambdaExpFamily::density(const VectorXd& vartheta, const VectorXd& x) const {
    if (!cfg_.natural_domain.contains(vartheta))
        throw ParameterOutsideDomain(cfg_.kind + ": natural parameter outside the domain");
    if (!in_support(vartheta, x)) return 0.0;
    const double t = vartheta.dot(cfg_.statistic(x));
    return q_exp(cfg_.lam.q(), t) * std::exp(-potential(vartheta));
}

DensityFunction LambdaExpFamily::density_function(const VectorXd& vartheta) const {
    LambdaExpFamily self = *this;
    VectorXd th = vartheta;
    return DensityFunction{
        [self, th](const VectorXd& x) { return self.density(th, x); }, scheme_for(vartheta),
        [self, th](const VectorXd& x) { return self.in_support(th, x); }};
}

double LambdaExpFamily::potential(const VectorXd& vartheta) const {
    if (!cfg_.natural_domain.contains(vartheta))
        throw IntegralDiverged(cfg_.kind + ": normalization diverges outside the natural domain");
    if (cfg_.potential) return cfg_.potential(vartheta);
    return potential_by_quadrature(vartheta);
}

double LambdaExpFamily::potential_by_quadrature(const VectorXd& vartheta) const {
    const double qq = cfg_.lam.q();
    double z;
    try {
        z = scheme_for(vartheta).integrate([&](const VectorXd& x) {
            if (!in_support(vartheta, x)) return 0.0;
            return q_exp(qq, vartheta.dot(cfg_.statistic(x)));
        });
    } catch (const NonFiniteIntegrand&) {
        throw IntegralDiverged(cfg_.kind + ": normalization integral diverges");
    }
    if (!std::isfinite(z) || z <= 0.0)
        throw IntegralDiverged(cfg_.kind + ": normalization integral not positive and finite");
    return std::log(z);
}

Potential LambdaExpFamily::potential_fn() const {
    LambdaExpFamily self = *this;
    ScalarFn value = [self](const VectorXd& th) { return self.potential(th); };
    GradientFn grad = nullptr;
    if (cfg_.potential_gradient) {
        grad = [self](const VectorXd& th) { return self.cfg_.potential_gradient(th); };
    }
    return Potential(cfg_.natural_domain, value, grad);
}

double LambdaExpFamily::subtractive_potential(const VectorXd& theta) const {
    if (cfg_.parameter_dependent_support)
        throw SupportConditionViolated(
            cfg_.kind + ": subtractive form undefined when the support depends on the parameter");
    const double qq = cfg_.lam.q();
    // integral of q_exp(theta.F - z); +inf once the clipped region takes over
    auto mass = [&](double z) {
        try {
            const double v = cfg_.scheme.integrate([&](const VectorXd& x) {
                return q_exp(qq, theta.dot(cfg_.statistic(x)) - z);
            });
            return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
        } catch (const NonFiniteIntegrand&) {
            return std::numeric_limits<double>::infinity();
        }
    };
    double lo = 0.0, hi = 0.0;
    if (mass(0.0) >= 1.0) {
        double step = 1.0;
        while (mass(hi) > 1.0) {
            lo = hi;
            hi += step;
            step *= 2.0;
            if (hi > 1e8) throw IntegralDiverged(cfg_.kind + ": subtractive normalization diverges");
        }
    } else {
        double step = 1.0;
        while (mass(lo) < 1.0) {
            hi = lo;
            lo -= step;
            step *= 2.0;
            if (lo < -1e8) throw IntegralDiverged(cfg_.kind + ": subtractive normalization diverges");
        }
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + std::abs(lo)); ++it) {
        const double mid = 0.5 * (lo + hi);
        (mass(mid) >= 1.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

SubtractiveForm LambdaExpFamily::to_subtractive(const VectorXd& vartheta) const {
    if (cfg_.parameter_dependent_support)
        throw SupportConditionViolated(
            cfg_.kind + ": subtractive form undefined when the support depends on the parameter");
    const double phi = potential(vartheta);
    if (cfg_.lam.is_classical()) return {vartheta, phi};
    const double l = cfg_.lam.value();
    const double scale = std::exp(-l * phi);
    return {vartheta * scale, std::expm1(-l * phi) / (-l)};
}

VectorXd LambdaExpFamily::to_divisive(const VectorXd& theta, double phi_q) const {
    if (cfg_.lam.is_classical()) return theta;
    const double denom = 1.0 - cfg_.lam.value() * phi_q;
    if (denom <= 0.0)
        throw ReparameterizationOutOfRange(
            cfg_.kind + ": 1 - lambda phi_q(theta) <= 0; no divisive form with this statistic");
    return theta / denom;
}

VectorXd LambdaExpFamily::to_divisive(const VectorXd& theta) const {
    if (cfg_.lam.is_classical()) return theta;
    return to_divisive(theta, subtractive_potential(theta));
}

VectorXd LambdaExpFamily::dual_parameter(const VectorXd& vartheta) const {
    return lambda_gradient(cfg_.lam, potential_fn(), vartheta);
}

VectorXd LambdaExpFamily::escort_mean(const VectorXd& vartheta) const {
    const double qq = cfg_.lam.q();
    const IntegrationScheme sch = scheme_for(vartheta);
    auto pq = [&](const VectorXd& x) {
        const double p = density(vartheta, x);
        return p > 0.0 ? std::pow(p, qq) : 0.0;
    };
    const double z = sch.integrate(pq);
    if (!std::isfinite(z) || z <= 0.0)
        throw IntegralDiverged(cfg_.kind + ": escort normalizer not positive and finite");
    VectorXd mean(cfg_.statistic_dim);
    for (int i = 0; i < cfg_.statistic_dim; ++i)
        mean[i] = sch.integrate([&](const VectorXd& x) {
            const double w = pq(x);
            return w > 0.0 ? cfg_.statistic(x)[i] * w : 0.0;
        }) / z;
    return mean;
}

FamilyPoint LambdaExpFamily::point(const VectorXd& vartheta) const {
    FamilyPoint pt;
    pt.vartheta = vartheta;
    const double phi = potential(vartheta);
    pt.theta = cfg_.lam.is_classical() ? vartheta
                                       : VectorXd(vartheta * std::exp(-cfg_.lam.value() * phi));
    pt.eta = dual_parameter(vartheta);
    return pt;
}

MatrixXd LambdaExpFamily::sample(const VectorXd& vartheta, int n, std::uint64_t seed) const {
    if (!cfg_.sampler) throw NotImplemented(cfg_.kind + ": no sampler");
    if (!cfg_.natural_domain.contains(vartheta))
        throw ParameterOutsideDomain(cfg_.kind + ": natural parameter outside the domain");
    return cfg_.sampler(vartheta, n, seed);
}

std::string LambdaExpFamily::to_json() const {
    json j;
    j["family_kind"] = cfg_.kind;
    j["lambda"] = cfg_.lam.value();
    json params = json::object();
    for (const auto& [k, v] : cfg_.parameters) params[k] = v;
    j["parameters"] = params;
    j["scheme"] = {{"kind", scheme_kind_name(cfg_.scheme.kind())},
                   {"nodes", cfg_.scheme.node_count()}};
    if (cfg_.statistic_matrix.size() > 0) {
        json rows = json::array();
        for (int i = 0; i < cfg_.statistic_matrix.rows(); ++i) {
            json row = json::array();
            for (int k = 0; k < cfg_.statistic_matrix.cols(); ++k)
                row.push_back(cfg_.statistic_matrix(i, k));
            rows.push_back(row);
        }
        j["statistic_matrix"] = rows;
    }
    return j.dump();
}

LambdaExpFamily family_from_json(const std::string& text) {
    json j = json::parse(text);
    const std::string kind = j.at("family_kind").get<std::string>();
    const LambdaParam lam(j.at("lambda").get<double>());
    auto param = [&](const std::string& key) { return j.at("parameters").at(key).get<double>(); };
    if (kind == "simplex") return simplex_family(lam, static_cast<int>(param("d")));
    if (kind == "q_gaussian")
        return q_gaussian_family(lam, static_cast<int>(param("quadrature_nodes")));
    if (kind == "cauchy") return cauchy_family(static_cast<int>(param("quadrature_nodes")));
    if (kind == "student_t")
        return student_t_family(param("dof"), static_cast<int>(param("dim")),
                                static_cast<int>(param("quadrature_nodes")));
    if (kind == "dirichlet_perturbation")
        return dirichlet_perturbation_family(param("sigma"), static_cast<int>(param("d")),
                                             static_cast<int>(param("nodes_per_axis")));
    if (kind == "gaussian_location")
        return gaussian_location_family(static_cast<int>(param("quadrature_nodes")));
    if (kind == "discrete") {
        const auto& rows = j.at("statistic_matrix");
        MatrixXd s(rows.size(), rows.at(0).size());
        for (int i = 0; i < s.rows(); ++i)
            for (int k = 0; k < s.cols(); ++k) s(i, k) = rows.at(i).at(k).get<double>();
        return discrete_family(lam, s);
    }
    throw NotImplemented("family_from_json: no builder for kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// simplex

VectorXd simplex_natural(const LambdaParam& lam, const VectorXd& u) {
    const int d = static_cast<int>(u.size()) - 1;
    if (d < 1) throw Error("simplex_natural: need at least two states");
    if (u.minCoeff() <= 0.0) throw PositivityViolation("simplex_natural: probabilities must be positive");
    if (std::abs(u.sum() - 1.0) > 1e-9)
        throw NormalizationViolation("simplex_natural: probabilities must sum to one");
    VectorXd th(d);
    for (int i = 1; i <= d; ++i) th[i - 1] = box_cox(lam, u[i] / u[0]);
    return th;
}

VectorXd simplex_probabilities(const LambdaParam& lam, const VectorXd& vartheta) {
    const int d = static_cast<int>(vartheta.size());
    VectorXd u(d + 1);
    u[0] = 1.0;
    for (int i = 1; i <= d; ++i) u[i] = box_cox_inverse(lam, vartheta[i - 1]);
    return u / u.sum();
}

LambdaExpFamily simplex_family(const LambdaParam& lam, int d) {
    if (d < 1) throw Error("simplex_family: need at least two states");
    LambdaExpFamily::Config c;
    c.kind = "simplex";
    c.lam = lam;
    c.statistic_dim = d;
    c.sample_dim = 1;
    c.statistic = [d](const VectorXd& x) {
        VectorXd f = VectorXd::Zero(d);
        const int i = static_cast<int>(std::lround(x[0]));
        if (i >= 1 && i <= d) f[i - 1] = 1.0;
        return f;
    };
    c.scheme = IntegrationScheme::finite_states(d + 1);
    if (lam.is_classical()) {
        c.natural_domain = Domain::all(d);
    } else {
        MatrixXd a = MatrixXd::Identity(d, d) * (-lam.value());
        c.natural_domain = Domain::halfspaces(a, VectorXd::Ones(d), VectorXd::Zero(d));
    }
    const double l = lam.value();
    if (lam.is_classical()) {
        c.potential = [d](const VectorXd& th) {
            double m = 0.0;
            for (int i = 0; i < d; ++i) m = std::max(m, th[i]);
            double s = std::exp(-m);
            for (int i = 0; i < d; ++i) s += std::exp(th[i] - m);
            return m + std::log(s);
        };
        c.potential_gradient = [d](const VectorXd& th) {
            VectorXd e(d);
            double s = 1.0;
            for (int i = 0; i < d; ++i) s += (e[i] = std::exp(th[i]));
            return VectorXd(e / s);
        };
    } else {
        c.potential = [d, l](const VectorXd& th) {
            double s = 1.0;
            for (int i = 0; i < d; ++i) s += power_q_exp(l, th[i]);
            return std::log(s);
        };
        c.potential_gradient = [d, l](const VectorXd& th) {
            VectorXd e(d);
            double s = 1.0;
            for (int i = 0; i < d; ++i) s += (e[i] = power_q_exp(l, th[i]));
            for (int i = 0; i < d; ++i) e[i] = e[i] / (1.0 + l * th[i]) / s;
            return e;
        };
    }
    c.sampler = [lam](const VectorXd& th, int n, std::uint64_t seed) {
        const VectorXd probs = simplex_probabilities(lam, th);
        auto rng = seeded(seed);
        MatrixXd out(n, 1);
        for (int k = 0; k < n; ++k) out(k, 0) = categorical_draw(rng, probs);
        return out;
    };
    c.parameters = {{"d", static_cast<double>(d)}};
    return LambdaExpFamily(std::move(c));
}

// ---------------------------------------------------------------------------
// q-Gaussian

LambdaExpFamily q_gaussian_family(const LambdaParam& lam, int quadrature_nodes) {
    const double l = lam.value();
    if (l <= -2.0)
        throw DomainViolation("q_gaussian_family: not normalizable unless lambda > -2 (q < 3)");
    LambdaExpFamily::Config c;
    c.kind = "q_gaussian";
    c.lam = lam;
    c.statistic_dim = 1;
    c.sample_dim = 1;
    c.statistic = [](const VectorXd& x) { return VectorXd::Constant(1, -x[0] * x[0]); };
    c.scheme = IntegrationScheme::tangent_gauss_legendre(quadrature_nodes);
    c.natural_domain = Domain::positive_orthant(1).with_anchor(VectorXd::Ones(1));
    const int nodes = quadrature_nodes;
    if (l > 0.0) {
        c.scheme_for = [l, nodes](const VectorXd& th) {
            const double b = 1.0 / std::sqrt(l * th[0]);
            return IntegrationScheme::gauss_legendre(-b, b, nodes);
        };
        c.support = [l](const VectorXd& th, const VectorXd& x) {
            return l * th[0] * x[0] * x[0] < 1.0;
        };
        c.parameter_dependent_support = true;
    }
    // additive constant fixed by the normalization at vartheta = 1
    const double qq = lam.q();
    const IntegrationScheme at_one =
        l > 0.0 ? IntegrationScheme::gauss_legendre(-1.0 / std::sqrt(l), 1.0 / std::sqrt(l), nodes)
                : c.scheme;
    const double constant =
        std::log(at_one.integrate([qq](const VectorXd& x) { return q_exp(qq, -x[0] * x[0]); }));
    c.potential = [constant](const VectorXd& th) { return -0.5 * std::log(th[0]) + constant; };
    c.potential_gradient = [](const VectorXd& th) {
        return VectorXd::Constant(1, -0.5 / th[0]);
    };
    c.sampler = [lam, l](const VectorXd& th, int n, std::uint64_t seed) {
        auto rng = seeded(seed);
        MatrixXd out(n, 1);
        if (lam.is_classical()) {
            const double sd = 1.0 / std::sqrt(2.0 * th[0]);
            for (int k = 0; k < n; ++k) out(k, 0) = sd * standard_normal(rng);
        } else if (l < 0.0) {
            // heavy tail: scaled Student-t
            const double dof = -(2.0 + l) / l;
            const double s = 1.0 / std::sqrt((2.0 + l) * th[0]);
            for (int k = 0; k < n; ++k) {
                const double z = standard_normal(rng);
                const double w = 2.0 * gamma_draw(rng, 0.5 * dof);  // chi-squared
                out(k, 0) = s * z / std::sqrt(w / dof);
            }
        } else {
            // compact support: symmetric Beta on (-1, 1), rescaled
            const double a = 1.0 / l + 1.0;
            const double scale = 1.0 / std::sqrt(l * th[0]);
            for (int k = 0; k < n; ++k) {
                const double g1 = gamma_draw(rng, a), g2 = gamma_draw(rng, a);
                out(k, 0) = scale * (2.0 * g1 / (g1 + g2) - 1.0);
            }
        }
        return out;
    };
    c.parameters = {{"quadrature_nodes", static_cast<double>(quadrature_nodes)}};
    return LambdaExpFamily(std::move(c));
}

// ---------------------------------------------------------------------------
// Cauchy

VectorXd cauchy_natural(double mu, double sigma) {
    if (sigma <= 0.0) throw DomainViolation("cauchy_natural: scale must be positive");
    const double denom = mu * mu + sigma * sigma;
    VectorXd th(2);
    th << 2.0 * mu / denom, -1.0 / denom;
    return th;
}

std::pair<double, double> cauchy_location_scale(const VectorXd& vartheta) {
    const double t1 = vartheta[0], t2 = vartheta[1];
    if (!(t1 * t1 + 4.0 * t2 < 0.0))
        throw ParameterOutsideDomain("cauchy: parameter outside the parabola region");
    const double mu = -t1 / (2.0 * t2);
    const double s2 = (-4.0 * t2 - t1 * t1) / (4.0 * t2 * t2);
    return {mu, std::sqrt(s2)};
}

LambdaExpFamily cauchy_family(int quadrature_nodes) {
    LambdaExpFamily::Config c;
    c.kind = "cauchy";
    c.lam = LambdaParam(-1.0);
    c.statistic_dim = 2;
    c.sample_dim = 1;
    c.statistic = [](const VectorXd& x) {
        VectorXd f(2);
        f << x[0], x[0] * x[0];
        return f;
    };
    c.scheme = IntegrationScheme::tangent_gauss_legendre(quadrature_nodes);
    VectorXd anchor(2);
    anchor << 0.0, -1.0;
    c.natural_domain = Domain::predicate(
        2, [](const VectorXd& th) { return th[0] * th[0] + 4.0 * th[1] < 0.0; }, anchor);
    c.potential = [](const VectorXd& th) {
        return -0.5 * std::log(-th[1] - 0.25 * th[0] * th[0]) + std::log(M_PI);
    };
    c.potential_gradient = [](const VectorXd& th) {
        const double s = -th[1] - 0.25 * th[0] * th[0];
        VectorXd g(2);
        g << 0.25 * th[0] / s, 0.5 / s;
        return g;
    };
    c.sampler = [](const VectorXd& th, int n, std::uint64_t seed) {
        const auto [mu, sigma] = cauchy_location_scale(th);
        auto rng = seeded(seed);
        MatrixXd out(n, 1);
        for (int k = 0; k < n; ++k)
            out(k, 0) = mu + sigma * std::tan(M_PI * (uniform_draw(rng) - 0.5));
        return out;
    };
    c.parameters = {{"quadrature_nodes", static_cast<double>(quadrature_nodes)}};
    return LambdaExpFamily(std::move(c));
}

// ---------------------------------------------------------------------------
// Student-t location-scale

namespace {

// quadratic coefficient matrix of the pairing: t.F(x) = c1.x + x^T C2 x
MatrixXd t_quad_matrix(int n, double lambda, const VectorXd& vartheta) {
    MatrixXd c2(n, n);
    int k = n;
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            const double v = lambda * vartheta[k++];
            c2(i, j) = c2(j, i) = (i == j) ? v : 0.5 * v;
        }
    return c2;
}

double t_log_norm_constant(double dof, int n, const MatrixXd& sigma) {
    return lgamma_s(0.5 * (dof + n)) - lgamma_s(0.5 * dof) -
           0.5 * n * std::log(dof * M_PI) - 0.5 * std::log(sigma.determinant());
}

}  // namespace

VectorXd student_t_natural(double dof, const VectorXd& mu, const MatrixXd& sigma) {
    const int n = static_cast<int>(mu.size());
    const double lambda = -2.0 / (dof + n);
    const MatrixXd m = sigma.inverse();
    const double a = 1.0 + mu.dot(m * mu) / dof;
    const MatrixXd c2 = m / (dof * a);
    const VectorXd c1 = -2.0 * c2 * mu;
    VectorXd th(n + n * (n + 1) / 2);
    th.head(n) = c1 / lambda;
    int k = n;
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) th[k++] = (i == j ? c2(i, i) : 2.0 * c2(i, j)) / lambda;
    return th;
}

void student_t_location_scale(double dof, const VectorXd& vartheta, VectorXd& mu,
                              MatrixXd& sigma) {
    int n = 1;
    while (n + n * (n + 1) / 2 < vartheta.size()) ++n;
    const double lambda = -2.0 / (dof + n);
    const MatrixXd c2 = t_quad_matrix(n, lambda, vartheta);
    Eigen::LLT<MatrixXd> llt(c2);
    if (llt.info() != Eigen::Success)
        throw ParameterOutsideDomain("student_t: quadratic coefficient not positive definite");
    const VectorXd c1 = lambda * vartheta.head(n);
    mu = -0.5 * llt.solve(c1);
    const double denom = 1.0 - mu.dot(c2 * mu);
    if (denom <= 0.0) throw ParameterOutsideDomain("student_t: location constraint violated");
    const MatrixXd m = (dof / denom) * c2;
    sigma = m.inverse();
}

LambdaExpFamily student_t_family(double dof, int n, int quadrature_nodes) {
    if (dof <= 0.0) throw DomainViolation("student_t_family: dof must be positive");
    if (n != 1 && n != 2)
        throw NotImplemented("student_t_family: implemented for dimensions 1 and 2");
    LambdaExpFamily::Config c;
    c.kind = "student_t";
    c.lam = LambdaParam(-2.0 / (dof + n));
    c.statistic_dim = n + n * (n + 1) / 2;
    c.sample_dim = n;
    c.statistic = [n](const VectorXd& x) {
        VectorXd f(n + n * (n + 1) / 2);
        f.head(n) = x;
        int k = n;
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) f[k++] = x[i] * x[j];
        return f;
    };
    c.scheme = n == 1 ? IntegrationScheme::tangent_gauss_legendre(quadrature_nodes)
                      : IntegrationScheme::tangent_gauss_legendre_2d(
                            std::min(quadrature_nodes, 128));
    const double lambda = c.lam.value();
    c.natural_domain = Domain::predicate(
        c.statistic_dim,
        [n, lambda](const VectorXd& th) {
            const MatrixXd c2 = t_quad_matrix(n, lambda, th);
            Eigen::LLT<MatrixXd> llt(c2);
            if (llt.info() != Eigen::Success) return false;
            const VectorXd c1 = lambda * th.head(n);
            const VectorXd mu = -0.5 * llt.solve(c1);
            return mu.dot(c2 * mu) < 1.0;
        },
        student_t_natural(dof, VectorXd::Zero(n), MatrixXd::Identity(n, n)));
    c.potential = [dof, n, lambda](const VectorXd& th) {
        VectorXd mu;
        MatrixXd sigma;
        student_t_location_scale(dof, th, mu, sigma);
        const double a = 1.0 + mu.dot(sigma.inverse() * mu) / dof;
        return -t_log_norm_constant(dof, n, sigma) - std::log(a) / lambda;
    };
    c.sampler = [dof, n](const VectorXd& th, int count, std::uint64_t seed) {
        VectorXd mu;
        MatrixXd sigma;
        student_t_location_scale(dof, th, mu, sigma);
        const MatrixXd chol = Eigen::LLT<MatrixXd>(sigma).matrixL();
        auto rng = seeded(seed);
        MatrixXd out(count, n);
        for (int k = 0; k < count; ++k) {
            VectorXd z(n);
            for (int i = 0; i < n; ++i) z[i] = standard_normal(rng);
            const double w = 2.0 * gamma_draw(rng, 0.5 * dof);
            out.row(k) = (mu + chol * z / std::sqrt(w / dof)).transpose();
        }
        return out;
    };
    c.parameters = {{"dof", dof},
                    {"dim", static_cast<double>(n)},
                    {"quadrature_nodes", static_cast<double>(quadrature_nodes)}};
    return LambdaExpFamily(std::move(c));
}

// ---------------------------------------------------------------------------
// Dirichlet perturbation

VectorXd dirichlet_natural(double sigma, const VectorXd& center) {
    if (center.minCoeff() <= 0.0)
        throw PositivityViolation("dirichlet_natural: center must be interior");
    const int d = static_cast<int>(center.size()) - 1;
    VectorXd th(d);
    for (int i = 1; i <= d; ++i) th[i - 1] = -center[0] / (sigma * center[i]);
    return th;
}

VectorXd dirichlet_center(double sigma, const VectorXd& vartheta) {
    const int d = static_cast<int>(vartheta.size());
    VectorXd p(d + 1);
    p[0] = 1.0;
    for (int i = 1; i <= d; ++i) {
        if (vartheta[i - 1] >= 0.0)
            throw ParameterOutsideDomain("dirichlet: natural parameter must be negative");
        p[i] = -1.0 / (sigma * vartheta[i - 1]);
    }
    return p / p.sum();
}

IntegrationScheme beta_weight_scheme(double a, double b, int n) {
    if (a <= 0.0 || b <= 0.0) throw DomainViolation("beta_weight_scheme: exponents must be positive");
    if (n < 1) throw DomainViolation("beta_weight_scheme: need at least one node");
    // Gauss-Jacobi on [-1, 1] with weight (1-t)^alpha (1+t)^beta, via the
    // Golub-Welsch eigenvalue construction; normalized so the weights sum to 1.
    const double alpha = b - 1.0, beta = a - 1.0;
    const double ab = alpha + beta;
    VectorXd diag(n), off(std::max(n - 1, 0));
    diag[0] = (beta - alpha) / (ab + 2.0);
    for (int k = 1; k < n; ++k) {
        const double two_k = 2.0 * k;
        diag[k] = (beta * beta - alpha * alpha) / ((two_k + ab) * (two_k + ab + 2.0));
    }
    if (n > 1) off[0] = std::sqrt(4.0 * (alpha + 1.0) * (beta + 1.0) /
                                  ((ab + 2.0) * (ab + 2.0) * (ab + 3.0)));
    for (int k = 2; k < n; ++k) {
        const double two_k = 2.0 * k;
        off[k - 1] = std::sqrt(4.0 * k * (k + alpha) * (k + beta) * (k + ab) /
                               ((two_k + ab) * (two_k + ab) * (two_k + ab + 1.0) *
                                (two_k + ab - 1.0)));
    }
    MatrixXd j = MatrixXd::Zero(n, n);
    for (int k = 0; k < n; ++k) j(k, k) = diag[k];
    for (int k = 0; k + 1 < n; ++k) j(k, k + 1) = j(k + 1, k) = off[k];
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(j);
    std::vector<VectorXd> nodes(n);
    VectorXd weights(n);
    for (int k = 0; k < n; ++k) {
        nodes[k] = VectorXd::Constant(1, 0.5 * (1.0 + eig.eigenvalues()[k]));
        const double v0 = eig.eigenvectors()(0, k);
        weights[k] = v0 * v0;
    }
    return IntegrationScheme::finite_sum(std::move(nodes), weights).with_tolerance(1e-12);
}

LambdaExpFamily dirichlet_perturbation_family(double sigma, int d, int nodes_per_axis) {
    if (sigma <= 0.0) throw DomainViolation("dirichlet_perturbation_family: sigma must be positive");
    if (d < 1 || d > 3)
        throw NotImplemented("dirichlet_perturbation_family: implemented for 1 <= d <= 3");
    const double kappa = 1.0 / (sigma * (1 + d));
    LambdaExpFamily::Config c;
    c.kind = "dirichlet_perturbation";
    c.lam = LambdaParam(-sigma);
    c.statistic_dim = d;
    c.sample_dim = d;
    c.statistic = [d](const VectorXd& x) {
        const double x0 = 1.0 - x.sum();
        VectorXd f(d);
        for (int i = 0; i < d; ++i) f[i] = x[i] / x0;
        return f;
    };
    // Stick-breaking quadrature for the symmetric Dirichlet measure, then
    // divided by the density of the member centered at the barycenter; this
    // represents the reference measure with smooth effective integrands.
    {
        std::vector<IntegrationScheme> levels;
        for (int i = 1; i <= d; ++i)
            levels.push_back(beta_weight_scheme(kappa, (d - i + 1) * kappa, nodes_per_axis));
        std::vector<VectorXd> nodes;
        std::vector<double> weights;
        std::vector<int> idx(d, 0);
        const int per = levels.front().node_count();
        const long total = static_cast<long>(std::pow(per, d));
        nodes.reserve(total);
        weights.reserve(total);
        for (long flat = 0; flat < total; ++flat) {
            long rest = flat;
            double remaining = 1.0, w = 1.0;
            VectorXd q(d);
            for (int i = 0; i < d; ++i) {
                const int j = static_cast<int>(rest % per);
                rest /= per;
                const double s = levels[i].nodes()[j][0];
                q[i] = remaining * s;
                remaining *= (1.0 - s);
                w *= levels[i].weights()[j];
            }
            const double q0 = remaining;
            // density of the barycenter-centered member with respect to nu
            const double rho_bar = std::pow(q0, 1.0 / sigma) * std::pow(sigma, -d * kappa);
            nodes.push_back(q);
            weights.push_back(w / rho_bar);
        }
        c.scheme = IntegrationScheme::finite_sum(
                       std::move(nodes),
                       Eigen::Map<const VectorXd>(weights.data(), weights.size()))
                       .with_tolerance(1e-7);
    }
    c.natural_domain =
        Domain::box(VectorXd::Constant(d, -std::numeric_limits<double>::infinity()),
                    VectorXd::Zero(d))
            .with_anchor(VectorXd::Constant(d, -1.0 / sigma));
    c.potential = [d, kappa](const VectorXd& th) {
        double s = 0.0;
        for (int i = 0; i < d; ++i) s += std::log(-th[i]);
        return -kappa * s;
    };
    c.potential_gradient = [d, kappa](const VectorXd& th) {
        VectorXd g(d);
        for (int i = 0; i < d; ++i) g[i] = -kappa / th[i];
        return g;
    };
    c.sampler = [sigma, d, kappa](const VectorXd& th, int n, std::uint64_t seed) {
        const VectorXd p = dirichlet_center(sigma, th);
        auto rng = seeded(seed);
        MatrixXd out(n, d);
        for (int k = 0; k < n; ++k) {
            VectorXd g(d + 1);
            for (int i = 0; i <= d; ++i) g[i] = gamma_draw(rng, kappa);
            const VectorXd dir = g / g.sum();
            VectorXd prod = p.cwiseProduct(dir);
            prod /= prod.sum();
            out.row(k) = prod.tail(d).transpose();
        }
        return out;
    };
    c.parameters = {{"sigma", sigma},
                    {"d", static_cast<double>(d)},
                    {"nodes_per_axis", static_cast<double>(nodes_per_axis)}};
    return LambdaExpFamily(std::move(c));
}

// ---------------------------------------------------------------------------
// finite-state family with explicit statistics

LambdaExpFamily discrete_family(const LambdaParam& lam, const MatrixXd& statistic_by_state) {
    const int states = static_cast<int>(statistic_by_state.rows());
    const int m = static_cast<int>(statistic_by_state.cols());
    if (states < 2 || m < 1) throw Error("discrete_family: need >= 2 states and >= 1 statistic");
    LambdaExpFamily::Config c;
    c.kind = "discrete";
    c.lam = lam;
    c.statistic_dim = m;
    c.sample_dim = 1;
    MatrixXd s = statistic_by_state;
    c.statistic = [s](const VectorXd& x) {
        return VectorXd(s.row(static_cast<int>(std::lround(x[0]))).transpose());
    };
    c.scheme = IntegrationScheme::finite_states(states);
    if (lam.is_classical()) {
        c.natural_domain = Domain::all(m);
    } else {
        c.natural_domain = Domain::halfspaces(-lam.value() * s, VectorXd::Ones(states),
                                              VectorXd::Zero(m));
    }
    const bool classical = lam.is_classical();
    const double l = classical ? 0.0 : lam.value();
    const double qq = lam.q();
    c.potential = [s, states, qq](const VectorXd& th) {
        double z = 0.0;
        for (int i = 0; i < states; ++i) z += q_exp(qq, s.row(i).dot(th));
        return std::log(z);
    };
    c.potential_gradient = [s, states, l, qq, m](const VectorXd& th) {
        VectorXd g = VectorXd::Zero(m);
        double z = 0.0;
        for (int i = 0; i < states; ++i) {
            const double t = s.row(i).dot(th);
            const double e = q_exp(qq, t);
            z += e;
            g += (l == 0.0 ? e : e / (1.0 + l * t)) * s.row(i).transpose();
        }
        return VectorXd(g / z);
    };
    c.sampler = [s, states, qq](const VectorXd& th, int n, std::uint64_t seed) {
        VectorXd probs(states);
        for (int i = 0; i < states; ++i) probs[i] = q_exp(qq, s.row(i).dot(th));
        probs /= probs.sum();
        auto rng = seeded(seed);
        MatrixXd out(n, 1);
        for (int k = 0; k < n; ++k) out(k, 0) = categorical_draw(rng, probs);
        return out;
    };
    c.parameters = {{"states", static_cast<double>(states)}};
    c.statistic_matrix = s;
    return LambdaExpFamily(std::move(c));
}

// ---------------------------------------------------------------------------
// classical Gaussian location family

LambdaExpFamily gaussian_location_family(int quadrature_nodes) {
    LambdaExpFamily::Config c;
    c.kind = "gaussian_location";
    c.lam = LambdaParam::classical();
    c.statistic_dim = 1;
    c.sample_dim = 1;
    c.statistic = [](const VectorXd& x) { return x; };
    c.scheme = IntegrationScheme::tangent_gauss_legendre(quadrature_nodes)
                   .reweighted([](const VectorXd& x) {
                       return std::exp(-0.5 * x[0] * x[0]) / std::sqrt(2.0 * M_PI);
                   });
    c.natural_domain = Domain::all(1);
    c.potential = [](const VectorXd& th) { return 0.5 * th[0] * th[0]; };
    c.potential_gradient = [](const VectorXd& th) { return th; };
    c.sampler = [](const VectorXd& th, int n, std::uint64_t seed) {
        auto rng = seeded(seed);
        MatrixXd out(n, 1);
        for (int k = 0; k < n; ++k) out(k, 0) = th[0] + standard_normal(rng);
        return out;
    };
    c.parameters = {{"quadrature_nodes", static_cast<double>(quadrature_nodes)}};
    return LambdaExpFamily(std::move(c));
}

// ---------------------------------------------------------------------------
// power-family reparameterization

VectorXd alpha_family_natural(const LambdaParam& lam, const VectorXd& theta) {
    if (lam.is_classical())
        throw DomainViolation("alpha_family_natural: defined for nonzero lambda");
    if (theta[0] <= 0.0)
        throw PositivityViolation("alpha_family_natural: leading coefficient must be positive");
    const int d = static_cast<int>(theta.size()) - 1;
    VectorXd th(d);
    for (int i = 1; i <= d; ++i) th[i - 1] = theta[i] / (lam.value() * theta[0]);
    return th;
}

LambdaExpFamily alpha_family_reparameterize(std::vector<ScalarFn> statistics,
                                            const IntegrationScheme& base_scheme,
                                            const LambdaParam& lam) {
    if (lam.is_classical())
        throw DomainViolation("alpha_family_reparameterize: defined for nonzero lambda");
    if (statistics.size() < 2)
        throw Error("alpha_family_reparameterize: need a leading statistic plus at least one more");
    const ScalarFn f0 = statistics[0];
    base_scheme.integrate([&](const VectorXd& x) {
        if (f0(x) <= 0.0)
            throw PositivityViolation("alpha_family_reparameterize: leading statistic must be positive");
        return 0.0;
    });
    const int d = static_cast<int>(statistics.size()) - 1;
    LambdaExpFamily::Config c;
    c.kind = "alpha_power";
    c.lam = lam;
    c.statistic_dim = d;
    c.sample_dim = base_scheme.nodes().front().size();
    std::vector<ScalarFn> rest(statistics.begin() + 1, statistics.end());
    c.statistic = [f0, rest, d](const VectorXd& x) {
        const double base = f0(x);
        VectorXd f(d);
        for (int i = 0; i < d; ++i) f[i] = rest[i](x) / base;
        return f;
    };
    const double inv_l = 1.0 / lam.value();
    c.scheme = base_scheme.reweighted(
        [f0, inv_l](const VectorXd& x) { return std::pow(f0(x), inv_l); });
    c.natural_domain = Domain::all(d);
    return LambdaExpFamily(std::move(c));
}

ShiftedDivisive shifted_divisive(const LambdaExpFamily& fam, const VectorXd& theta,
                                 const VectorXd& theta0, double c) {
    if (fam.lam().is_classical())
        throw DomainViolation("shifted_divisive: defined for nonzero lambda");
    const double l = fam.lam().value();
    const double phi_q = fam.subtractive_potential(theta);
    const double denom = 1.0 - l * phi_q + c * l * theta.dot(theta0);
    if (denom <= 0.0)
        throw ReparameterizationOutOfRange(
            "shifted_divisive: shift constant does not restore positivity");
    LambdaExpFamily::Config cfg;
    cfg.kind = fam.kind() + "_shifted";
    cfg.lam = fam.lam();
    cfg.statistic_dim = fam.statistic_dim();
    cfg.sample_dim = fam.sample_dim();
    const VectorXd shift = c * theta0;
    LambdaExpFamily base = fam;
    cfg.statistic = [base, shift](const VectorXd& x) {
        return VectorXd(base.statistic(x) - shift);
    };
    cfg.scheme = fam.scheme();
    const VectorXd vartheta = theta / denom;
    cfg.natural_domain = Domain::all(fam.statistic_dim()).with_anchor(vartheta);
    return {LambdaExpFamily(std::move(cfg)), vartheta};
}

}  // namespace lamdual
