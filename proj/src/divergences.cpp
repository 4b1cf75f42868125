#include "lamdual/divergences.hpp"

#include <cmath>
#include <limits>

namespace lamdual {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kDensityFloor = 1e-300;

void check_order(double q) {
    if (!(q > 0.0)) throw Error("entropy/divergence order must be positive, got " +
                                std::to_string(q));
}

bool near_one(double q) { return std::abs(q - 1.0) < kClassicalLambdaThreshold; }

double finite_or_diverged(double v, const char* what) {
    if (!std::isfinite(v)) throw IntegralDiverged(std::string(what) + " is not finite");
    return v;
}

// integrate and map non-finite integrand values to IntegralDiverged
double integrate_densities(const IntegrationScheme& s, const ScalarFn& g, const char* what) {
    try {
        return finite_or_diverged(s.integrate(g), what);
    } catch (const NonFiniteIntegrand&) {
        throw IntegralDiverged(std::string(what) + " integrand is not finite");
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// DiscreteDensity

DiscreteDensity::DiscreteDensity(VectorXd p) : p_(std::move(p)) {
    if (p_.size() == 0) throw Error("DiscreteDensity: empty");
    for (int i = 0; i < p_.size(); ++i)
        if (!(p_[i] > 0.0) || !std::isfinite(p_[i]))
            throw PositivityViolation("DiscreteDensity: entries must be strictly positive");
    if (std::abs(p_.sum() - 1.0) > 1e-12)
        throw NormalizationViolation("DiscreteDensity: entries sum to " +
                                     std::to_string(p_.sum()));
}

DiscreteDensity DiscreteDensity::normalized(const VectorXd& w) {
    for (int i = 0; i < w.size(); ++i)
        if (!(w[i] > 0.0) || !std::isfinite(w[i]))
            throw PositivityViolation("DiscreteDensity::normalized: weights must be positive");
    return DiscreteDensity(w / w.sum());
}

void DensityFunction::validate() const {
    const double total = integrate_densities(scheme, pdf, "density normalization");
    if (std::abs(total - 1.0) > scheme.tolerance())
        throw NormalizationViolation("density integrates to " + std::to_string(total));
}

DensityFunction as_density_function(const DiscreteDensity& p) {
    VectorXd probs = p.probs();
    return DensityFunction{
        [probs](const VectorXd& x) { return probs[static_cast<int>(std::lround(x[0]))]; },
        IntegrationScheme::finite_states(p.size())};
}

// ---------------------------------------------------------------------------
// escort

DiscreteDensity escort(double alpha, const DiscreteDensity& p) {
    VectorXd w(p.size());
    for (int i = 0; i < p.size(); ++i) w[i] = std::pow(p[i], alpha);
    const double z = finite_or_diverged(w.sum(), "escort normalizer");
    if (!(z > 0.0)) throw IntegralDiverged("escort normalizer is zero");
    return DiscreteDensity(w / z);
}

DensityFunction escort(double alpha, const DensityFunction& p) {
    auto pw = [alpha, pdf = p.pdf](const VectorXd& x) {
        const double v = pdf(x);
        return v > 0.0 ? std::pow(v, alpha) : 0.0;
    };
    const double z = integrate_densities(p.scheme, pw, "escort normalizer");
    if (!(z > 0.0)) throw IntegralDiverged("escort normalizer is zero");
    return DensityFunction{[pw, z](const VectorXd& x) { return pw(x) / z; }, p.scheme, p.support};
}

// ---------------------------------------------------------------------------
// entropies

double shannon_entropy(const DiscreteDensity& p) {
    double s = 0.0;
    for (int i = 0; i < p.size(); ++i) s -= p[i] * std::log(p[i]);
    return s;
}

double shannon_entropy(const DensityFunction& p) {
    return integrate_densities(
        p.scheme,
        [&p](const VectorXd& x) {
            const double v = p.pdf(x);
            return v > kDensityFloor ? -v * std::log(v) : 0.0;
        },
        "Shannon entropy");
}

namespace {

double power_sum(double q, const DiscreteDensity& p) {
    double s = 0.0;
    for (int i = 0; i < p.size(); ++i) s += std::pow(p[i], q);
    return finite_or_diverged(s, "power sum");
}

double power_integral(double q, const DensityFunction& p) {
    return integrate_densities(
        p.scheme,
        [&](const VectorXd& x) {
            const double v = p.pdf(x);
            return v > 0.0 ? std::pow(v, q) : 0.0;
        },
        "power integral");
}

}  // namespace

double tsallis_entropy(double q, const DiscreteDensity& p) {
    check_order(q);
    if (near_one(q)) return shannon_entropy(p);
    return (1.0 - power_sum(q, p)) / (q - 1.0);
}

double tsallis_entropy(double q, const DensityFunction& p) {
    check_order(q);
    if (near_one(q)) return shannon_entropy(p);
    return (1.0 - power_integral(q, p)) / (q - 1.0);
}

double renyi_entropy(double q, const DiscreteDensity& p) {
    check_order(q);
    if (near_one(q)) return shannon_entropy(p);
    return std::log(power_sum(q, p)) / (1.0 - q);
}

double renyi_entropy(double q, const DensityFunction& p) {
    check_order(q);
    if (near_one(q)) return shannon_entropy(p);
    const double z = power_integral(q, p);
    if (!(z > 0.0)) throw IntegralDiverged("Renyi power integral is zero");
    return std::log(z) / (1.0 - q);
}

// ---------------------------------------------------------------------------
// divergences

double kl_divergence(const DiscreteDensity& p, const DiscreteDensity& r) {
    if (p.size() != r.size()) throw Error("kl_divergence: size mismatch");
    double s = 0.0;
    for (int i = 0; i < p.size(); ++i) s += p[i] * (std::log(p[i]) - std::log(r[i]));
    return s;
}

double kl_divergence(const DensityFunction& p, const DensityFunction& r) {
    return integrate_densities(
        p.scheme,
        [&](const VectorXd& x) {
            const double pv = p.pdf(x);
            if (pv <= kDensityFloor) return 0.0;
            const double rv = std::max(r.pdf(x), kDensityFloor);
            return pv * (std::log(pv) - std::log(rv));
        },
        "KL divergence");
}

double renyi_divergence(double q, const DiscreteDensity& p, const DiscreteDensity& r) {
    check_order(q);
    if (near_one(q)) return kl_divergence(p, r);
    if (p.size() != r.size()) throw Error("renyi_divergence: size mismatch");
    double s = 0.0;
    for (int i = 0; i < p.size(); ++i)
        s += std::pow(p[i], q) * std::pow(r[i], 1.0 - q);
    return std::log(finite_or_diverged(s, "Renyi sum")) / (q - 1.0);
}

double renyi_divergence(double q, const DensityFunction& p, const DensityFunction& r) {
    check_order(q);
    if (near_one(q)) return kl_divergence(p, r);
    const double s = integrate_densities(
        p.scheme,
        [&](const VectorXd& x) {
            const double pv = p.pdf(x);
            if (pv <= 0.0) return 0.0;
            const double rv = r.pdf(x);
            if (rv <= 0.0) {
                // contributes p^q 0^{1-q}: zero for q < 1, +inf for q > 1
                if (q < 1.0) return 0.0;
                throw IntegralDiverged("Renyi divergence: second density vanishes where the "
                                       "first is positive with q > 1");
            }
            return std::pow(pv, q) * std::pow(rv, 1.0 - q);
        },
        "Renyi integral");
    if (!(s > 0.0)) throw IntegralDiverged("Renyi integral is zero");
    return std::log(s) / (q - 1.0);
}

double alpha_divergence(double alpha, const DiscreteDensity& p, const DiscreteDensity& r) {
    // continuity: the exponent on p vanishes at alpha = 1, leaving KL(r||p)
    if (std::abs(alpha - 1.0) < kClassicalLambdaThreshold) return kl_divergence(r, p);
    if (std::abs(alpha + 1.0) < kClassicalLambdaThreshold) return kl_divergence(p, r);
    if (p.size() != r.size()) throw Error("alpha_divergence: size mismatch");
    double s = 0.0;
    for (int i = 0; i < p.size(); ++i)
        s += std::pow(p[i], 0.5 * (1.0 - alpha)) * std::pow(r[i], 0.5 * (1.0 + alpha));
    return 4.0 / (1.0 - alpha * alpha) * (1.0 - s);
}

double alpha_divergence(double alpha, const DensityFunction& p, const DensityFunction& r) {
    if (std::abs(alpha - 1.0) < kClassicalLambdaThreshold) return kl_divergence(r, p);
    if (std::abs(alpha + 1.0) < kClassicalLambdaThreshold) return kl_divergence(p, r);
    const double s = integrate_densities(
        p.scheme,
        [&](const VectorXd& x) {
            const double pv = p.pdf(x), rv = r.pdf(x);
            if (pv <= 0.0 || rv <= 0.0) return 0.0;
            return std::pow(pv, 0.5 * (1.0 - alpha)) * std::pow(rv, 0.5 * (1.0 + alpha));
        },
        "alpha-divergence integral");
    return 4.0 / (1.0 - alpha * alpha) * (1.0 - s);
}

// ---------------------------------------------------------------------------
// logarithmic divergence

double log_divergence(const LambdaParam& lam, const Potential& f, const VectorXd& u,
                      const VectorXd& up) {
    if (lam.is_classical()) return bregman_divergence(f, u, up);
    const double l = lam.value();
    const double inner = f.gradient(up).dot(u - up);
    const double s = 1.0 + l * inner;
    if (s <= 0.0) return (l > 0.0) ? kInf : -kInf;
    return f.value(u) - f.value(up) - std::log1p(l * inner) / l;
}

double bregman_divergence(const Potential& f, const VectorXd& u, const VectorXd& up) {
    return f.value(u) - f.value(up) - f.gradient(up).dot(u - up);
}

// ---------------------------------------------------------------------------
// simplex potential

Potential negative_renyi_escort_potential(const LambdaParam& lam, int d) {
    Domain dom = Domain::open_simplex(d);
    if (lam.is_classical()) {
        // negative Shannon entropy of (p_0, p)
        ScalarFn value = [](const VectorXd& p) {
            const double p0 = 1.0 - p.sum();
            double s = p0 * std::log(p0);
            for (int i = 0; i < p.size(); ++i) s += p[i] * std::log(p[i]);
            return s;
        };
        GradientFn grad = [](const VectorXd& p) {
            const double lp0 = std::log(1.0 - p.sum());
            VectorXd g(p.size());
            for (int i = 0; i < p.size(); ++i) g[i] = std::log(p[i]) - lp0;
            return g;
        };
        return Potential(std::move(dom), std::move(value), std::move(grad));
    }
    const double q = lam.q();
    const double l = lam.value();
    // value (q/lambda) log sum_j p_j^{1/q}; equals minus the Renyi entropy of
    // the escort of exponent 1/q of (p_0, p)
    ScalarFn value = [q, l](const VectorXd& p) {
        const double p0 = 1.0 - p.sum();
        double s = std::pow(p0, 1.0 / q);
        for (int i = 0; i < p.size(); ++i) s += std::pow(p[i], 1.0 / q);
        return (q / l) * std::log(s);
    };
    GradientFn grad = [q, l](const VectorXd& p) {
        const double p0 = 1.0 - p.sum();
        double s = std::pow(p0, 1.0 / q);
        for (int i = 0; i < p.size(); ++i) s += std::pow(p[i], 1.0 / q);
        const double g0 = std::pow(p0, 1.0 / q - 1.0);
        VectorXd g(p.size());
        for (int i = 0; i < p.size(); ++i)
            g[i] = (std::pow(p[i], 1.0 / q - 1.0) - g0) / (l * s);
        return g;
    };
    return Potential(std::move(dom), std::move(value), std::move(grad));
}

}  // namespace lamdual
