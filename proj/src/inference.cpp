#include "lamdual/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lamdual/errors.hpp"
#include "lamdual/lambda_core.hpp"

namespace lamdual {
namespace {

constexpr double kEscortMeanTolerance = 1e-8;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Conjugate of the simplex potential, extended to the closed simplex so that
// vertex statistics have finite values. Outside the closure the value is +inf;
// the gradient stays the interior-chart one.
Potential simplex_dual_potential(const LambdaParam& lam, int d) {
    Potential interior = negative_renyi_escort_potential(lam, d);
    const double q = lam.q();
    auto value = [lam, q, d](const VectorXd& y) {
        const double slack = -1e-12;
        double head = 1.0 - y.sum();
        if (head < slack || y.minCoeff() < slack) return kInf;
        if (lam.is_classical()) {
            double s = head > 0.0 ? head * std::log(head) : 0.0;
            for (int i = 0; i < d; ++i)
                if (y[i] > 0.0) s += y[i] * std::log(y[i]);
            return s;
        }
        double s = std::pow(std::max(head, 0.0), 1.0 / q);
        for (int i = 0; i < d; ++i) s += std::pow(std::max(y[i], 0.0), 1.0 / q);
        return q / lam.value() * std::log(s);
    };
    auto gradient = [interior](const VectorXd& y) { return interior.gradient(y); };
    return Potential(Domain::all(d), value, gradient);
}

// The conjugate inherits the -kappa sum log v form of the potential; only the
// additive constant depends on the normalization convention, so it is pinned
// through phi(u) + psi(v) = -cost(u, v) at a reference dual pair.
Potential dirichlet_dual_potential(const LambdaExpFamily& fam) {
    const LambdaParam lam = fam.lam();
    const int d = fam.statistic_dim();
    const double sigma = fam.parameters().at("sigma");
    const double kappa = 1.0 / (sigma * (1.0 + d));
    VectorXd ref = VectorXd::Constant(d, -1.0 / sigma);
    VectorXd ref_eta = fam.dual_parameter(ref);
    double shift =
        -cost(lam, ref, ref_eta) - fam.potential(ref) + kappa * ref_eta.array().log().sum();
    auto value = [kappa, shift](const VectorXd& v) {
        return shift - kappa * v.array().log().sum();
    };
    auto gradient = [kappa](const VectorXd& v) { return VectorXd(-kappa / v.array()); };
    return Potential(Domain::positive_orthant(d), value, gradient);
}

// Scale family with statistic -x^2: the conjugate of -log(vartheta)/2 is
// -log(-v)/2 up to a constant, again pinned at a reference pair.
Potential q_gaussian_dual_potential(const LambdaExpFamily& fam) {
    const LambdaParam lam = fam.lam();
    VectorXd ref = VectorXd::Constant(1, 1.0);
    VectorXd ref_eta = fam.dual_parameter(ref);
    double shift = -cost(lam, ref, ref_eta) - fam.potential(ref) + 0.5 * std::log(-ref_eta[0]);
    auto value = [shift](const VectorXd& v) { return shift - 0.5 * std::log(-v[0]); };
    auto gradient = [](const VectorXd& v) { return VectorXd::Constant(1, -0.5 / v[0]).eval(); };
    Domain dom = Domain::box(VectorXd::Constant(1, -kInf), VectorXd::Zero(1))
                     .with_anchor(VectorXd::Constant(1, -1.0));
    return Potential(dom, value, gradient);
}

Potential gaussian_location_dual_potential(int d) {
    auto value = [](const VectorXd& v) { return 0.5 * v.squaredNorm(); };
    auto gradient = [](const VectorXd& v) { return v; };
    return Potential(Domain::all(d), value, gradient);
}

double mean_log_divergence(const LambdaParam& lam, const Potential& psi,
                           const std::vector<VectorXd>& ys, const VectorXd& eta) {
    KahanSum acc;
    for (const VectorXd& y : ys) acc.add(log_divergence(lam, psi, y, eta));
    return acc.value() / static_cast<double>(ys.size());
}

double expected_log_divergence_impl(const LambdaExpFamily& fam, const Potential& psi,
                                    const VectorXd& vartheta, const VectorXd& eta_prime) {
    psi.domain().require(eta_prime);
    DensityFunction member = fam.density_function(vartheta);
    const LambdaParam lam = fam.lam();
    auto integrand = [&](const VectorXd& x) {
        double p = member.pdf(x);
        if (p <= 0.0) return 0.0;
        return p * log_divergence(lam, psi, fam.statistic(x), eta_prime);
    };
    return fam.scheme_for(vartheta).integrate(integrand);
}

struct FiniteStateView {
    VectorXd probs;        // member probabilities by state
    MatrixXd statistics;   // statistic_dim x states
    VectorXd escort_mean;  // of the member
};

FiniteStateView finite_state_view(const LambdaExpFamily& fam, const VectorXd& vartheta,
                                  const char* op) {
    if (fam.scheme().kind() != IntegrationScheme::Kind::FiniteSum)
        throw NotImplemented(std::string(op) + " needs a finite-state family; kind '" +
                             fam.kind() + "' integrates by quadrature");
    const auto& nodes = fam.scheme().nodes();
    const int n = static_cast<int>(nodes.size());
    FiniteStateView view;
    view.probs.resize(n);
    view.statistics.resize(fam.statistic_dim(), n);
    for (int i = 0; i < n; ++i) {
        view.probs[i] = fam.density(vartheta, nodes[i]);
        view.statistics.col(i) = fam.statistic(nodes[i]);
    }
    view.escort_mean = fam.escort_mean(vartheta);
    return view;
}

}  // namespace

Potential family_dual_potential(const LambdaExpFamily& fam) {
    if (fam.has_parameter_dependent_support())
        throw SupportConditionViolated("family_dual_potential: the support of kind '" +
                                       fam.kind() +
                                       "' depends on the parameter, so the likelihood has no "
                                       "divergence representation");
    const std::string& kind = fam.kind();
    if (kind == "simplex") return simplex_dual_potential(fam.lam(), fam.statistic_dim());
    if (kind == "dirichlet_perturbation") return dirichlet_dual_potential(fam);
    if (kind == "q_gaussian") return q_gaussian_dual_potential(fam);
    if (kind == "gaussian_location") return gaussian_location_dual_potential(fam.statistic_dim());
    throw NotImplemented("family_dual_potential: no dual potential for kind '" + kind + "'");
}

double likelihood_divergence_repr_check(const LambdaExpFamily& fam, const VectorXd& vartheta,
                                        const std::vector<VectorXd>& x_grid) {
    Potential psi = family_dual_potential(fam);
    const LambdaParam lam = fam.lam();
    fam.natural_domain().require(vartheta);
    VectorXd eta = fam.dual_parameter(vartheta);
    double psi_eta = psi.value(eta);
    VectorXd grad_eta = psi.gradient(eta);
    double phi = fam.potential(vartheta);
    double worst = 0.0;
    for (const VectorXd& x : x_grid) {
        if (!fam.in_support(vartheta, x))
            throw DomainViolation(
                "likelihood_divergence_repr_check: grid point outside the member support");
        VectorXd y = fam.statistic(x);
        if (!psi.domain().contains(y))
            throw DomainViolation(
                "likelihood_divergence_repr_check: statistic outside the dual domain");
        // psi(y) - L[y : eta], with the psi(y) terms cancelled algebraically
        double lhs = psi_eta - cost(lam, grad_eta, y - eta);
        double rhs = -cost(lam, vartheta, y) - phi;
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    return worst;
}

MleResult mle_barycenter(const LambdaExpFamily& fam, const MatrixXd& data,
                         const OptimizerConfig& cfg) {
    if (data.rows() < 1) throw DomainViolation("mle_barycenter: empty dataset");
    if (data.cols() != fam.sample_dim())
        throw DomainViolation("mle_barycenter: dataset has " + std::to_string(data.cols()) +
                              " columns, sample dimension is " +
                              std::to_string(fam.sample_dim()));
    Potential psi = family_dual_potential(fam);
    const LambdaParam lam = fam.lam();
    const int n = static_cast<int>(data.rows());
    const int d = fam.statistic_dim();
    std::vector<VectorXd> ys;
    ys.reserve(n);
    VectorXd mean = VectorXd::Zero(d);
    for (int i = 0; i < n; ++i) {
        ys.push_back(fam.statistic(data.row(i).transpose()));
        mean += ys.back();
    }
    mean /= static_cast<double>(n);
    VectorXd median(d);
    {
        std::vector<double> column(n);
        for (int j = 0; j < d; ++j) {
            for (int i = 0; i < n; ++i) column[i] = ys[i][j];
            auto mid = column.begin() + n / 2;
            std::nth_element(column.begin(), mid, column.end());
            median[j] = *mid;
        }
    }

    // mean of -L[y_i : eta] up to the eta-free psi(y_i) terms; out-of-chart
    // trial points (infinite psi or crossed affine bound) score -inf.
    auto objective = [&](const VectorXd& eta) {
        try {
            double value = psi.value(eta);
            if (!std::isfinite(value)) return -kInf;
            VectorXd g = psi.gradient(eta);
            KahanSum acc;
            for (const VectorXd& y : ys) {
                double c = cost(lam, g, y - eta);
                if (!std::isfinite(c)) return -kInf;
                acc.add(c);
            }
            return value - acc.value() / static_cast<double>(n);
        } catch (const DomainViolation&) {
            return -kInf;
        }
    };
    // Heavy-tailed statistics can put the mean far from the optimum; start
    // from whichever of mean and coordinatewise median scores better.
    VectorXd start = mean;
    double at_start = objective(mean);
    double at_median = objective(median);
    if (!std::isfinite(at_start) || at_median > at_start) start = median;
    MaximizeResult res = maximize(objective, psi.domain(), start, cfg);

    MleResult out;
    out.eta_hat = res.argmax;
    out.converged = res.converged;
    out.iterations = res.iterations;
    out.mean_divergence = mean_log_divergence(lam, psi, ys, res.argmax);
    out.vartheta_hat = inverse_lambda_gradient(lam, fam.potential_fn(), res.argmax);
    return out;
}

double expected_log_divergence(const LambdaExpFamily& fam, const VectorXd& vartheta,
                               const VectorXd& eta_prime) {
    Potential psi = family_dual_potential(fam);
    return expected_log_divergence_impl(fam, psi, vartheta, eta_prime);
}

DualBarycenterReport dual_barycenter_check(const LambdaExpFamily& fam, const VectorXd& vartheta,
                                           const std::vector<VectorXd>& eta_grid) {
    if (eta_grid.empty()) throw DomainViolation("dual_barycenter_check: empty grid");
    Potential psi = family_dual_potential(fam);
    DualBarycenterReport report;
    report.argmin_objective = kInf;
    for (const VectorXd& eta : eta_grid) {
        double value = expected_log_divergence_impl(fam, psi, vartheta, eta);
        if (value < report.argmin_objective) {
            report.argmin_objective = value;
            report.grid_argmin = eta;
        }
    }
    report.dual_parameter = fam.dual_parameter(vartheta);
    report.objective_at_dual = expected_log_divergence_impl(fam, psi, vartheta,
                                                            report.dual_parameter);
    return report;
}

MaxentReport maxent_check(const LambdaExpFamily& fam, const VectorXd& vartheta_star,
                          const std::vector<DiscreteDensity>& competitors) {
    FiniteStateView view = finite_state_view(fam, vartheta_star, "maxent_check");
    const double q = fam.lam().q();
    const int n = static_cast<int>(view.probs.size());
    DiscreteDensity member(view.probs);

    MaxentReport report;
    report.entropy_star = renyi_entropy(q, member);
    report.min_gap = competitors.empty() ? 0.0 : kInf;
    for (const DiscreteDensity& p : competitors) {
        if (p.size() != n)
            throw DomainViolation("maxent_check: competitor has " + std::to_string(p.size()) +
                                  " states, the family has " + std::to_string(n));
        VectorXd mean = view.statistics * escort(q, p).probs();
        double deviation = (mean - view.escort_mean).cwiseAbs().maxCoeff();
        if (deviation > kEscortMeanTolerance)
            throw ConstraintViolated("maxent_check: competitor escort mean deviates by " +
                                     std::to_string(deviation));
        double gap = report.entropy_star - renyi_entropy(q, p);
        report.entropy_gaps.push_back(gap);
        report.identity_residuals.push_back(std::abs(gap - renyi_divergence(q, p, member)));
        report.min_gap = std::min(report.min_gap, gap);
        report.max_identity_residual =
            std::max(report.max_identity_residual, report.identity_residuals.back());
    }
    return report;
}

std::vector<DiscreteDensity> maxent_competitors(const LambdaExpFamily& fam,
                                                const VectorXd& vartheta_star, int count,
                                                std::uint64_t seed) {
    if (count < 1) throw DomainViolation("maxent_competitors: count must be positive");
    const double q = fam.lam().q();
    if (q <= 0.0)
        throw DomainViolation("maxent_competitors: escort exponent 1 - lambda must be positive");
    FiniteStateView view = finite_state_view(fam, vartheta_star, "maxent_competitors");
    const int n = static_cast<int>(view.probs.size());

    // The escort-mean constraint is linear in r = p^q: candidates live in the
    // null space of the centered statistic matrix, which always contains the
    // member's own r. Directions orthogonal to it give genuine competitors.
    VectorXd rstar = view.probs.array().pow(q);
    MatrixXd centered = view.statistics.colwise() - view.escort_mean;
    Eigen::JacobiSVD<MatrixXd> svd(centered, Eigen::ComputeFullV);
    const VectorXd& sv = svd.singularValues();
    double tol = 1e-12 * std::max(1.0, sv.size() > 0 ? sv[0] : 0.0);
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv[i] > tol) ++rank;
    MatrixXd null_basis = svd.matrixV().rightCols(n - rank);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> step(0.15, 0.85);
    std::vector<DiscreteDensity> out;
    out.reserve(count);
    for (int k = 0; k < count; ++k) {
        VectorXd coeffs(null_basis.cols());
        for (int i = 0; i < coeffs.size(); ++i) coeffs[i] = gauss(rng);
        VectorXd z = null_basis * coeffs;
        z -= z.dot(rstar) / rstar.squaredNorm() * rstar;
        if (z.norm() <= 1e-12 * rstar.norm()) {
            // constraint pins the distribution; the member is the only candidate
            out.push_back(DiscreteDensity::normalized(view.probs));
            continue;
        }
        bool negative_side = (rng() & 1u) != 0u;
        if (negative_side) z = -z;
        double limit = kInf;
        for (int i = 0; i < n; ++i)
            if (z[i] < 0.0) limit = std::min(limit, rstar[i] / -z[i]);
        VectorXd r = rstar + step(rng) * limit * z;
        out.push_back(DiscreteDensity::normalized(r.array().pow(1.0 / q)));
    }
    return out;
}

}  // namespace lamdual
