#include "lamdual/mixtures.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>

#include <Eigen/SVD>

#include "lamdual/errors.hpp"

namespace lamdual {

namespace {

void validate_simplex_weights(const VectorXd& w, int n, const char* what) {
    if (static_cast<int>(w.size()) != n)
        throw DomainViolation(std::string(what) + ": expected " + std::to_string(n) + " entries");
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        if (!(w[i] >= 0.0))
            throw PositivityViolation(std::string(what) + ": entries must be nonnegative");
        sum += w[i];
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw NormalizationViolation(std::string(what) + ": entries must sum to one, got " +
                                     std::to_string(sum));
}

VectorXd full_eta(const VectorXd& eta_bar) {
    VectorXd eta(eta_bar.size() + 1);
    eta[0] = 1.0 - eta_bar.sum();
    eta.tail(eta_bar.size()) = eta_bar;
    return eta;
}

double integrate_or_diverged(const IntegrationScheme& scheme, const ScalarFn& g,
                             const char* what) {
    double z;
    try {
        z = scheme.integrate(g);
    } catch (const NonFiniteIntegrand&) {
        throw IntegralDiverged(std::string(what) + ": integrand not finite");
    }
    if (!std::isfinite(z) || z <= 0.0)
        throw IntegralDiverged(std::string(what) + ": normalizer " + std::to_string(z));
    return z;
}

// integral(p_i^q) for every component with positive weight; 1 elsewhere.
VectorXd escort_normalizers(double q, const std::vector<DensityFunction>& comps,
                            const VectorXd& active) {
    VectorXd z = VectorXd::Ones(comps.size());
    for (int i = 0; i < static_cast<int>(comps.size()); ++i) {
        if (active[i] == 0.0) continue;
        const ScalarFn pdf = comps[i].pdf;
        z[i] = integrate_or_diverged(
            comps[i].scheme,
            [pdf, q](const VectorXd& x) {
                const double v = pdf(x);
                return v > 0.0 ? std::pow(v, q) : 0.0;
            },
            "escort normalizer");
    }
    return z;
}

// x -> sum_i eta_i p_i(x)^q / z_i, the escort of the lambda-mixture.
ScalarFn escort_average(std::vector<DensityFunction> comps, VectorXd eta, VectorXd z, double q) {
    return [comps = std::move(comps), eta = std::move(eta), z = std::move(z),
            q](const VectorXd& x) {
        double m = 0.0;
        for (int i = 0; i < static_cast<int>(comps.size()); ++i) {
            if (eta[i] == 0.0) continue;
            const double v = comps[i].pdf(x);
            if (v > 0.0) m += eta[i] * std::pow(v, q) / z[i];
        }
        return m;
    };
}

PredicateFn union_support(std::vector<DensityFunction> comps, VectorXd w) {
    return [comps = std::move(comps), w = std::move(w)](const VectorXd& x) {
        for (int i = 0; i < static_cast<int>(comps.size()); ++i)
            if (w[i] > 0.0 && comps[i].in_support(x)) return true;
        return false;
    };
}

PredicateFn intersection_support(std::vector<DensityFunction> comps, VectorXd w) {
    return [comps = std::move(comps), w = std::move(w)](const VectorXd& x) {
        for (int i = 0; i < static_cast<int>(comps.size()); ++i)
            if (w[i] > 0.0 && !comps[i].in_support(x)) return false;
        return true;
    };
}

}  // namespace

MixtureSpec::MixtureSpec(std::vector<DensityFunction> components, VectorXd weights)
    : components_(std::move(components)), weights_(std::move(weights)) {
    const int n = static_cast<int>(components_.size());
    if (n < 2) throw DomainViolation("MixtureSpec: need at least two components");
    validate_simplex_weights(weights_, n, "MixtureSpec weights");
    const IntegrationScheme& sch = components_.front().scheme;
    for (const DensityFunction& c : components_) {
        if (!c.pdf) throw DomainViolation("MixtureSpec: component without a density");
        if (c.scheme.kind() != sch.kind() || c.scheme.node_count() != sch.node_count())
            throw DomainViolation("MixtureSpec: components must share one scheme");
    }
    if (sch.kind() == IntegrationScheme::Kind::FiniteSum) {
        // affine independence of the components as node-value vectors
        const auto& nodes = sch.nodes();
        MatrixXd diff(n - 1, nodes.size());
        for (int i = 1; i < n; ++i)
            for (int j = 0; j < static_cast<int>(nodes.size()); ++j)
                diff(i - 1, j) = components_[i].pdf(nodes[j]) - components_[0].pdf(nodes[j]);
        Eigen::JacobiSVD<MatrixXd> svd(diff);
        const VectorXd sv = svd.singularValues();
        const double cutoff = 1e-9 * (1.0 + (sv.size() ? sv[0] : 0.0));
        int rank = 0;
        for (int k = 0; k < sv.size(); ++k)
            if (sv[k] > cutoff) ++rank;
        if (rank < n - 1)
            throw DomainViolation("MixtureSpec: components are affinely dependent");
    }
}

MixtureSpec MixtureSpec::discrete(const std::vector<DiscreteDensity>& components,
                                  VectorXd weights) {
    std::vector<DensityFunction> fns;
    fns.reserve(components.size());
    for (const DiscreteDensity& p : components) fns.push_back(as_density_function(p));
    return MixtureSpec(std::move(fns), std::move(weights));
}

MixtureSpec MixtureSpec::with_weights(VectorXd weights) const {
    return MixtureSpec(components_, std::move(weights));
}

DensityFunction alpha_mixture(double alpha, const MixtureSpec& spec) {
    const std::vector<DensityFunction>& comps = spec.components();
    const VectorXd w = spec.weights();
    const IntegrationScheme sch = spec.scheme();
    ScalarFn unnorm;
    PredicateFn sup;
    if (std::abs(alpha - 1.0) < kClassicalLambdaThreshold) {
        unnorm = [comps, w](const VectorXd& x) {
            double s = 0.0;
            for (int i = 0; i < static_cast<int>(comps.size()); ++i) {
                if (w[i] == 0.0) continue;
                const double v = comps[i].pdf(x);
                if (v <= 0.0) return 0.0;
                s += w[i] * std::log(v);
            }
            return std::exp(s);
        };
        sup = intersection_support(comps, w);
    } else {
        const double e = 0.5 * (1.0 - alpha);
        unnorm = [comps, w, e](const VectorXd& x) {
            double m = 0.0;
            for (int i = 0; i < static_cast<int>(comps.size()); ++i) {
                if (w[i] == 0.0) continue;
                const double v = comps[i].pdf(x);
                if (v <= 0.0) {
                    if (e > 0.0) continue;  // this component just drops out
                    return 0.0;             // negative exponent: support is the intersection
                }
                m += w[i] * std::pow(v, e);
            }
            return m > 0.0 ? std::pow(m, 1.0 / e) : 0.0;
        };
        sup = e > 0.0 ? union_support(comps, w) : intersection_support(comps, w);
    }
    const double z = integrate_or_diverged(sch, unnorm, "alpha_mixture");
    return DensityFunction{
        [unnorm, z](const VectorXd& x) { return unnorm(x) / z; }, sch, std::move(sup)};
}

DensityFunction lambda_mixture(const LambdaParam& lam, const MixtureSpec& spec) {
    if (lam.is_classical()) return alpha_mixture(-1.0, spec);
    const double q = lam.q();
    const std::vector<DensityFunction>& comps = spec.components();
    const VectorXd eta = spec.weights();
    const VectorXd z = escort_normalizers(q, comps, eta);
    const ScalarFn m = escort_average(comps, eta, z, q);
    const ScalarFn unnorm = [m, q](const VectorXd& x) {
        const double v = m(x);
        return v > 0.0 ? std::pow(v, 1.0 / q) : 0.0;
    };
    const IntegrationScheme sch = spec.scheme();
    const double norm = integrate_or_diverged(sch, unnorm, "lambda_mixture");
    return DensityFunction{[unnorm, norm](const VectorXd& x) { return unnorm(x) / norm; }, sch,
                           union_support(comps, eta)};
}

double mixture_dual_potential(const LambdaParam& lam, const MixtureSpec& spec,
                              const VectorXd& eta) {
    validate_simplex_weights(eta, spec.size(), "mixture eta");
    if (lam.is_classical())
        return -shannon_entropy(alpha_mixture(-1.0, spec.with_weights(eta)));
    const double q = lam.q();
    const std::vector<DensityFunction>& comps = spec.components();
    const VectorXd z = escort_normalizers(q, comps, eta);
    const ScalarFn m = escort_average(comps, eta, z, q);
    const double norm = integrate_or_diverged(
        spec.scheme(),
        [m, q](const VectorXd& x) {
            const double v = m(x);
            return v > 0.0 ? std::pow(v, 1.0 / q) : 0.0;
        },
        "mixture_dual_potential");
    return q / lam.value() * std::log(norm);
}

Potential mixture_dual_potential_fn(const LambdaParam& lam, const MixtureSpec& spec) {
    const int d = spec.size() - 1;
    const std::vector<DensityFunction> comps = spec.components();
    const IntegrationScheme sch = spec.scheme();
    Domain dom = Domain::open_simplex(d);
    if (lam.is_classical()) {
        ScalarFn value = [comps, sch](const VectorXd& eta_bar) {
            const ScalarFn m = escort_average(comps, full_eta(eta_bar),
                                              VectorXd::Ones(comps.size()), 1.0);
            return sch.integrate([m](const VectorXd& x) {
                const double v = m(x);
                return v > 0.0 ? v * std::log(v) : 0.0;
            });
        };
        GradientFn grad = [comps, sch, d](const VectorXd& eta_bar) {
            const ScalarFn m = escort_average(comps, full_eta(eta_bar),
                                              VectorXd::Ones(comps.size()), 1.0);
            VectorXd g(d);
            for (int i = 1; i <= d; ++i) {
                const ScalarFn pi = comps[i].pdf;
                const ScalarFn p0 = comps[0].pdf;
                g[i - 1] = sch.integrate([m, pi, p0](const VectorXd& x) {
                    const double v = m(x);
                    if (v <= 0.0) return 0.0;
                    return std::log(v) * (pi(x) - p0(x));
                });
            }
            return g;
        };
        return Potential(std::move(dom), std::move(value), std::move(grad));
    }
    const double q = lam.q();
    const double l = lam.value();
    const VectorXd z = escort_normalizers(q, comps, VectorXd::Ones(comps.size()));
    ScalarFn value = [comps, sch, z, q, l](const VectorXd& eta_bar) {
        const ScalarFn m = escort_average(comps, full_eta(eta_bar), z, q);
        const double norm = integrate_or_diverged(
            sch,
            [m, q](const VectorXd& x) {
                const double v = m(x);
                return v > 0.0 ? std::pow(v, 1.0 / q) : 0.0;
            },
            "mixture_dual_potential_fn");
        return q / l * std::log(norm);
    };
    GradientFn grad = [comps, sch, z, q, l, d](const VectorXd& eta_bar) {
        const ScalarFn m = escort_average(comps, full_eta(eta_bar), z, q);
        const double norm = integrate_or_diverged(
            sch,
            [m, q](const VectorXd& x) {
                const double v = m(x);
                return v > 0.0 ? std::pow(v, 1.0 / q) : 0.0;
            },
            "mixture_dual_potential_fn gradient");
        VectorXd g(d);
        for (int i = 1; i <= d; ++i) {
            const ScalarFn pi = comps[i].pdf;
            const ScalarFn p0 = comps[0].pdf;
            const double zi = z[i];
            const double z0 = z[0];
            const double integral = sch.integrate([m, pi, p0, zi, z0, q](const VectorXd& x) {
                const double v = m(x);
                if (v <= 0.0) return 0.0;
                const double vi = pi(x);
                const double v0 = p0(x);
                const double ti = vi > 0.0 ? std::pow(vi, q) / zi : 0.0;
                const double t0 = v0 > 0.0 ? std::pow(v0, q) / z0 : 0.0;
                return std::pow(v, 1.0 / q - 1.0) * (ti - t0);
            });
            g[i - 1] = integral / (l * norm);
        }
        return g;
    };
    return Potential(std::move(dom), std::move(value), std::move(grad));
}

VectorXd mixture_primal_variable(const LambdaParam& lam, const MixtureSpec& spec,
                                 const VectorXd& eta_bar) {
    const int d = spec.size() - 1;
    Domain::open_simplex(d).require(eta_bar);
    const VectorXd eta = full_eta(eta_bar);
    const std::vector<DensityFunction>& comps = spec.components();
    const IntegrationScheme sch = spec.scheme();
    VectorXd out(d);
    if (lam.is_classical()) {
        const ScalarFn m = escort_average(comps, eta, VectorXd::Ones(comps.size()), 1.0);
        for (int i = 1; i <= d; ++i) {
            const ScalarFn pi = comps[i].pdf;
            const ScalarFn p0 = comps[0].pdf;
            out[i - 1] = sch.integrate([m, pi, p0](const VectorXd& x) {
                const double v = m(x);
                if (v <= 0.0) return 0.0;
                return std::log(v) * (pi(x) - p0(x));
            });
        }
        return out;
    }
    const double q = lam.q();
    const double l = lam.value();
    const VectorXd z = escort_normalizers(q, comps, eta);
    const ScalarFn m = escort_average(comps, eta, z, q);
    const double norm = integrate_or_diverged(
        sch,
        [m, q](const VectorXd& x) {
            const double v = m(x);
            return v > 0.0 ? std::pow(v, 1.0 / q) : 0.0;
        },
        "mixture_primal_variable");
    // I_i = integral(p_eta^lambda * ptilde_i), vartheta_i = (I_i / I_0 - 1) / lambda
    VectorXd moments(d + 1);
    for (int i = 0; i <= d; ++i) {
        const ScalarFn pi = comps[i].pdf;
        const double zi = z[i];
        moments[i] = sch.integrate([m, pi, zi, q, l, norm](const VectorXd& x) {
            const double v = m(x);
            if (v <= 0.0) return 0.0;
            const double vi = pi(x);
            if (vi <= 0.0) return 0.0;
            const double p_eta = std::pow(v, 1.0 / q) / norm;
            return std::pow(p_eta, l) * std::pow(vi, q) / zi;
        });
    }
    if (!std::isfinite(moments[0]) || moments[0] <= 0.0)
        throw IntegralDiverged("mixture_primal_variable: reference moment " +
                               std::to_string(moments[0]));
    for (int i = 1; i <= d; ++i) out[i - 1] = (moments[i] / moments[0] - 1.0) / l;
    return out;
}

VectorXd embed_alpha_mixture(const LambdaExpFamily& family,
                             const std::vector<VectorXd>& member_params, const VectorXd& w) {
    if (family.has_parameter_dependent_support())
        throw SupportConditionViolated(
            "embed_alpha_mixture: member supports depend on the parameter");
    const int n = static_cast<int>(member_params.size());
    if (n == 0) throw DomainViolation("embed_alpha_mixture: no members");
    validate_simplex_weights(w, n, "embed_alpha_mixture weights");
    const bool classical = family.lam().is_classical();
    const double l = classical ? 0.0 : family.lam().value();
    VectorXd coeff(n);
    for (int i = 0; i < n; ++i) {
        family.natural_domain().require(member_params[i]);
        coeff[i] = classical ? w[i] : w[i] * std::exp(-l * family.potential(member_params[i]));
    }
    const double denom = coeff.sum();
    if (!std::isfinite(denom) || denom <= 0.0)
        throw DomainViolation("embed_alpha_mixture: degenerate reweighting");
    VectorXd out = VectorXd::Zero(family.statistic_dim());
    for (int i = 0; i < n; ++i) out += coeff[i] / denom * member_params[i];
    return out;
}

InterpolationPath interpolation_path(const LambdaExpFamily& family,
                                     const std::vector<VectorXd>& member_params,
                                     const VectorXd& w0, const VectorXd& w1, int steps) {
    if (steps < 2) throw DomainViolation("interpolation_path: need at least two steps");
    InterpolationPath path;
    path.t = VectorXd::LinSpaced(steps, 0.0, 1.0);
    path.s = VectorXd::Zero(steps);
    path.vartheta.reserve(steps);
    for (int k = 0; k < steps; ++k) {
        const double t = path.t[k];
        path.vartheta.push_back(
            embed_alpha_mixture(family, member_params, (1.0 - t) * w0 + t * w1));
    }
    const VectorXd delta = path.vartheta.back() - path.vartheta.front();
    const double len2 = delta.squaredNorm();
    for (int k = 0; k < steps; ++k) {
        const VectorXd offset = path.vartheta[k] - path.vartheta.front();
        if (len2 < 1e-28) {
            path.s[k] = path.t[k];
            path.max_chord_residual = std::max(path.max_chord_residual, offset.norm());
        } else {
            path.s[k] = offset.dot(delta) / len2;
            path.max_chord_residual =
                std::max(path.max_chord_residual, (offset - path.s[k] * delta).norm());
        }
    }
    return path;
}

BarycenterCheck alpha_barycenter_check(double alpha, const MixtureSpec& spec,
                                       int cells_per_axis) {
    const IntegrationScheme sch = spec.scheme();
    if (sch.kind() != IntegrationScheme::Kind::FiniteSum)
        throw NotImplemented("alpha_barycenter_check: discrete state space required");
    const int states = sch.node_count();
    if (states < 2 || states > 4)
        throw DomainViolation("alpha_barycenter_check: between 2 and 4 states");
    if (cells_per_axis < states)
        throw DomainViolation("alpha_barycenter_check: grid too coarse");

    const VectorXd w = spec.weights();
    std::vector<DiscreteDensity> members;
    members.reserve(spec.size());
    for (const DensityFunction& c : spec.components()) {
        VectorXd p(states);
        for (int j = 0; j < states; ++j) p[j] = c.pdf(sch.nodes()[j]) * sch.weights()[j];
        members.emplace_back(DiscreteDensity::normalized(p));
    }

    double best = std::numeric_limits<double>::infinity();
    VectorXd best_p;
    VectorXd counts(states);
    // scan interior grid points: counts >= 1 summing to cells_per_axis
    const std::function<void(int, int)> scan = [&](int pos, int left) {
        if (pos == states - 1) {
            counts[pos] = left;
            DiscreteDensity p(counts / static_cast<double>(cells_per_axis));
            double objective = 0.0;
            for (int i = 0; i < spec.size(); ++i) {
                if (w[i] == 0.0) continue;
                objective += w[i] * alpha_divergence(alpha, members[i], p);
            }
            if (objective < best) {
                best = objective;
                best_p = p.probs();
            }
            return;
        }
        for (int k = 1; k <= left - (states - 1 - pos); ++k) {
            counts[pos] = k;
            scan(pos + 1, left - k);
        }
    };
    scan(0, cells_per_axis);

    const DensityFunction mix = alpha_mixture(alpha, spec);
    VectorXd mix_p(states);
    for (int j = 0; j < states; ++j) mix_p[j] = mix.pdf(sch.nodes()[j]) * sch.weights()[j];

    BarycenterCheck check;
    check.grid_argmin = best_p;
    check.mixture = mix_p;
    check.discrepancy = (best_p - mix_p).lpNorm<Eigen::Infinity>();
    return check;
}

VectorXd MixtureReparameterization::eta_from_weights(const VectorXd& w) const {
    validate_simplex_weights(w, static_cast<int>(z_.size()), "weights");
    VectorXd eta = w.cwiseProduct(z_);
    return eta / eta.sum();
}

VectorXd MixtureReparameterization::weights_from_eta(const VectorXd& eta) const {
    validate_simplex_weights(eta, static_cast<int>(z_.size()), "eta");
    VectorXd w = eta.cwiseQuotient(z_);
    return w / w.sum();
}

MixtureReparameterization mixture_reparameterization(const LambdaParam& lam,
                                                     const MixtureSpec& spec) {
    if (lam.is_classical()) return MixtureReparameterization(VectorXd::Ones(spec.size()));
    return MixtureReparameterization(
        escort_normalizers(lam.q(), spec.components(), VectorXd::Ones(spec.size())));
}

}  // namespace lamdual
