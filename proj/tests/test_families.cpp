#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "lamdual/divergences.hpp"
#include "lamdual/families.hpp"
#include "lamdual/lambda_core.hpp"
#include "support.hpp"

using namespace lamdual;

namespace {

VectorXd vec1(double a) { return VectorXd::Constant(1, a); }

VectorXd vec2(double a, double b) {
    VectorXd v(2);
    v << a, b;
    return v;
}

VectorXd vec3(double a, double b, double c) {
    VectorXd v(3);
    v << a, b, c;
    return v;
}

DiscreteDensity member_probs(const LambdaExpFamily& fam, const VectorXd& th) {
    const int states = fam.scheme().node_count();
    VectorXd p(states);
    for (int i = 0; i < states; ++i) p[i] = fam.density(th, vec1(i));
    return DiscreteDensity(p);
}

double t_pdf_1d(double dof, double mu, double sigma, double x) {
    const double u = (x - mu) / sigma;
    const double c = std::exp(std::lgamma(0.5 * (dof + 1.0)) - std::lgamma(0.5 * dof)) /
                     (std::sqrt(dof * M_PI) * sigma);
    return c * std::pow(1.0 + u * u / dof, -0.5 * (dof + 1.0));
}

}  // namespace

TEST_CASE("simplex family: coordinates, potential, densities") {
    for (double l : {0.0, -1.0, -2.0, 0.5}) {
        const LambdaParam lam(l);
        auto fam = simplex_family(lam, 2);
        const VectorXd th0 = VectorXd::Zero(2);
        CHECK(fam.potential(th0) == doctest::Approx(std::log(3.0)).epsilon(1e-12));
        for (int i = 0; i < 3; ++i)
            CHECK(fam.density(th0, vec1(i)) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

        const VectorXd u = vec3(0.5, 0.3, 0.2);
        const VectorXd th = simplex_natural(lam, u);
        const VectorXd back = simplex_probabilities(lam, th);
        for (int i = 0; i < 3; ++i) CHECK(back[i] == doctest::Approx(u[i]).epsilon(1e-12));
        for (int i = 0; i < 3; ++i)
            CHECK(fam.density(th, vec1(i)) == doctest::Approx(u[i]).epsilon(1e-12));

        // closed form agrees with the finite-state quadrature route
        CHECK(fam.potential(th) == doctest::Approx(fam.potential_by_quadrature(th)).epsilon(1e-12));
        member_probs(fam, th);  // normalizes by construction
        fam.density_function(th).validate();
    }
    CHECK_THROWS_AS(simplex_natural(LambdaParam(-1.0), vec3(0.5, 0.5, 0.5)),
                    NormalizationViolation);
    CHECK_THROWS_AS(simplex_natural(LambdaParam(-1.0), vec3(1.0, 0.0, 0.0)), PositivityViolation);
}

TEST_CASE("simplex family: natural domain tracks positivity") {
    auto fam = simplex_family(LambdaParam(0.5), 2);
    CHECK(fam.natural_domain().contains(vec2(3.0, -1.9)));
    CHECK_FALSE(fam.natural_domain().contains(vec2(0.0, -2.1)));
    CHECK_THROWS_AS(fam.potential(vec2(0.0, -2.1)), IntegralDiverged);
    CHECK_THROWS_AS(fam.density(vec2(0.0, -2.1), vec1(0)), ParameterOutsideDomain);

    auto neg = simplex_family(LambdaParam(-1.0), 2);
    CHECK(neg.natural_domain().contains(vec2(0.9, -5.0)));
    CHECK_FALSE(neg.natural_domain().contains(vec2(1.1, 0.0)));
}

TEST_CASE("q-Gaussian family: closed-form potential matches quadrature") {
    for (double l : {0.0, -1.0, -0.5, 0.5, 0.9}) {
        auto fam = q_gaussian_family(LambdaParam(l));
        // scale relation: the constant cancels in differences
        CHECK(fam.potential(vec1(4.0)) - fam.potential(vec1(1.0)) ==
              doctest::Approx(-std::log(2.0)).epsilon(1e-12));
        for (double th : {0.5, 1.0, 2.5}) {
            CHECK(fam.potential(vec1(th)) ==
                  doctest::Approx(fam.potential_by_quadrature(vec1(th))).epsilon(1e-8));
            fam.density_function(vec1(th)).validate();
        }
    }
    // classical member at vartheta = 1 is the Gaussian with variance 1/2
    auto classical = q_gaussian_family(LambdaParam(0.0));
    CHECK(classical.density(vec1(1.0), vec1(0.0)) ==
          doctest::Approx(1.0 / std::sqrt(M_PI)).epsilon(1e-10));
    // heavy-tail member at lambda = -1 is the standard Cauchy
    auto qc = q_gaussian_family(LambdaParam(-1.0));
    CHECK(qc.density(vec1(1.0), vec1(0.0)) == doctest::Approx(1.0 / M_PI).epsilon(1e-10));
    CHECK(qc.density(vec1(1.0), vec1(2.0)) ==
          doctest::Approx(1.0 / (M_PI * 5.0)).epsilon(1e-10));
    // compact member vanishes outside its parabola of support
    auto qp = q_gaussian_family(LambdaParam(0.5));
    CHECK(qp.density(vec1(1.0), vec1(1.5)) == 0.0);
    CHECK(qp.density(vec1(1.0), vec1(1.3)) > 0.0);
    CHECK(qp.has_parameter_dependent_support());
    CHECK_FALSE(qc.has_parameter_dependent_support());
}

TEST_CASE("q-Gaussian family: rejects non-normalizable deformation") {
    CHECK_THROWS_AS(q_gaussian_family(LambdaParam(-2.0)), DomainViolation);
    CHECK_THROWS_AS(q_gaussian_family(LambdaParam(-2.5)), DomainViolation);
    CHECK_THROWS_AS(q_gaussian_family(LambdaParam(1.0)), DomainViolation);
}

TEST_CASE("Cauchy family: potential, density, coordinates") {
    auto fam = cauchy_family();
    const VectorXd std_th = vec2(0.0, -1.0);
    CHECK(fam.density(std_th, vec1(0.0)) == doctest::Approx(1.0 / M_PI).epsilon(1e-12));
    fam.density_function(std_th).validate();

    for (double mu : {-1.0, 0.0, 2.0})
        for (double sigma : {0.5, 1.0, 3.0}) {
            const VectorXd th = cauchy_natural(mu, sigma);
            CHECK(fam.natural_domain().contains(th));
            const auto [m, s] = cauchy_location_scale(th);
            CHECK(m == doctest::Approx(mu).epsilon(1e-12));
            CHECK(s == doctest::Approx(sigma).epsilon(1e-12));
            CHECK(fam.potential(th) ==
                  doctest::Approx(fam.potential_by_quadrature(th)).epsilon(1e-9));
            // location-scale form of the density
            for (double x : {-2.0, 0.3, 4.0})
                CHECK(fam.density(th, vec1(x)) ==
                      doctest::Approx(t_pdf_1d(1.0, mu, sigma, x)).epsilon(1e-10));
        }
    CHECK_THROWS_AS(cauchy_location_scale(vec2(2.0, -0.5)), ParameterOutsideDomain);
    CHECK_THROWS_AS(cauchy_natural(0.0, -1.0), DomainViolation);
}

TEST_CASE("Student-t family: coordinate transforms invert") {
    // one dimension
    for (double dof : {1.0, 3.0, 7.5}) {
        const VectorXd mu = vec1(0.5);
        MatrixXd sigma(1, 1);
        sigma << 1.44;
        const VectorXd th = student_t_natural(dof, mu, sigma);
        VectorXd mu_back;
        MatrixXd sigma_back;
        student_t_location_scale(dof, th, mu_back, sigma_back);
        CHECK(mu_back[0] == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(sigma_back(0, 0) == doctest::Approx(1.44).epsilon(1e-12));
    }
    // dof = 1 in one dimension is the Cauchy parameterization
    {
        const VectorXd th_t = student_t_natural(1.0, vec1(0.7), MatrixXd::Constant(1, 1, 1.69));
        const VectorXd th_c = cauchy_natural(0.7, 1.3);
        CHECK(th_t[0] == doctest::Approx(th_c[0]).epsilon(1e-12));
        CHECK(th_t[1] == doctest::Approx(th_c[1]).epsilon(1e-12));
        auto tfam = student_t_family(1.0, 1);
        auto cfam = cauchy_family();
        CHECK(tfam.lam().value() == doctest::Approx(-1.0));
        CHECK(tfam.potential(th_t) == doctest::Approx(cfam.potential(th_c)).epsilon(1e-12));
    }
    // two dimensions
    {
        const double dof = 4.0;
        const VectorXd mu = vec2(0.3, -0.2);
        MatrixXd sigma(2, 2);
        sigma << 1.2, 0.3, 0.3, 0.8;
        const VectorXd th = student_t_natural(dof, mu, sigma);
        CHECK(th.size() == 5);
        VectorXd mu_back;
        MatrixXd sigma_back;
        student_t_location_scale(dof, th, mu_back, sigma_back);
        CHECK((mu_back - mu).norm() < 1e-12);
        CHECK((sigma_back - sigma).norm() < 1e-12);
        auto fam = student_t_family(dof, 2);
        CHECK(fam.natural_domain().contains(th));
        CHECK(fam.statistic_dim() == 5);
    }
    CHECK_THROWS_AS(student_t_family(3.0, 3), NotImplemented);
    CHECK_THROWS_AS(student_t_family(-1.0, 1), DomainViolation);
}

TEST_CASE("Student-t family: density matches the location-scale form and normalizes") {
    auto fam = student_t_family(3.0, 1);
    const VectorXd th = student_t_natural(3.0, vec1(0.5), MatrixXd::Constant(1, 1, 1.44));
    for (double x : {-3.0, 0.0, 0.5, 2.7})
        CHECK(fam.density(th, vec1(x)) ==
              doctest::Approx(t_pdf_1d(3.0, 0.5, 1.2, x)).epsilon(1e-9));
    CHECK(fam.potential(th) == doctest::Approx(fam.potential_by_quadrature(th)).epsilon(1e-8));
    fam.density_function(th).validate();

    auto fam2 = student_t_family(4.0, 2);
    MatrixXd sigma(2, 2);
    sigma << 1.2, 0.3, 0.3, 0.8;
    const VectorXd th2 = student_t_natural(4.0, vec2(0.3, -0.2), sigma);
    fam2.density_function(th2).validate();
    CHECK(fam2.potential(th2) == doctest::Approx(fam2.potential_by_quadrature(th2)).epsilon(1e-7));
}

TEST_CASE("Dirichlet perturbation family: reference scheme reproduces the potential") {
    for (int d : {1, 2}) {
        const double sigma = 0.5;
        auto fam = dirichlet_perturbation_family(sigma, d);
        std::mt19937_64 rng(3);
        for (int trial = 0; trial < 4; ++trial) {
            const VectorXd center = testsup::random_simplex_point(rng, d + 1);
            const VectorXd th = dirichlet_natural(sigma, center);
            CHECK(fam.natural_domain().contains(th));
            CHECK(fam.potential(th) ==
                  doctest::Approx(fam.potential_by_quadrature(th)).epsilon(1e-6));
            fam.density_function(th).validate();
            // the center round-trips through the natural coordinates
            const VectorXd back = dirichlet_center(sigma, th);
            for (int i = 0; i <= d; ++i)
                CHECK(back[i] == doctest::Approx(center[i]).epsilon(1e-12));
        }
    }
    CHECK_THROWS_AS(dirichlet_perturbation_family(0.5, 4), NotImplemented);
    CHECK_THROWS_AS(dirichlet_perturbation_family(-0.5, 2), DomainViolation);
}

TEST_CASE("Dirichlet perturbation family: dual parameter is the center odds") {
    const double sigma = 0.7;
    auto fam = dirichlet_perturbation_family(sigma, 2);
    const VectorXd center = vec3(0.5, 0.2, 0.3);
    const VectorXd th = dirichlet_natural(sigma, center);
    const VectorXd eta = fam.dual_parameter(th);
    CHECK(eta[0] == doctest::Approx(0.2 / 0.5).epsilon(1e-9));
    CHECK(eta[1] == doctest::Approx(0.3 / 0.5).epsilon(1e-9));
    const VectorXd em = fam.escort_mean(th);
    CHECK(em[0] == doctest::Approx(eta[0]).epsilon(1e-6));
    CHECK(em[1] == doctest::Approx(eta[1]).epsilon(1e-6));
}

TEST_CASE("discrete family: agrees with the simplex family on indicator statistics") {
    MatrixXd s(3, 2);
    s << 0, 0, 1, 0, 0, 1;
    for (double l : {0.0, -1.5, 0.4}) {
        auto disc = discrete_family(LambdaParam(l), s);
        auto simp = simplex_family(LambdaParam(l), 2);
        const VectorXd th = vec2(0.3, -0.6);
        CHECK(disc.potential(th) == doctest::Approx(simp.potential(th)).epsilon(1e-12));
        for (int i = 0; i < 3; ++i)
            CHECK(disc.density(th, vec1(i)) ==
                  doctest::Approx(simp.density(th, vec1(i))).epsilon(1e-12));
        // analytic gradient against finite differences
        auto pot = disc.potential_fn();
        const VectorXd g = pot.gradient(th);
        const VectorXd g_fd = fd_gradient([&](const VectorXd& t) { return disc.potential(t); }, th);
        CHECK((g - g_fd).norm() < 1e-7);
    }
    // under-determined statistics: more states than coordinates
    MatrixXd wide(4, 2);
    wide << 1, 0.5, -1, 0.25, 0.5, -1, 0, 0;
    auto fam = discrete_family(LambdaParam(-0.8), wide);
    const VectorXd th = vec2(0.4, 0.1);
    fam.density_function(th).validate();
    const VectorXd eta = fam.dual_parameter(th);
    const VectorXd em = fam.escort_mean(th);
    CHECK((eta - em).norm() < 1e-9);
}

TEST_CASE("Gaussian location family: classical identities") {
    auto fam = gaussian_location_family();
    const VectorXd th = vec1(0.8);
    CHECK(fam.potential(th) == doctest::Approx(0.32).epsilon(1e-12));
    CHECK(fam.potential_by_quadrature(th) == doctest::Approx(0.32).epsilon(1e-10));
    fam.density_function(th).validate();
    // density is relative to the standard normal base measure
    for (double x : {-1.0, 0.0, 1.7}) {
        const double base = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
        const double target = std::exp(-0.5 * (x - 0.8) * (x - 0.8)) / std::sqrt(2.0 * M_PI);
        CHECK(fam.density(th, vec1(x)) * base == doctest::Approx(target).epsilon(1e-12));
    }
    CHECK(fam.dual_parameter(th)[0] == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(fam.escort_mean(th)[0] == doctest::Approx(0.8).epsilon(1e-8));
}

TEST_CASE("subtractive and divisive coordinates convert both ways") {
    auto fam = q_gaussian_family(LambdaParam(-1.0));
    const VectorXd th = vec1(1.0);
    // phi(1) = log(pi) for the Cauchy member, so theta = pi and phi_q = pi - 1
    const SubtractiveForm sub = fam.to_subtractive(th);
    CHECK(sub.theta[0] == doctest::Approx(M_PI).epsilon(1e-10));
    CHECK(sub.phi_q == doctest::Approx(M_PI - 1.0).epsilon(1e-10));
    CHECK(fam.subtractive_potential(sub.theta) == doctest::Approx(M_PI - 1.0).epsilon(1e-9));
    // round trips
    CHECK(fam.to_divisive(sub.theta, sub.phi_q)[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fam.to_divisive(sub.theta)[0] == doctest::Approx(1.0).epsilon(1e-9));
    // the subtractive pair reproduces the density pointwise
    const double qq = fam.lam().q();
    for (double x : {-1.5, 0.0, 0.4, 3.0})
        CHECK(fam.density(th, vec1(x)) ==
              doctest::Approx(q_exp(qq, sub.theta.dot(fam.statistic(vec1(x))) - sub.phi_q))
                  .epsilon(1e-10));
    // a member with vanishing potential has identical coordinate pairs
    const VectorXd fixed = vec1(M_PI * M_PI);
    const SubtractiveForm at_zero = fam.to_subtractive(fixed);
    CHECK(at_zero.theta[0] == doctest::Approx(fixed[0]).epsilon(1e-9));
    CHECK(at_zero.phi_q == doctest::Approx(0.0).epsilon(1e-9));

    // simplex round trip at a different deformation
    auto simp = simplex_family(LambdaParam(-2.0), 2);
    const VectorXd sth = simplex_natural(simp.lam(), vec3(0.5, 0.3, 0.2));
    const SubtractiveForm ssub = simp.to_subtractive(sth);
    const VectorXd sback = simp.to_divisive(ssub.theta);
    CHECK((sback - sth).norm() < 1e-9);

    // classical families: both coordinate systems coincide
    auto loc = gaussian_location_family();
    const SubtractiveForm csub = loc.to_subtractive(vec1(0.7));
    CHECK(csub.theta[0] == doctest::Approx(0.7));
    CHECK(csub.phi_q == doctest::Approx(0.245));
    CHECK(loc.to_divisive(csub.theta)[0] == doctest::Approx(0.7));
}

TEST_CASE("support-dependent families refuse subtractive conversion") {
    auto fam = q_gaussian_family(LambdaParam(0.5));
    CHECK_THROWS_AS(fam.to_subtractive(vec1(1.0)), SupportConditionViolated);
    CHECK_THROWS_AS(fam.subtractive_potential(vec1(1.0)), SupportConditionViolated);
    CHECK_THROWS_AS(fam.to_divisive(vec1(1.0)), SupportConditionViolated);

    auto qc = q_gaussian_family(LambdaParam(-1.0));
    CHECK_THROWS_AS(qc.to_divisive(vec1(2.0), -2.0), ReparameterizationOutOfRange);
}

TEST_CASE("shifted statistic restores a divisive form") {
    auto fam = q_gaussian_family(LambdaParam(-1.0));
    const SubtractiveForm sub = fam.to_subtractive(vec1(1.0));
    const auto shifted = shifted_divisive(fam, sub.theta, sub.theta, 0.1);
    const double qq = fam.lam().q();
    for (double x : {-2.0, 0.0, 0.5, 1.8}) {
        const double subtractive =
            q_exp(qq, sub.theta.dot(fam.statistic(vec1(x))) - sub.phi_q);
        CHECK(shifted.family.density(shifted.vartheta, vec1(x)) ==
              doctest::Approx(subtractive).epsilon(1e-8));
    }
    CHECK_THROWS_AS(shifted_divisive(gaussian_location_family(), vec1(1.0), vec1(1.0), 0.1),
                    DomainViolation);
}

TEST_CASE("dual parameter equals the escort mean") {
    auto check_family = [](const LambdaExpFamily& fam, const VectorXd& th, double tol) {
        const VectorXd eta = fam.dual_parameter(th);
        const VectorXd em = fam.escort_mean(th);
        CHECK((eta - em).norm() < tol * (1.0 + eta.norm()));
    };
    check_family(simplex_family(LambdaParam(-2.0), 2),
                 simplex_natural(LambdaParam(-2.0), vec3(0.5, 0.3, 0.2)), 1e-9);
    check_family(simplex_family(LambdaParam(0.5), 2),
                 simplex_natural(LambdaParam(0.5), vec3(0.2, 0.5, 0.3)), 1e-9);
    check_family(q_gaussian_family(LambdaParam(-1.0)), vec1(2.0), 1e-8);
    check_family(q_gaussian_family(LambdaParam(0.5)), vec1(1.5), 1e-8);
    check_family(q_gaussian_family(LambdaParam(0.0)), vec1(1.0), 1e-8);
    check_family(cauchy_family(), vec2(0.6, -1.5), 1e-8);
    check_family(student_t_family(3.0, 1),
                 student_t_natural(3.0, vec1(0.5), MatrixXd::Constant(1, 1, 1.44)), 1e-6);
    {
        MatrixXd sigma(2, 2);
        sigma << 1.2, 0.3, 0.3, 0.8;
        check_family(student_t_family(4.0, 2), student_t_natural(4.0, vec2(0.3, -0.2), sigma),
                     1e-5);
    }
    check_family(dirichlet_perturbation_family(0.5, 2),
                 dirichlet_natural(0.5, vec3(0.4, 0.35, 0.25)), 1e-6);
}

TEST_CASE("dual parameter closed forms") {
    // q-Gaussian: eta = -1 / ((2 + lambda) vartheta)
    for (double l : {-1.0, -0.5, 0.5})
        for (double th : {0.5, 2.0}) {
            auto fam = q_gaussian_family(LambdaParam(l));
            CHECK(fam.dual_parameter(vec1(th))[0] ==
                  doctest::Approx(-1.0 / ((2.0 + l) * th)).epsilon(1e-9));
        }
    // standard Cauchy: escort of the second moment is one
    auto cf = cauchy_family();
    const VectorXd eta = cf.dual_parameter(vec2(0.0, -1.0));
    CHECK(eta[0] == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(eta[1] == doctest::Approx(1.0).epsilon(1e-10));
    // uniform simplex member: escort is again uniform
    auto simp = simplex_family(LambdaParam(-2.0), 2);
    const VectorXd seta = simp.dual_parameter(VectorXd::Zero(2));
    CHECK(seta[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
    CHECK(seta[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
    // triple of coordinates is consistent
    auto fam = q_gaussian_family(LambdaParam(-1.0));
    const FamilyPoint pt = fam.point(vec1(2.0));
    CHECK(pt.theta[0] ==
          doctest::Approx(2.0 * std::exp(fam.potential(vec1(2.0)))).epsilon(1e-12));
    CHECK(pt.eta[0] == doctest::Approx(-0.5).epsilon(1e-9));
}

TEST_CASE("samplers reproduce their member distributions") {
    const int n = 20000;
    // simplex: empirical state frequencies
    {
        const LambdaParam lam(-2.0);
        auto fam = simplex_family(lam, 2);
        const VectorXd u = vec3(0.5, 0.3, 0.2);
        const MatrixXd draws = fam.sample(simplex_natural(lam, u), n, 17);
        VectorXd freq = VectorXd::Zero(3);
        for (int k = 0; k < n; ++k) freq[static_cast<int>(draws(k, 0))] += 1.0 / n;
        for (int i = 0; i < 3; ++i)
            CHECK(std::abs(freq[i] - u[i]) < 3.5 * std::sqrt(u[i] * (1 - u[i]) / n));
    }
    // classical member: second moment 1 / (2 vartheta)
    {
        auto fam = q_gaussian_family(LambdaParam(0.0));
        const MatrixXd draws = fam.sample(vec1(1.0), n, 5);
        double m2 = 0.0;
        for (int k = 0; k < n; ++k) m2 += draws(k, 0) * draws(k, 0) / n;
        CHECK(std::abs(m2 - 0.5) < 3.0 * std::sqrt(0.5 / n));
    }
    // compact support member: all draws inside, second moment matches quadrature
    {
        auto fam = q_gaussian_family(LambdaParam(0.5));
        const VectorXd th = vec1(1.5);
        const MatrixXd draws = fam.sample(th, n, 11);
        double m2 = 0.0, m4 = 0.0;
        for (int k = 0; k < n; ++k) {
            CHECK(fam.in_support(th, draws.row(k).transpose()));
            const double s = draws(k, 0) * draws(k, 0);
            m2 += s / n;
            m4 += s * s / n;
        }
        const double ref = fam.scheme_for(th).integrate([&](const VectorXd& x) {
            return x[0] * x[0] * fam.density(th, x);
        });
        CHECK(std::abs(m2 - ref) < 4.0 * std::sqrt((m4 - m2 * m2) / n));
    }
    // heavy tail member: sign symmetry around zero
    {
        auto fam = q_gaussian_family(LambdaParam(-1.0));
        const MatrixXd draws = fam.sample(vec1(1.0), n, 23);
        double below = 0.0;
        for (int k = 0; k < n; ++k) below += draws(k, 0) < 0.0 ? 1.0 / n : 0.0;
        CHECK(std::abs(below - 0.5) < 1.5 / std::sqrt(n));
    }
    // Cauchy: median and quartiles of the location-scale form
    {
        auto fam = cauchy_family();
        const VectorXd th = cauchy_natural(0.7, 1.3);
        const MatrixXd draws = fam.sample(th, n, 29);
        double below = 0.0, middle = 0.0;
        for (int k = 0; k < n; ++k) {
            below += draws(k, 0) < 0.7 ? 1.0 / n : 0.0;
            middle += std::abs(draws(k, 0) - 0.7) < 1.3 ? 1.0 / n : 0.0;
        }
        CHECK(std::abs(below - 0.5) < 1.5 / std::sqrt(n));
        CHECK(std::abs(middle - 0.5) < 1.5 / std::sqrt(n));
    }
    // Student-t in two dimensions: marginal medians at the location
    {
        MatrixXd sigma(2, 2);
        sigma << 1.2, 0.3, 0.3, 0.8;
        auto fam = student_t_family(4.0, 2);
        const MatrixXd draws = fam.sample(student_t_natural(4.0, vec2(0.3, -0.2), sigma), n, 31);
        double b0 = 0.0, b1 = 0.0;
        for (int k = 0; k < n; ++k) {
            b0 += draws(k, 0) < 0.3 ? 1.0 / n : 0.0;
            b1 += draws(k, 1) < -0.2 ? 1.0 / n : 0.0;
        }
        CHECK(std::abs(b0 - 0.5) < 1.5 / std::sqrt(n));
        CHECK(std::abs(b1 - 0.5) < 1.5 / std::sqrt(n));
    }
    // Dirichlet perturbation at the barycenter: symmetric Dirichlet moments
    {
        const double sigma = 0.5;
        auto fam = dirichlet_perturbation_family(sigma, 2);
        const VectorXd th = VectorXd::Constant(2, -1.0 / sigma);
        const int m = 4000;
        const MatrixXd draws = fam.sample(th, m, 37);
        const double kappa = 1.0 / (sigma * 3.0);
        const double var = (1.0 / 3.0) * (2.0 / 3.0) / (3.0 * kappa + 1.0);
        for (int i = 0; i < 2; ++i) {
            double mean = 0.0;
            for (int k = 0; k < m; ++k) mean += draws(k, i) / m;
            CHECK(std::abs(mean - 1.0 / 3.0) < 3.5 * std::sqrt(var / m));
        }
        // sampler agrees with the quadrature expectation of a smooth functional
        const VectorXd th2 = dirichlet_natural(sigma, vec3(0.5, 0.2, 0.3));
        const MatrixXd d2 = fam.sample(th2, m, 41);
        double mean = 0.0, second = 0.0;
        for (int k = 0; k < m; ++k) {
            mean += d2(k, 0) / m;
            second += d2(k, 0) * d2(k, 0) / m;
        }
        const double ref = fam.scheme().integrate(
            [&](const VectorXd& x) { return x[0] * fam.density(th2, x); });
        CHECK(std::abs(mean - ref) < 3.5 * std::sqrt((second - mean * mean) / m));
    }
    // Gaussian location
    {
        auto fam = gaussian_location_family();
        const MatrixXd draws = fam.sample(vec1(2.0), n, 43);
        double mean = 0.0;
        for (int k = 0; k < n; ++k) mean += draws(k, 0) / n;
        CHECK(std::abs(mean - 2.0) < 3.0 / std::sqrt(n));
    }
}

TEST_CASE("power-coefficient reparameterization matches direct normalization") {
    // finite state space: equivalent to the indicator-statistic family
    {
        const LambdaParam lam(-0.6);
        std::vector<ScalarFn> stats = {
            [](const VectorXd&) { return 1.0; },
            [](const VectorXd& x) { return std::lround(x[0]) == 1 ? 1.0 : 0.0; },
            [](const VectorXd& x) { return std::lround(x[0]) == 2 ? 1.0 : 0.0; }};
        auto fam = alpha_family_reparameterize(stats, IntegrationScheme::finite_states(3), lam);
        auto simp = simplex_family(lam, 2);
        const VectorXd th = vec2(0.2, -0.3);
        CHECK(fam.potential(th) == doctest::Approx(simp.potential(th)).epsilon(1e-12));
        for (int i = 0; i < 3; ++i)
            CHECK(fam.density(th, vec1(i)) ==
                  doctest::Approx(simp.density(th, vec1(i))).epsilon(1e-12));

        // homogeneous coordinates map onto the divisive ones
        const VectorXd theta = vec3(2.0, 0.5, -0.1);
        const VectorXd th2 = alpha_family_natural(lam, theta);
        double z = 0.0;
        const double inv_l = 1.0 / lam.value();
        for (int i = 0; i < 3; ++i)
            z += std::pow(theta[0] * stats[0](vec1(i)) + theta[1] * stats[1](vec1(i)) +
                              theta[2] * stats[2](vec1(i)),
                          inv_l);
        for (int i = 0; i < 3; ++i) {
            const double direct = std::pow(theta[0] * stats[0](vec1(i)) +
                                               theta[1] * stats[1](vec1(i)) +
                                               theta[2] * stats[2](vec1(i)),
                                           inv_l) /
                                  z;
            CHECK(fam.density(th2, vec1(i)) == doctest::Approx(direct).epsilon(1e-12));
        }
    }
    // continuous base: density recovered through the statistic reweighting
    {
        const LambdaParam lam(0.5);
        std::vector<ScalarFn> stats = {[](const VectorXd& x) { return 1.0 + x[0]; },
                                       [](const VectorXd& x) { return x[0]; }};
        const auto base = IntegrationScheme::gauss_legendre(0.0, 1.0, 64);
        auto fam = alpha_family_reparameterize(stats, base, lam);
        const VectorXd theta = vec2(1.0, 0.4);
        const VectorXd th = alpha_family_natural(lam, theta);
        CHECK(th[0] == doctest::Approx(0.8).epsilon(1e-12));
        const double z = IntegrationScheme::gauss_legendre(0.0, 1.0, 128)
                             .integrate([&](const VectorXd& x) {
                                 const double s = theta[0] * (1.0 + x[0]) + theta[1] * x[0];
                                 return s * s;
                             });
        for (double x : {0.1, 0.5, 0.9}) {
            const double s = theta[0] * (1.0 + x) + theta[1] * x;
            const double direct = s * s / z;
            const double via_family =
                fam.density(th, vec1(x)) * std::pow(1.0 + x, 1.0 / lam.value());
            CHECK(via_family == doctest::Approx(direct).epsilon(1e-10));
        }
        CHECK_THROWS_AS(fam.sample(th, 10, 1), NotImplemented);
    }
    // leading statistic must stay positive on the base support
    {
        std::vector<ScalarFn> stats = {[](const VectorXd& x) { return x[0] - 0.5; },
                                       [](const VectorXd& x) { return x[0]; }};
        CHECK_THROWS_AS(alpha_family_reparameterize(
                            stats, IntegrationScheme::gauss_legendre(0.0, 1.0, 32),
                            LambdaParam(0.5)),
                        PositivityViolation);
    }
}

TEST_CASE("log-divergence of the potential equals the Renyi divergence of members") {
    // finite simplex, random pairs
    std::mt19937_64 rng(19);
    for (double l : {-2.0, 0.7}) {
        const LambdaParam lam(l);
        auto fam = simplex_family(lam, 2);
        auto pot = fam.potential_fn();
        for (int trial = 0; trial < 20; ++trial) {
            const VectorXd ua = testsup::random_simplex_point(rng, 3);
            const VectorXd ub = testsup::random_simplex_point(rng, 3);
            const VectorXd tha = simplex_natural(lam, ua);
            const VectorXd thb = simplex_natural(lam, ub);
            const double lhs = log_divergence(lam, pot, tha, thb);
            const double rhs = testsup::renyi_divergence_oracle(lam.q(), ub, ua);
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
        }
    }
    // heavy-tail q-Gaussian
    {
        const LambdaParam lam(-1.0);
        auto fam = q_gaussian_family(lam);
        auto pot = fam.potential_fn();
        for (auto [a, b] : {std::pair{0.5, 1.0}, {1.0, 2.0}, {2.0, 0.7}}) {
            const double lhs = log_divergence(lam, pot, vec1(a), vec1(b));
            const double rhs = renyi_divergence(lam.q(), fam.density_function(vec1(b)),
                                                fam.density_function(vec1(a)));
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-5));
        }
    }
    // compact support q-Gaussian, nested supports only
    {
        const LambdaParam lam(0.5);
        auto fam = q_gaussian_family(lam);
        auto pot = fam.potential_fn();
        for (auto [a, b] : {std::pair{0.5, 1.2}, {1.2, 2.0}, {0.8, 3.5}}) {
            const double lhs = log_divergence(lam, pot, vec1(a), vec1(b));
            const double rhs = renyi_divergence(lam.q(), fam.density_function(vec1(b)),
                                                fam.density_function(vec1(a)));
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-5));
        }
    }
    // Cauchy
    {
        const LambdaParam lam(-1.0);
        auto fam = cauchy_family();
        auto pot = fam.potential_fn();
        const VectorXd tha = cauchy_natural(0.0, 1.0);
        const VectorXd thb = cauchy_natural(0.6, 1.5);
        const double lhs = log_divergence(lam, pot, tha, thb);
        const double rhs = renyi_divergence(2.0, fam.density_function(thb),
                                            fam.density_function(tha));
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-5));
    }
    // classical limit: Bregman divergence of the potential is reverse KL
    {
        const LambdaParam lam(0.0);
        auto fam = simplex_family(lam, 2);
        auto pot = fam.potential_fn();
        const VectorXd tha = vec2(0.2, -0.4);
        const VectorXd thb = vec2(-0.1, 0.3);
        const double lhs = log_divergence(lam, pot, tha, thb);
        const double forward = kl_divergence(member_probs(fam, tha), member_probs(fam, thb));
        const double reverse = kl_divergence(member_probs(fam, thb), member_probs(fam, tha));
        CHECK(lhs == doctest::Approx(reverse).epsilon(1e-10));
        CHECK(std::abs(lhs - forward) > 1e-3);
    }
}

TEST_CASE("conjugate of the potential is minus the Renyi entropy") {
    // simplex members
    {
        const LambdaParam lam(-2.0);
        auto fam = simplex_family(lam, 2);
        auto pot = fam.potential_fn();
        OptimizerConfig cfg;
        cfg.gradient_tolerance = 1e-7;
        cfg.max_iterations = 200000;
        std::mt19937_64 rng(7);
        for (int trial = 0; trial < 5; ++trial) {
            const VectorXd u = testsup::random_simplex_point(rng, 3, 0.15);
            const VectorXd th = simplex_natural(lam, u);
            const VectorXd eta = fam.dual_parameter(th);
            const auto res = conjugate(lam, pot, eta, cfg);
            CHECK(res.converged);
            const double entropy = testsup::renyi_entropy_oracle(lam.q(), u);
            CHECK(res.value == doctest::Approx(-entropy).epsilon(1e-4));
            CHECK((res.argmax - th).norm() < 1e-2 * (1.0 + th.norm()));
        }
    }
    // Cauchy-type member: closed form -log(2 pi) at vartheta = 1
    {
        const LambdaParam lam(-1.0);
        auto fam = q_gaussian_family(lam);
        auto pot = fam.potential_fn();
        const VectorXd eta = fam.dual_parameter(vec1(1.0));
        const auto res = conjugate(lam, pot, eta);
        CHECK(res.converged);
        CHECK(res.value == doctest::Approx(-std::log(2.0 * M_PI)).epsilon(1e-6));
        CHECK(res.value ==
              doctest::Approx(-renyi_entropy(2.0, fam.density_function(vec1(1.0)))).epsilon(1e-5));
        // dual potential minus its scale part is constant across the family
        double reference = 0.0;
        bool first = true;
        for (double th : {0.5, 1.0, 2.0, 4.0}) {
            const VectorXd e = fam.dual_parameter(vec1(th));
            const double psi = conjugate(lam, pot, e).value;
            const double offset = psi + 0.5 * std::log(-e[0]);
            if (first) {
                reference = offset;
                first = false;
            } else {
                CHECK(offset == doctest::Approx(reference).epsilon(1e-4));
            }
        }
    }
}

TEST_CASE("beta weight scheme integrates Beta moments") {
    for (auto [a, b] : {std::pair{0.4, 1.7}, {2.0, 2.0}, {0.9, 0.3}}) {
        const auto sch = beta_weight_scheme(a, b, 48);
        CHECK(sch.integrate([](const VectorXd&) { return 1.0; }) ==
              doctest::Approx(1.0).epsilon(1e-11));
        CHECK(sch.integrate([](const VectorXd& x) { return x[0]; }) ==
              doctest::Approx(a / (a + b)).epsilon(1e-11));
        CHECK(sch.integrate([](const VectorXd& x) { return x[0] * x[0]; }) ==
              doctest::Approx(a * (a + 1.0) / ((a + b) * (a + b + 1.0))).epsilon(1e-11));
    }
    CHECK_THROWS_AS(beta_weight_scheme(-1.0, 1.0, 16), DomainViolation);
}

TEST_CASE("families serialize to JSON and back") {
    auto roundtrip = [](const LambdaExpFamily& fam, const VectorXd& th, const VectorXd& x) {
        const auto clone = family_from_json(fam.to_json());
        CHECK(clone.kind() == fam.kind());
        CHECK(clone.lam().value() == doctest::Approx(fam.lam().value()));
        CHECK(clone.statistic_dim() == fam.statistic_dim());
        CHECK(clone.density(th, x) == doctest::Approx(fam.density(th, x)).epsilon(1e-12));
    };
    roundtrip(simplex_family(LambdaParam(-2.0), 2), vec2(0.1, -0.4), vec1(1));
    roundtrip(q_gaussian_family(LambdaParam(0.5)), vec1(1.5), vec1(0.3));
    roundtrip(cauchy_family(), vec2(0.0, -1.0), vec1(0.7));
    roundtrip(student_t_family(3.0, 1),
              student_t_natural(3.0, vec1(0.5), MatrixXd::Constant(1, 1, 1.44)), vec1(0.0));
    roundtrip(dirichlet_perturbation_family(0.5, 1, 48), vec1(-1.7), vec1(0.4));
    roundtrip(gaussian_location_family(), vec1(0.8), vec1(0.2));
    {
        MatrixXd s(4, 2);
        s << 1, 0.5, -1, 0.25, 0.5, -1, 0, 0;
        roundtrip(discrete_family(LambdaParam(-0.8), s), vec2(0.4, 0.1), vec1(2));
    }
    // families without a registered builder refuse to deserialize
    std::vector<ScalarFn> stats = {[](const VectorXd&) { return 1.0; },
                                   [](const VectorXd& x) { return x[0]; }};
    auto alpha = alpha_family_reparameterize(stats, IntegrationScheme::gauss_legendre(0, 1, 16),
                                             LambdaParam(0.5));
    CHECK_THROWS_AS(family_from_json(alpha.to_json()), NotImplemented);
}

TEST_CASE("regularity: deformed convexity and normalization margin") {
    auto check_points = [](const LambdaExpFamily& fam, const std::vector<VectorXd>& points) {
        const double l = fam.lam().value();
        auto pot = fam.potential_fn();
        for (const VectorXd& th : points) {
            const VectorXd g = pot.gradient(th);
            const double margin = 1.0 - l * g.dot(th);
            CHECK(margin > 0.0);
            const MatrixXd h =
                fd_hessian([&](const VectorXd& t) { return fam.potential(t); }, th,
                           &fam.natural_domain());
            const MatrixXd deformed = h + l * g * g.transpose();
            Eigen::SelfAdjointEigenSolver<MatrixXd> eig(deformed);
            CHECK(eig.eigenvalues().minCoeff() > -1e-7);
        }
    };
    check_points(simplex_family(LambdaParam(-2.0), 2),
                 {vec2(0.0, 0.0), vec2(0.3, -0.5), vec2(-1.2, 0.4)});
    check_points(simplex_family(LambdaParam(0.5), 2),
                 {vec2(0.0, 0.0), vec2(1.0, -1.5), vec2(-0.8, 0.9)});
    check_points(q_gaussian_family(LambdaParam(-1.0)), {vec1(0.5), vec1(1.0), vec1(3.0)});
    check_points(q_gaussian_family(LambdaParam(0.5)), {vec1(0.5), vec1(2.0)});
    check_points(cauchy_family(), {vec2(0.0, -1.0), vec2(0.5, -0.8), vec2(-1.0, -2.0)});
    check_points(dirichlet_perturbation_family(0.5, 2),
                 {vec2(-2.0, -2.0), vec2(-0.7, -3.0)});
}

TEST_CASE("family construction and evaluation errors") {
    CHECK_THROWS_AS(simplex_family(LambdaParam(1.2), 2), DomainViolation);
    auto fam = q_gaussian_family(LambdaParam(-1.0));
    CHECK_THROWS_AS(fam.density(vec1(-1.0), vec1(0.0)), ParameterOutsideDomain);
    CHECK_THROWS_AS(fam.potential(vec1(-1.0)), IntegralDiverged);
    CHECK_THROWS_AS(fam.sample(vec1(-1.0), 10, 1), ParameterOutsideDomain);
    auto cf = cauchy_family();
    CHECK_THROWS_AS(cf.potential(vec2(2.0, -0.5)), IntegralDiverged);
}
