#include "lamdual/figures.hpp"

#include <cmath>
#include <cstdio>
#include <thread>
#include <utility>

#include "lamdual/divergences.hpp"
#include "lamdual/errors.hpp"
#include "lamdual/families.hpp"
#include "lamdual/lambda_core.hpp"
#include "lamdual/mixtures.hpp"

namespace lamdual {
namespace {

VectorXd make_row(std::initializer_list<double> xs) {
    VectorXd row(static_cast<int>(xs.size()));
    int i = 0;
    for (double x : xs) row[i++] = x;
    return row;
}

}  // namespace

FigureData figure_escort() {
    FigureData fig;
    fig.columns = {"alpha", "p1", "p2", "pow1", "pow2", "escort1", "escort2"};
    for (double alpha : {0.5, 3.0}) {
        for (int k = 1; k <= 49; ++k) {
            double p1 = 0.02 * k;
            double p2 = 1.0 - p1;
            double w1 = std::pow(p1, alpha), w2 = std::pow(p2, alpha);
            fig.rows.push_back(
                make_row({alpha, p1, p2, w1, w2, w1 / (w1 + w2), w2 / (w1 + w2)}));
        }
    }
    return fig;
}

FigureData figure_conjugate_envelope() {
    const LambdaParam lam(0.5);
    auto f = [&](double u) { return (1.0 / u - 1.0 + std::log(u)) / lam.value(); };
    FigureData fig;
    fig.columns = {"u", "f", "v", "chord"};
    for (int i = 0; i <= 90; ++i) {
        double u = 0.3 + 0.03 * i;
        for (int j = 0; j <= 20; ++j) {
            double v = -5.0 + 0.5 * j;
            // chord value (1/lambda) log(1 + lambda u v) - v, -inf once the
            // logarithm leaves its domain
            double chord = -cost(lam, VectorXd::Constant(1, u), VectorXd::Constant(1, v)) - v;
            fig.rows.push_back(make_row({u, f(u), v, chord}));
        }
    }
    return fig;
}

FigureData figure_ldiv_1d() {
    FigureData fig;
    fig.columns = {"lambda", "u", "u_prime", "f", "chord", "divergence"};
    Potential quad(Domain::box(VectorXd::Constant(1, -1.0), VectorXd::Constant(1, 1.0)),
                   [](const VectorXd& u) { return 0.5 * u.squaredNorm(); },
                   [](const VectorXd& u) { return u; });
    const double uprime = 0.3;
    for (double lamv : {0.7, -1.0}) {
        LambdaParam lam(lamv);
        for (int i = 0; i <= 90; ++i) {
            double u = -0.9 + 0.02 * i;
            double chord =
                0.5 * uprime * uprime + std::log1p(lamv * uprime * (u - uprime)) / lamv;
            double div = log_divergence(lam, quad, VectorXd::Constant(1, u),
                                        VectorXd::Constant(1, uprime));
            fig.rows.push_back(make_row({lamv, u, uprime, 0.5 * u * u, chord, div}));
        }
    }
    return fig;
}

FigureData figure_renyi_simplex() {
    FigureData fig;
    fig.columns = {"lambda", "p1", "entropy", "convexified"};
    for (double lamv : {-5.0, -2.0, -1.0, -0.5, -0.1, 0.0, 0.1, 0.5, 0.9}) {
        const bool classical = lamv == 0.0;
        Potential phi = negative_renyi_escort_potential(
            classical ? LambdaParam::classical() : LambdaParam(lamv), 1);
        for (int k = 1; k <= 99; ++k) {
            double p1 = 0.01 * k;
            double value = phi.value(VectorXd::Constant(1, p1));
            double convexified = classical ? value : std::expm1(lamv * value) / lamv;
            fig.rows.push_back(make_row({lamv, p1, -value, convexified}));
        }
    }
    return fig;
}

FigureData figure_qgauss_divergence() {
    FigureData fig;
    fig.columns = {"lambda", "vartheta", "divergence"};
    VectorXd anchor = VectorXd::Constant(1, 2.0);
    for (double lamv : {-1.5, -1.0, -0.5, 0.0, 0.5, 0.9}) {
        LambdaParam lam = lamv == 0.0 ? LambdaParam::classical() : LambdaParam(lamv);
        auto fam = q_gaussian_family(lam);
        Potential phi = fam.potential_fn();
        for (int k = 1; k <= 200; ++k) {
            double th = 0.05 * k;
            double div = log_divergence(lam, phi, VectorXd::Constant(1, th), anchor);
            fig.rows.push_back(make_row({lamv, th, div}));
        }
    }
    return fig;
}

FigureData figure_mixture_grid(int threads) {
    if (threads < 1) throw DomainViolation("figure_mixture_grid: thread count must be positive");
    VectorXd p0(3), p1(3), p2(3);
    p0 << 0.8, 0.1, 0.1;
    p1 << 0.02, 0.9, 0.08;
    p2 << 0.35, 0.2, 0.45;
    std::vector<DiscreteDensity> members = {DiscreteDensity(p0), DiscreteDensity(p1),
                                            DiscreteDensity(p2)};
    const int steps = 20;
    std::vector<std::pair<double, VectorXd>> jobs;
    for (double lamv : {-2.0, 0.7})
        for (int i = 0; i <= steps; ++i)
            for (int j = 0; i + j <= steps; ++j) {
                VectorXd eta(3);
                eta << i / double(steps), j / double(steps), (steps - i - j) / double(steps);
                jobs.emplace_back(lamv, eta);
            }

    std::vector<VectorXd> rows(jobs.size());
    auto worker = [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
            const auto& [lamv, eta] = jobs[k];
            MixtureSpec spec = MixtureSpec::discrete(members, eta);
            DensityFunction mix = lambda_mixture(LambdaParam(lamv), spec);
            VectorXd row(7);
            row << lamv, eta[0], eta[1], eta[2], mix.pdf(VectorXd::Constant(1, 0.0)),
                mix.pdf(VectorXd::Constant(1, 1.0)), mix.pdf(VectorXd::Constant(1, 2.0));
            rows[k] = row;
        }
    };
    if (threads == 1) {
        worker(0, jobs.size());
    } else {
        std::vector<std::thread> pool;
        std::size_t chunk = (jobs.size() + threads - 1) / threads;
        for (std::size_t begin = 0; begin < jobs.size(); begin += chunk)
            pool.emplace_back(worker, begin, std::min(begin + chunk, jobs.size()));
        for (auto& t : pool) t.join();
    }

    FigureData fig;
    fig.columns = {"lambda", "eta1", "eta2", "eta3", "p1", "p2", "p3"};
    fig.rows = std::move(rows);
    return fig;
}

FigureData figure_t_interpolation() {
    auto fam = student_t_family(3.0, 1);
    Eigen::MatrixXd s0(1, 1), s1(1, 1);
    s0 << 0.49;
    s1 << 1.0;
    std::vector<VectorXd> members = {
        student_t_natural(3.0, VectorXd::Constant(1, -4.0), s0),
        student_t_natural(3.0, VectorXd::Constant(1, 3.0), s1)};
    FigureData fig;
    fig.columns = {"t", "x", "density"};
    for (int step = 0; step <= 10; ++step) {
        double t = 0.1 * step;
        VectorXd w(2);
        w << 1.0 - t, t;
        VectorXd vartheta = embed_alpha_mixture(fam, members, w);
        for (int k = 0; k <= 340; ++k) {
            double x = -9.0 + 0.05 * k;
            fig.rows.push_back(
                make_row({t, x, fam.density(vartheta, VectorXd::Constant(1, x))}));
        }
    }
    return fig;
}

const std::vector<std::string>& figure_names() {
    static const std::vector<std::string> names = {
        "escort",     "conjugate-envelope", "ldiv-1d",         "renyi-simplex",
        "qgauss-div", "mixture-grid",       "t-interpolation"};
    return names;
}

FigureData figure_by_name(const std::string& which, int threads) {
    if (which == "escort") return figure_escort();
    if (which == "conjugate-envelope") return figure_conjugate_envelope();
    if (which == "ldiv-1d") return figure_ldiv_1d();
    if (which == "renyi-simplex") return figure_renyi_simplex();
    if (which == "qgauss-div") return figure_qgauss_divergence();
    if (which == "mixture-grid") return figure_mixture_grid(threads);
    if (which == "t-interpolation") return figure_t_interpolation();
    throw DomainViolation("unknown figure id '" + which + "'");
}

std::string to_csv(const FigureData& fig) {
    std::string out;
    for (std::size_t i = 0; i < fig.columns.size(); ++i) {
        if (i) out += ',';
        out += fig.columns[i];
    }
    out += '\n';
    char buf[48];
    for (const VectorXd& row : fig.rows) {
        for (int i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            std::snprintf(buf, sizeof(buf), "%.12g", row[i]);
            out += buf;
        }
        out += '\n';
    }
    return out;
}

}  // namespace lamdual
