#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "lamdual/divergences.hpp"
#include "lamdual/families.hpp"
#include "lamdual/figures.hpp"
#include "lamdual/inference.hpp"
#include "lamdual/lambda_core.hpp"
#include "lamdual/numerics.hpp"

using namespace lamdual;

namespace {

// Output is compared at six significant digits downstream; a 1e-7 gradient
// stop leaves plenty of headroom and avoids stalls in nested solves where
// Armijo steps can no longer improve the objective in double precision.
OptimizerConfig solver_config() {
    OptimizerConfig cfg;
    cfg.gradient_tolerance = 1e-7;
    return cfg;
}

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

std::string num(const VectorXd& v) {
    std::string out = "[";
    for (int i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += num(v[i]);
    }
    return out + "]";
}

double parse_double(std::string_view tok, const std::string& what) {
    double x = 0.0;
    const char* begin = tok.data();
    const char* end = begin + tok.size();
    auto [ptr, ec] = std::from_chars(begin, end, x);
    if (ec != std::errc{} || ptr != end)
        throw DomainViolation(what + ": cannot parse '" + std::string(tok) + "' as a number");
    return x;
}

VectorXd parse_point(const std::string& text, const std::string& flag) {
    std::vector<double> vals;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t comma = text.find(',', pos);
        if (comma == std::string::npos) comma = text.size();
        vals.push_back(parse_double(std::string_view(text).substr(pos, comma - pos), flag));
        pos = comma + 1;
    }
    VectorXd v(static_cast<int>(vals.size()));
    for (std::size_t i = 0; i < vals.size(); ++i) v[static_cast<int>(i)] = vals[i];
    return v;
}

// ---------------------------------------------------------------------------
// shared flag bundles

struct FamilyFlags {
    std::string name;
    double lambda = 0.0;
    bool lambda_given = false;
    int dim = 0;
    bool dim_given = false;
    double sigma = 1.0;
    double dof = 3.0;
};

LambdaExpFamily build_family(const FamilyFlags& f) {
    auto need_lambda = [&]() {
        if (!f.lambda_given)
            throw DomainViolation("family '" + f.name + "' requires --lambda");
        return LambdaParam(f.lambda);
    };
    auto fixed_lambda = [&]() {
        if (f.lambda_given)
            throw DomainViolation("family '" + f.name +
                                  "' determines lambda itself; drop --lambda");
    };
    int dim = f.dim_given ? f.dim : 0;
    if (f.name == "simplex") return simplex_family(need_lambda(), dim ? dim : 2);
    if (f.name == "q_gaussian") {
        if (f.dim_given) throw DomainViolation("family 'q_gaussian' is one-dimensional");
        return q_gaussian_family(need_lambda());
    }
    if (f.name == "gaussian_location") {
        fixed_lambda();
        return gaussian_location_family();
    }
    if (f.name == "cauchy") {
        fixed_lambda();
        return cauchy_family();
    }
    if (f.name == "student_t") {
        fixed_lambda();
        return student_t_family(f.dof, dim ? dim : 1);
    }
    if (f.name == "dirichlet_perturbation") {
        fixed_lambda();
        return dirichlet_perturbation_family(f.sigma, dim ? dim : 1);
    }
    throw DomainViolation("unknown family '" + f.name +
                          "'; expected simplex, q_gaussian, gaussian_location, cauchy, "
                          "student_t, or dirichlet_perturbation");
}

Potential build_potential(const std::string& name, const LambdaParam& lam, int dim) {
    if (name == "quadratic")
        return Potential(
            Domain::all(dim), [](const VectorXd& u) { return 0.5 * u.squaredNorm(); },
            [](const VectorXd& u) { return u; });
    if (name == "simplex") return negative_renyi_escort_potential(lam, dim);
    if (name == "simplex-dual")
        return conjugate_potential(lam, negative_renyi_escort_potential(lam, dim),
                                   Domain::all(dim), solver_config());
    throw DomainViolation("unknown potential '" + name +
                          "'; expected quadratic, simplex, or simplex-dual");
}

// ---------------------------------------------------------------------------
// divergence

struct DivergenceFlags {
    double lambda = 0.0;
    bool lambda_given = false;
    std::string potential;
    std::string u, u_prime;
    FamilyFlags family;
    std::string vartheta, vartheta_prime;
};

int run_divergence(const DivergenceFlags& d) {
    double value = 0.0;
    if (!d.potential.empty() && !d.family.name.empty())
        throw DomainViolation("--potential and --family are mutually exclusive");
    if (!d.potential.empty()) {
        if (!d.lambda_given) throw DomainViolation("--potential mode requires --lambda");
        if (d.u.empty() || d.u_prime.empty())
            throw DomainViolation("--potential mode requires --u and --u-prime");
        VectorXd u = parse_point(d.u, "--u");
        VectorXd up = parse_point(d.u_prime, "--u-prime");
        if (u.size() != up.size())
            throw DomainViolation("--u has " + std::to_string(u.size()) + " components but "
                                  "--u-prime has " + std::to_string(up.size()));
        LambdaParam lam(d.lambda);
        value = log_divergence(lam, build_potential(d.potential, lam, int(u.size())), u, up);
    } else if (!d.family.name.empty()) {
        if (d.vartheta.empty() || d.vartheta_prime.empty())
            throw DomainViolation("--family mode requires --vartheta and --vartheta-prime");
        FamilyFlags ff = d.family;
        ff.lambda = d.lambda;
        ff.lambda_given = d.lambda_given;
        LambdaExpFamily fam = build_family(ff);
        VectorXd th = parse_point(d.vartheta, "--vartheta");
        VectorXd thp = parse_point(d.vartheta_prime, "--vartheta-prime");
        if (th.size() != fam.statistic_dim() || thp.size() != fam.statistic_dim())
            throw DomainViolation("family '" + ff.name + "' has natural dimension " +
                                  std::to_string(fam.statistic_dim()));
        value = log_divergence(fam.lam(), fam.potential_fn(), th, thp);
    } else {
        throw DomainViolation("pass either --potential with --u/--u-prime or --family with "
                              "--vartheta/--vartheta-prime");
    }
    if (std::isfinite(value))
        std::cout << "{\"value\": " << num(value) << ", \"finite\": true}\n";
    else
        std::cout << "{\"finite\": false}\n";
    return 0;
}

// ---------------------------------------------------------------------------
// conjugate

struct ConjugateFlags {
    double lambda = 0.0;
    std::string potential;
    std::string v;
    std::string grid;
};

int run_conjugate(const ConjugateFlags& c) {
    LambdaParam lam(c.lambda);
    if (!c.grid.empty()) {
        std::istringstream ss(c.grid);
        std::string a, b, n;
        if (!std::getline(ss, a, ':') || !std::getline(ss, b, ':') || !std::getline(ss, n))
            throw DomainViolation("--grid expects start:stop:count");
        double lo = parse_double(a, "--grid start");
        double hi = parse_double(b, "--grid stop");
        int count = static_cast<int>(parse_double(n, "--grid count"));
        if (count < 2) throw DomainViolation("--grid count must be at least 2");
        Potential f = build_potential(c.potential, lam, 1);
        std::vector<VectorXd> vs;
        for (int i = 0; i < count; ++i)
            vs.push_back(VectorXd::Constant(1, lo + (hi - lo) * i / (count - 1)));
        std::vector<ConjugateResult> results = conjugate_grid(lam, f, vs, solver_config());
        std::cout << "v,value,argmax\n";
        for (int i = 0; i < count; ++i) {
            if (!results[i].converged) throw NoAscentDirection("conjugate solve did not converge");
            std::cout << num(vs[i][0]) << "," << num(results[i].value) << ","
                      << num(results[i].argmax[0]) << "\n";
        }
        return 0;
    }
    if (c.v.empty()) throw DomainViolation("pass --v (or --grid for a sweep)");
    VectorXd v = parse_point(c.v, "--v");
    if (c.potential == "simplex-dual") {
        // conjugating the dual recovers the simplex potential, finite only on
        // the closed simplex
        if (v.minCoeff() < 0.0 || v.sum() > 1.0)
            throw DomainViolation("--v must lie in the closed simplex (components >= 0, "
                                  "sum <= 1) for potential simplex-dual");
    }
    ConjugateResult r =
        conjugate(lam, build_potential(c.potential, lam, int(v.size())), v, solver_config());
    if (!r.converged) throw NoAscentDirection("conjugate solve did not converge");
    std::cout << "{\"value\": " << num(r.value) << ", \"argmax\": " << num(r.argmax) << "}\n";
    return 0;
}

// ---------------------------------------------------------------------------
// fit

struct FitFlags {
    FamilyFlags family;
    std::string data_path;
    std::string method = "barycenter";
};

MatrixXd read_csv(const std::string& path, int expected_cols) {
    std::ifstream in(path);
    if (!in) throw DomainViolation("cannot open data file '" + path + "'");
    std::vector<std::vector<double>> rows;
    std::string line;
    int lineno = 0;
    bool first_content = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> toks;
        std::size_t pos = 0;
        while (pos <= line.size()) {
            std::size_t comma = line.find(',', pos);
            if (comma == std::string::npos) comma = line.size();
            toks.push_back(line.substr(pos, comma - pos));
            pos = comma + 1;
        }
        std::vector<double> vals;
        bool ok = true;
        for (std::size_t cidx = 0; cidx < toks.size(); ++cidx) {
            try {
                vals.push_back(parse_double(toks[cidx], "field"));
            } catch (const DomainViolation&) {
                if (first_content) {
                    ok = false;  // header line
                    break;
                }
                throw DomainViolation(path + " row " + std::to_string(lineno) + " column " +
                                      std::to_string(cidx + 1) + ": cannot parse '" +
                                      toks[cidx] + "' as a number");
            }
        }
        first_content = false;
        if (!ok) continue;
        if (static_cast<int>(vals.size()) != expected_cols)
            throw DomainViolation(path + " row " + std::to_string(lineno) + " has " +
                                  std::to_string(vals.size()) + " columns; expected " +
                                  std::to_string(expected_cols));
        rows.push_back(std::move(vals));
    }
    if (rows.empty()) throw DomainViolation(path + " contains no data rows");
    MatrixXd data(static_cast<int>(rows.size()), expected_cols);
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (int c = 0; c < expected_cols; ++c) data(static_cast<int>(r), c) = rows[r][c];
    return data;
}

void print_fit(const VectorXd& eta, const VectorXd& vartheta, double objective, int iterations) {
    std::cout << "{\"eta_hat\": " << num(eta) << ", \"vartheta_hat\": " << num(vartheta)
              << ", \"objective\": " << num(objective)
              << ", \"iterations\": " << iterations << "}\n";
}

int run_fit(const FitFlags& f) {
    LambdaExpFamily fam = build_family(f.family);
    MatrixXd data = read_csv(f.data_path, fam.sample_dim());
    if (f.method == "barycenter") {
        MleResult r = mle_barycenter(fam, data, solver_config());
        if (!r.converged) throw NoAscentDirection("barycenter fit did not converge");
        print_fit(r.eta_hat, r.vartheta_hat, r.mean_divergence, r.iterations);
        return 0;
    }
    if (f.method != "likelihood")
        throw DomainViolation("unknown method '" + f.method +
                              "'; expected barycenter or likelihood");
    const LambdaParam lam = fam.lam();
    std::vector<VectorXd> xs, ys;
    for (int i = 0; i < data.rows(); ++i) {
        xs.push_back(data.row(i).transpose());
        ys.push_back(fam.statistic(xs.back()));
    }
    auto objective = [&](const VectorXd& th) {
        KahanSum acc;
        for (std::size_t k = 0; k < ys.size(); ++k) {
            if (!fam.in_support(th, xs[k])) return -std::numeric_limits<double>::infinity();
            double c = cost(lam, th, ys[k]);
            if (!std::isfinite(c)) return -std::numeric_limits<double>::infinity();
            acc.add(-c);
        }
        double phi = 0.0;
        try {
            phi = fam.potential(th);
        } catch (const Error&) {
            return -std::numeric_limits<double>::infinity();
        }
        if (!std::isfinite(phi)) return -std::numeric_limits<double>::infinity();
        return acc.value() / static_cast<double>(ys.size()) - phi;
    };
    MaximizeResult r = maximize(objective, fam.natural_domain(), fam.natural_domain().anchor(),
                                solver_config());
    if (!r.converged) throw NoAscentDirection("likelihood fit did not converge");
    print_fit(fam.dual_parameter(r.argmax), r.argmax, r.value, r.iterations);
    return 0;
}

// ---------------------------------------------------------------------------
// figure

struct FigureFlags {
    std::string which;
    std::string out;
    bool out_given = false;
    int threads = 1;
};

int run_figure(const FigureFlags& f) {
    if (f.out_given && f.out.empty()) throw DomainViolation("--out path is empty");
    std::string csv = to_csv(figure_by_name(f.which, f.threads));
    if (f.out_given) {
        std::ofstream out(f.out);
        if (!out) throw DomainViolation("cannot open output file '" + f.out + "'");
        out << csv;
    } else {
        std::cout << csv;
    }
    return 0;
}

void add_family_flags(CLI::App* sub, FamilyFlags& f) {
    sub->add_option("--family", f.name,
                    "family kind: simplex, q_gaussian, gaussian_location, cauchy, student_t, "
                    "dirichlet_perturbation");
    sub->add_option("--dim", f.dim, "chart dimension (simplex, student_t, dirichlet)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--sigma", f.sigma, "dirichlet perturbation scale")->check(CLI::PositiveNumber);
    sub->add_option("--dof", f.dof, "student-t degrees of freedom")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lambda-duality toolkit: logarithmic divergences, lambda-conjugates, "
                 "barycenter fits, and figure data"};
    app.require_subcommand(1);
    app.set_config("--config", "",
                   "key=value file; keys are flag names inside a [subcommand] section");

    DivergenceFlags d;
    auto* div = app.add_subcommand("divergence",
                                   "logarithmic divergence between two points (JSON)");
    div->add_option("--lambda", d.lambda, "deformation parameter")
        ->each([&d](const std::string&) { d.lambda_given = true; });
    div->add_option("--potential", d.potential, "builtin potential: quadratic, simplex, "
                    "simplex-dual");
    div->add_option("--u", d.u, "primal point, comma-separated");
    div->add_option("--u-prime", d.u_prime, "reference point, comma-separated");
    add_family_flags(div, d.family);
    div->add_option("--vartheta", d.vartheta, "natural parameter (family mode)");
    div->add_option("--vartheta-prime", d.vartheta_prime, "reference parameter (family mode)");

    ConjugateFlags c;
    auto* con = app.add_subcommand("conjugate",
                                   "lambda-conjugate value and argmax (JSON; --grid emits CSV)");
    con->add_option("--lambda", c.lambda, "deformation parameter")->required();
    con->add_option("--potential", c.potential, "builtin potential: quadratic, simplex, "
                    "simplex-dual")
        ->required();
    con->add_option("--v", c.v, "dual point, comma-separated");
    con->add_option("--grid", c.grid, "1-d sweep start:stop:count (CSV output)");

    FitFlags ft;
    auto* fit = app.add_subcommand("fit", "estimate a family member from CSV data (JSON)");
    add_family_flags(fit, ft.family);
    fit->get_option("--family")->required();
    fit->add_option("--lambda", ft.family.lambda, "deformation parameter (simplex, q_gaussian)")
        ->each([&ft](const std::string&) { ft.family.lambda_given = true; });
    fit->add_option("--data", ft.data_path, "CSV file, one observation per row; optional header")
        ->required();
    fit->add_option("--method", ft.method, "barycenter (divergence route) or likelihood")
        ->check(CLI::IsMember({"barycenter", "likelihood"}));

    FigureFlags fg;
    auto* fig = app.add_subcommand("figure", "deterministic figure-reproduction data (CSV)");
    fig->add_option("--which", fg.which, "one of: escort, conjugate-envelope, ldiv-1d, "
                    "renyi-simplex, qgauss-div, mixture-grid, t-interpolation")
        ->required();
    fig->add_option("--out", fg.out, "output path (default stdout)")
        ->each([&fg](const std::string&) { fg.out_given = true; });
    fig->add_option("--threads", fg.threads, "worker threads for grid figures")
        ->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (div->parsed()) return run_divergence(d);
        if (con->parsed()) return run_conjugate(c);
        if (fit->parsed()) return run_fit(ft);
        if (fig->parsed()) return run_figure(fg);
    } catch (const DomainViolation& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ParameterOutsideDomain& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const SupportConditionViolated& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const NotImplemented& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const StartOutsideDomain& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
