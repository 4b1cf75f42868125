#pragma once

// Shared helpers for the test suite. The oracles here are deliberately
// independent of the library code paths they are used to check: the conjugate
// oracle is a dense grid search, reference entropies are written out directly
// from their defining sums, and rank correlation is computed from scratch.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "lamdual/lambda_core.hpp"

namespace testsup {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Dense 1-d grid search sup_{u in [lo, hi]} h(u) at the given resolution.
// Returns {argmax, value}.
inline std::pair<double, double> grid_search_max(const std::function<double(double)>& h, double lo,
                                                 double hi, double resolution) {
    double best_u = lo, best = -std::numeric_limits<double>::infinity();
    for (double u = lo; u <= hi; u += resolution) {
        const double v = h(u);
        if (v > best) {
            best = v;
            best_u = u;
        }
    }
    return {best_u, best};
}

// Conjugate oracle: sup over a truncated grid of the deformed pairing minus f.
inline std::pair<double, double> conjugate_grid_oracle(double lambda,
                                                       const std::function<double(double)>& f,
                                                       double v, double lo, double hi,
                                                       double resolution) {
    auto h = [&](double u) {
        const double s = 1.0 + lambda * u * v;
        if (s <= 0.0) return -std::numeric_limits<double>::infinity();
        return std::log(s) / lambda - f(u);
    };
    return grid_search_max(h, lo, hi, resolution);
}

inline double shannon_oracle(const VectorXd& p) {
    double s = 0.0;
    for (int i = 0; i < p.size(); ++i) s -= p[i] * std::log(p[i]);
    return s;
}

inline double renyi_entropy_oracle(double q, const VectorXd& p) {
    double s = 0.0;
    for (int i = 0; i < p.size(); ++i) s += std::pow(p[i], q);
    return std::log(s) / (1.0 - q);
}

inline double kl_oracle(const VectorXd& p, const VectorXd& r) {
    double s = 0.0;
    for (int i = 0; i < p.size(); ++i) s += p[i] * std::log(p[i] / r[i]);
    return s;
}

inline double renyi_divergence_oracle(double q, const VectorXd& p, const VectorXd& r) {
    double s = 0.0;
    for (int i = 0; i < p.size(); ++i) s += std::pow(p[i], q) * std::pow(r[i], 1.0 - q);
    return std::log(s) / (q - 1.0);
}

// Random interior point of the probability simplex with all entries >= floor.
inline VectorXd random_simplex_point(std::mt19937_64& rng, int n, double floor = 0.02) {
    std::gamma_distribution<double> g(1.0, 1.0);
    VectorXd p(n);
    while (true) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) {
            p[i] = g(rng);
            s += p[i];
        }
        p /= s;
        if (p.minCoeff() >= floor) return p;
    }
}

// Spearman rank correlation.
inline double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    const int n = static_cast<int>(a.size());
    auto ranks = [n](const std::vector<double>& x) {
        std::vector<int> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&x](int i, int j) { return x[i] < x[j]; });
        std::vector<double> r(n);
        for (int k = 0; k < n; ++k) r[idx[k]] = k;
        return r;
    };
    const std::vector<double> ra = ranks(a), rb = ranks(b);
    const double mean = (n - 1) / 2.0;
    double num = 0.0, da = 0.0, db = 0.0;
    for (int i = 0; i < n; ++i) {
        num += (ra[i] - mean) * (rb[i] - mean);
        da += (ra[i] - mean) * (ra[i] - mean);
        db += (rb[i] - mean) * (rb[i] - mean);
    }
    return num / std::sqrt(da * db);
}

}  // namespace testsup
