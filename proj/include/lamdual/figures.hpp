#pragma once

#include <string>
#include <vector>

#include "lamdual/numerics.hpp"

namespace lamdual {

// Tabular artifact data: named columns, one numeric row per entry. Generators
// are deterministic, so serialized output is byte-stable across runs.
struct FigureData {
    std::vector<std::string> columns;
    std::vector<VectorXd> rows;
};

// Escort transform on the two-point simplex: powers and their normalization,
// exponents 0.5 and 3.
FigureData figure_escort();

// A deformed-convex function on (0, infinity) at lambda = 0.5 as the upper
// envelope of vertically shifted logarithmic chords.
FigureData figure_conjugate_envelope();

// One-dimensional logarithmic divergence as the gap between a potential and
// its tangent logarithmic chord, lambda in {0.7, -1}.
FigureData figure_ldiv_1d();

// Renyi entropy of the escort over the one-dimensional simplex together with
// its convexification, across a ladder of lambda values including 0.
FigureData figure_renyi_simplex();

// Scale divergence of the q-Gaussian family from vartheta0 = 2 over
// vartheta in (0, 10]; infinite values appear for positive lambda.
FigureData figure_qgauss_divergence();

// lambda-mixtures of three fixed 3-state members over a barycentric weight
// grid, lambda in {-2, 0.7}. Rows are computed independently, so the optional
// thread count only affects wall time.
FigureData figure_mixture_grid(int threads = 1);

// Interpolation between two Student-t members (dof 3) along the mixture
// embedding; emits the interpolant density over an x-grid per time step.
FigureData figure_t_interpolation();

// Dispatch by artifact id; DomainViolation on unknown ids.
FigureData figure_by_name(const std::string& which, int threads = 1);
const std::vector<std::string>& figure_names();

// CSV with a header row, 12 significant digits, inf/-inf spelled out.
std::string to_csv(const FigureData& fig);

}  // namespace lamdual
