#pragma once

#include "mink/symfunc.hpp"

#include <array>
#include <functional>
#include <string>
#include <vector>

namespace mink {

// Dirichlet data phi for the dual problem. `eval` takes a point on the
// sphere |xi| = r; every kind except the hyperboloid only looks at xi / |xi|.
struct BoundaryData {
    int n = 2;
    std::string kind;
    std::function<double(const Vec&)> eval;
    // closed-form dual solution, present for the hyperboloid kind only
    std::function<double(const Vec&)> exact;
    std::vector<Vec> directions;  // quadrature set on the unit sphere
    std::vector<double> samples;  // phi at the directions
    double c1 = 0;                // |phi|_{C1} estimate on the unit sphere
    double c2 = 0;                // |phi|_{C2} estimate

    double max_value() const;
    double min_value() const;
};

// Fills directions, samples and the C1/C2 estimates from `eval`.
void finalize_boundary(BoundaryData& b);

// n = 2: sum over rows {k, a_k, b_k} of a_k sin(k theta) + b_k cos(k theta), plus a constant.
BoundaryData boundary_fourier(const std::vector<std::array<double, 3>>& coeffs, double constant = 0);
// n = 3: sum over rows {l, m, c} of c * Y_lm with orthonormal real harmonics.
BoundaryData boundary_sphharm(const std::vector<std::array<double, 3>>& terms, double constant = 0);
BoundaryData boundary_const(int n, double c);
// Trace of u* = -R w_hat + b.xi + c; `exact` is set.
BoundaryData boundary_hyperboloid(double R, const Vec& b, double c);
// CSV: n = 2 rows "theta,value"; n = 3 rows "x,y,z,value". A header line is allowed.
BoundaryData boundary_tabulated(int n, const std::string& path);

double real_sph_harm(int l, int m, const Vec& dir);

}  // namespace mink
