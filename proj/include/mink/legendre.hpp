#pragma once

#include "mink/geometry.hpp"
#include "mink/grid.hpp"

#include <iosfwd>
#include <vector>

namespace mink {

// Dual jet -> primal jet: x = Du*, u = xi.Du* - u*, Du = xi, D2u = (D2u*)^{-1}.
PrimalJet legendre_pointwise(const DualJet& j);
// Primal jet -> dual jet, the same formulas read the other way.
DualJet legendre_pointwise(const PrimalJet& j);

struct CloudPoint {
    long node = -1;
    bool interior = false;  // full stencil at the node
    Vec xi;
    Vec x;
    double u = 0;
    Vec Du;
    Mat D2u;
    Vec kappa;
    double residual = 0;  // sigma_{n-1}(kappa) - 1
};

struct PrimalCloud {
    std::vector<CloudPoint> points;
    long flagged = 0;  // nodes dropped as non-convex
};

// Derivatives come from the Shortley-Weller stencils. Nodes next to the
// sphere need f.boundary; without it only full-stencil nodes are mapped.
PrimalCloud dual_field_to_primal_cloud(const MaskedGridField& f);

// Columns: x1..xn, u, kappa_1..kappa_n, residual
void write_cloud_csv(const PrimalCloud& c, int n, std::ostream& os);

// max over masked nodes of x.xi - u(x)
double conjugate_bruteforce(const MaskedGridField& f, const Vec& xi);

}  // namespace mink
