#pragma once

#include "mink/symfunc.hpp"

namespace mink {

// Graph x_{n+1} = u(x) in R^{n,1}, jet at one point.
struct PrimalJet {
    Vec x;
    double u = 0;
    Vec Du;
    Mat D2u;
};

// Legendre dual picture on the open unit ball.
struct DualJet {
    Vec xi;
    double ustar = 0;
    Vec Dustar;
    Mat D2ustar;
};

double lorentz_dot(const Vec& X, const Vec& Y);

// sqrt(1 - |xi|^2)
double w_hat(const Vec& xi);
// gamma*_{ik} = delta_ik - xi_i xi_k / (1 + w_hat)
Mat gamma_star(const Vec& xi);
// M = w_hat gamma* H gamma*
Mat dual_matrix(const Vec& xi, const Mat& D2ustar);

// Future-directed unit normal (Du, 1) / sqrt(1 - |Du|^2).
Vec unit_normal(const PrimalJet& j);

// Ascending principal curvatures via g^{-1/2} h g^{-1/2}.
Vec primal_curvatures(const PrimalJet& j);

// Ascending eigenvalues of M; negative entries mean the dual Hessian is not PD.
Vec dual_curvature_radii(const DualJet& j);

Vec gauss_map(const PrimalJet& j);
double support_function(const PrimalJet& j);

}  // namespace mink
