#pragma once

#include "mink/boundary.hpp"
#include "mink/grid.hpp"

#include <Eigen/SparseCore>

#include <optional>
#include <string>
#include <vector>

namespace mink {

struct SolverConfig {
    std::vector<double> r_schedule;
    double h = 1.0 / 64;
    double newton_tol = 1e-9;
    int max_iters = 50;
    double shrink = 0.5;
    double min_step = 1.0 / 1024;
    double eps_rel = 1e-10;  // convexity floor relative to trace(M)/n
    std::optional<double> A;
    int threads = 0;
};

struct IterationLog {
    int iter = 0;
    double residual = 0;  // sup |G| before the step
    double step = 0;      // accepted step length, 0 on the final entry
    double min_eig = 0;   // smallest eigenvalue of M over the mask
};

struct SolveResult {
    MaskedGridField field;
    std::vector<IterationLog> log;
    bool converged = false;
    bool warm_started = false;
    double r = 0;
    double A_used = 0;
    std::string message;

    int iterations() const { return log.empty() ? 0 : static_cast<int>(log.size()) - 1; }
    double final_residual() const { return log.empty() ? 0 : log.back().residual; }
};

double default_A(const BoundaryData& phi);

// Discrete harmonic extension of phi into the masked ball; boundary set to phi.
MaskedGridField extend_boundary(const BoundaryData& phi, const MaskedGridField& grid);

// -A w_hat + phi_ext. A is doubled until the discrete Hessian is PD on the
// mask; more than ten doublings raise InitializationError.
MaskedGridField initial_guess(const MaskedGridField& phi_ext, double A, double* A_used = nullptr);

// G = (log sigma_n(M) - log sigma_1(M)) / (n-1) on masked nodes, 0 elsewhere.
MaskedGridField residual(const MaskedGridField& f);

// Jacobian of G with respect to the masked nodal values, ordered as BallStencil::nodes().
Eigen::SparseMatrix<double> linearize(const MaskedGridField& f);

SolveResult newton_solve(const BoundaryData& phi, double r, const SolverConfig& cfg,
                         const MaskedGridField* warm_start = nullptr);

// Stops after the first non-converged radius; that result is the last entry.
std::vector<SolveResult> continuation_solve(const BoundaryData& phi, const SolverConfig& cfg);

// -n^{1/(n-1)} w_hat + a.xi + c
double special_subsolution(const Vec& xi, const Vec& a, double c);

}  // namespace mink
