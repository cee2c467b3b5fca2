#pragma once

#include "mink/boundary.hpp"
#include "mink/solver.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mink {

// ---- randomized identity suite ----

struct IdentityConfig {
    int n_min = 3;
    int n_max = 8;
    long trials = 10000;  // per identity and per n
    std::uint64_t seed = 0xC0FFEE;
    double tol = 1e-11;
    bool self_test = false;  // corrupts one oracle; the suite must then fail
    int threads = 0;
};

struct IdentityResult {
    std::string name;
    long trials = 0;
    double max_residual = 0;
    bool pass = true;
    Vec witness;  // lambda of the worst trial
    int witness_n = 0;
};

std::vector<IdentityResult> identity_suite(const IdentityConfig& cfg);

// ---- reduced inequality ----

struct InequalityReport {
    int n = 0;
    long trials = 0;
    std::uint64_t seed = 0;
    double worst_value = 0;     // min of h^T R h / (|h|^T |R| |h|)
    double worst_identity = 0;  // max rel gap between the two evaluations
    long violations = 0;
    Vec witness_lambda;
    Vec witness_h;
    bool pass() const { return violations == 0; }
};

InequalityReport inequality_certify(int n, long trials, std::uint64_t seed, int threads = 0);

// ---- solution checks ----

struct PointRecord {
    long node = -1;
    bool interior = false;
    Vec xi;
    Vec kappa;  // ascending; 1 / eigenvalues of M
    double sigma = 0;
    double residual = 0;
};

struct SupportBound {
    double d1 = 0;
    double d2 = 0;
    double shift = 0;
    long points = 0;
    bool ok = false;
};

struct AngularCheck {
    double max = 0;
    double reference = 0;  // |phi|_{C1} + n^{1/(n-1)}; reported only
};

struct BarrierCheck {
    double c = 0;
    double worst = 0;  // max over nodes of barrier - u*
    double tol = 0;
    bool ok = false;
};

struct MaxPrinciple {
    double max_ustar = 0;
    double max_phi = 0;
    bool ok = false;
};

struct Consistency {
    double max_diff = 0;
    double tol = 0;
    long matched = 0;
    bool ok = false;
};

struct CurvatureReport {
    bool valid = false;
    std::string note;
    std::string phi_tag;
    int n = 0;
    double r = 0;
    double h = 0;
    std::vector<PointRecord> points;
    long interior_points = 0;
    long nonconvex_nodes = 0;
    double min_kappa = 0;
    double max_kappa = 0;
    double max_residual = 0;
    bool convex = false;
    SupportBound support;
    AngularCheck angular;
    BarrierCheck barrier;
    MaxPrinciple max_principle;
    Consistency consistency;
};

// Curvatures and residual only; aggregates over full-stencil nodes.
CurvatureReport curvature_report(const SolveResult& sol);

SupportBound support_bound_check(const SolveResult& sol);
AngularCheck angular_derivative_check(const SolveResult& sol, const BoundaryData& phi);
BarrierCheck barrier_check(const SolveResult& sol, const BoundaryData& phi);
MaxPrinciple max_principle_check(const SolveResult& sol);
Consistency dual_primal_consistency(const SolveResult& sol);

// curvature_report plus every check above.
CurvatureReport verify_solution(const SolveResult& sol, const BoundaryData& phi);

struct Stability {
    std::vector<double> r;
    std::vector<double> max_kappa;
    double rel_change = 0;  // between the last two radii
    bool stable = false;
};

Stability boundedness_track(const std::vector<CurvatureReport>& reports, double threshold = 0.15);

std::string phi_tag(const BoundaryData& phi);

}  // namespace mink
