#include "doctest.h"
#include "mink/errors.hpp"
#include "mink/geometry.hpp"
#include "mink/solver.hpp"

#include <cmath>
#include <random>

using namespace mink;

namespace {

double sup_masked(const MaskedGridField& f, const std::function<double(const Vec&)>& ref) {
    double e = 0;
    for (long i : f.masked_nodes()) e = std::max(e, std::abs(f.values[i] - ref(f.position(i))));
    return e;
}

MaskedGridField sampled(int n, double h, double r, const std::function<double(const Vec&)>& fn) {
    MaskedGridField f = MaskedGridField::ball(n, h, r);
    for (long i : f.masked_nodes()) f.values[i] = fn(f.position(i));
    f.boundary = fn;
    return f;
}

double rbar(int n) { return std::pow(static_cast<double>(n), 1.0 / (n - 1)); }

}  // namespace

TEST_CASE("extend_boundary reproduces harmonic data") {
    const MaskedGridField g = MaskedGridField::ball(2, 1.0 / 32, 0.9);
    const MaskedGridField c = extend_boundary(boundary_const(2, 0.7), g);
    CHECK(sup_masked(c, [](const Vec&) { return 0.7; }) < 1e-12);

    Vec b(2);
    b << 0.3, -0.4;
    BoundaryData linear;
    linear.n = 2;
    linear.kind = "linear";
    linear.eval = [&](const Vec& x) { return b.dot(x) + 0.1; };
    finalize_boundary(linear);
    const MaskedGridField lin = extend_boundary(linear, g);
    CHECK(sup_masked(lin, [&](const Vec& x) { return b.dot(x) + 0.1; }) < 1e-10);

    // sin 2theta extends to (rho / r)^2 sin 2theta = 2 x y / r^2, a quadratic the stencil reproduces
    const MaskedGridField s = extend_boundary(boundary_fourier({{2, 1.0, 0}}), g);
    CHECK(sup_masked(s, [](const Vec& x) { return 2 * x[0] * x[1] / 0.81; }) < 1e-9);

    const MaskedGridField g3 = MaskedGridField::ball(3, 1.0 / 8, 0.9);
    Vec b3(3);
    b3 << 0.1, 0.2, -0.3;
    BoundaryData linear3;
    linear3.n = 3;
    linear3.kind = "linear";
    linear3.eval = [&](const Vec& x) { return b3.dot(x); };
    finalize_boundary(linear3);
    const MaskedGridField lin3 = extend_boundary(linear3, g3);
    CHECK(sup_masked(lin3, [&](const Vec& x) { return b3.dot(x); }) < 1e-10);
}

TEST_CASE("initial_guess") {
    for (int n : {2, 3}) {
        const double h = n == 2 ? 1.0 / 32 : 1.0 / 8;
        const MaskedGridField g = MaskedGridField::ball(n, h, 0.9);
        const MaskedGridField ext = extend_boundary(boundary_const(n, 0.0), g);
        double used = 0;
        const MaskedGridField u = initial_guess(ext, rbar(n), &used);
        CHECK(used == rbar(n));
        CHECK(sup_masked(u, [&](const Vec& x) { return -rbar(n) * w_hat(x); }) < 1e-14);
        const long o = u.nearest_node(Vec::Zero(n));
        CHECK(u.values[o] == doctest::Approx(-rbar(n)));
    }
    // value at the origin is -A + phi_ext(0)
    const MaskedGridField g = MaskedGridField::ball(2, 1.0 / 32, 0.9);
    const MaskedGridField ext = extend_boundary(boundary_fourier({{2, 0.3, 0}}, 0.25), g);
    const long o = ext.nearest_node(Vec::Zero(2));
    const MaskedGridField u = initial_guess(ext, 3.0);
    CHECK(u.values[o] == doctest::Approx(-3.0 + ext.values[o]).epsilon(1e-14));

    // strongly saddle-shaped data forces doublings, which stay within 2^10
    const MaskedGridField big = extend_boundary(boundary_fourier({{2, 20.0, 0}}), g);
    double used = 0;
    initial_guess(big, 0.5, &used);
    CHECK(used > 0.5);
    CHECK(used <= 0.5 * 1024);
}

TEST_CASE("residual of the dual hyperboloid") {
    for (int n : {2, 3}) {
        const double h = n == 2 ? 1.0 / 64 : 1.0 / 16;
        for (double R : {1.0, rbar(n), 3.0}) {
            const MaskedGridField f = sampled(n, h, 0.9, [&](const Vec& x) { return -R * w_hat(x); });
            const MaskedGridField G = residual(f);
            const BallStencil st(f);
            const double expect = std::log(R) - std::log(static_cast<double>(n)) / (n - 1);
            double e = 0;
            for (long u = 0; u < st.unknowns(); ++u)
                if (st.full(u)) e = std::max(e, std::abs(G.values[st.nodes()[u]] - expect));
            CHECK(e < 20 * h * h);
            if (R == rbar(n)) CHECK(std::abs(expect) < 1e-15);
        }
    }
    // M scales with t, so G shifts by log t exactly
    const MaskedGridField f = sampled(2, 1.0 / 32, 0.9, [](const Vec& x) { return -2 * w_hat(x) + 0.1 * x[0] * x[1]; });
    MaskedGridField g = f;
    for (auto& v : g.values) v *= 2.5;
    g.boundary = [&](const Vec& x) { return 2.5 * f.boundary(x); };
    const MaskedGridField a = residual(f), b = residual(g);
    double e = 0;
    for (long i : f.masked_nodes()) e = std::max(e, std::abs(b.values[i] - a.values[i] - std::log(2.5)));
    CHECK(e < 1e-11);
}

TEST_CASE("linearize matches central differences") {
    for (int n : {2, 3}) {
        const double h = n == 2 ? 1.0 / 32 : 1.0 / 8;
        const MaskedGridField f =
            sampled(n, h, 0.9, [&](const Vec& x) { return -1.7 * w_hat(x) + 0.2 * x[0] * x[1] + 0.1 * x[0]; });
        const BallStencil st(f);
        const auto J = linearize(f);
        CHECK(J.rows() == st.unknowns());
        std::mt19937_64 rng(31 + n);
        std::normal_distribution<double> gauss;
        const double eps = 1e-7;
        for (int t = 0; t < 10; ++t) {
            Vec v(st.unknowns());
            for (auto& x : v) x = gauss(rng);
            v /= v.cwiseAbs().maxCoeff();
            MaskedGridField p = f, m = f;
            for (long u = 0; u < st.unknowns(); ++u) {
                p.values[st.nodes()[u]] += eps * v[u];
                m.values[st.nodes()[u]] -= eps * v[u];
            }
            const MaskedGridField gp = residual(p), gm = residual(m);
            Vec fd(st.unknowns());
            for (long u = 0; u < st.unknowns(); ++u) fd[u] = (gp.values[st.nodes()[u]] - gm.values[st.nodes()[u]]) / (2 * eps);
            const Vec jv = J * v;
            CHECK((jv - fd).norm() / jv.norm() < 1e-6);
        }
    }
}

TEST_CASE("linearization coefficients at -R w_hat are proportional to g") {
    // For a quadratic perturbation q the stencil is exact at full nodes, so
    // (J q)(node) = sum c_kl D2q_kl, which recovers the coefficient matrix c.
    const int n = 2;
    const double h = 1.0 / 64;
    const MaskedGridField f = sampled(n, h, 0.9, [&](const Vec& x) { return -rbar(n) * w_hat(x); });
    const BallStencil st(f);
    const auto J = linearize(f);
    auto apply = [&](const std::function<double(const Vec&)>& q) {
        Vec v(st.unknowns());
        for (long u = 0; u < st.unknowns(); ++u) v[u] = q(f.position(st.nodes()[u]));
        return Vec(J * v);
    };
    const Vec c00 = apply([](const Vec& x) { return 0.5 * x[0] * x[0]; });
    const Vec c11 = apply([](const Vec& x) { return 0.5 * x[1] * x[1]; });
    const Vec c01 = apply([](const Vec& x) { return 0.5 * x[0] * x[1]; });
    double worst = 0;
    long checked = 0;
    for (long u = 0; u < st.unknowns(); ++u) {
        if (!st.full(u)) continue;
        const Vec xi = f.position(st.nodes()[u]);
        Mat c(2, 2);
        c << c00[u], c01[u], c01[u], c11[u];
        const Mat gs = gamma_star(xi);
        const Mat g = gs * gs;
        const double mu = c.trace() / g.trace();
        CHECK(mu > 0);
        worst = std::max(worst, (c - mu * g).norm() / c.norm());
        ++checked;
    }
    CHECK(checked > 1000);
    CHECK(worst < 1e-2);
}

TEST_CASE("newton_solve on the dual hyperboloid") {
    Vec b(2);
    b << 0.1, -0.2;
    const BoundaryData phi = boundary_hyperboloid(2.0, b, 0.3);
    SolverConfig cfg;
    cfg.h = 1.0 / 64;
    const SolveResult s = newton_solve(phi, 0.9, cfg);
    CHECK(s.converged);
    CHECK(s.iterations() <= 12);
    CHECK(s.final_residual() <= cfg.newton_tol);
    CHECK(s.log.back().min_eig > 0);
    CHECK(sup_masked(s.field, phi.exact) < 2 * cfg.h * cfg.h);

    CHECK_THROWS_AS(newton_solve(phi, 1.0, cfg), ConfigError);
    cfg.A = -1.0;
    CHECK_THROWS_AS(newton_solve(phi, 0.9, cfg), ConfigError);
}

TEST_CASE("zero boundary data gives a radially symmetric solution") {
    SolverConfig cfg;
    cfg.h = 1.0 / 32;
    const SolveResult s = newton_solve(boundary_const(2, 0.0), 0.9, cfg);
    REQUIRE(s.converged);
    const MaskedGridField& f = s.field;
    double asym = 0;
    for (long i : f.masked_nodes()) {
        const auto idx = f.index(i);
        for (const std::array<int, 3>& img : {std::array<int, 3>{idx[1], idx[0], 0}, std::array<int, 3>{-idx[0], idx[1], 0},
                                              std::array<int, 3>{idx[0], -idx[1], 0}}) {
            const long j = f.node(img);
            REQUIRE(j >= 0);
            asym = std::max(asym, std::abs(f.values[i] - f.values[j]));
        }
    }
    CHECK(asym <= 1e-8);

    // the exact solutions are -2 w_hat + 2 sqrt(1 - r^2), so the drift between radii is a constant
    const SolveResult s7 = newton_solve(boundary_const(2, 0.0), 0.7, cfg);
    REQUIRE(s7.converged);
    const double expect = 2 * (std::sqrt(1 - 0.49) - std::sqrt(1 - 0.81));
    double worst = 0;
    for (long i : s7.field.masked_nodes())
        worst = std::max(worst, std::abs(s7.field.values[i] - f.values[f.nearest_node(s7.field.position(i))] - expect));
    CHECK(worst < 4 * cfg.h * cfg.h);
}

TEST_CASE("warm start and continuation") {
    const BoundaryData phi = boundary_fourier({{2, 0.3, 0}});
    SolverConfig cfg;
    cfg.h = 1.0 / 64;
    cfg.r_schedule = {0.5, 0.7, 0.9};
    const auto res = continuation_solve(phi, cfg);
    REQUIRE(res.size() == 3);
    for (const auto& s : res) {
        CHECK(s.converged);
        double umax = -1e300;
        for (long i : s.field.masked_nodes()) umax = std::max(umax, s.field.values[i]);
        CHECK(umax <= phi.max_value());
    }
    CHECK_FALSE(res[0].warm_started);
    CHECK(res[1].warm_started);

    const SolveResult cold = newton_solve(phi, 0.95, cfg);
    const SolveResult warm = newton_solve(phi, 0.95, cfg, &res[2].field);
    REQUIRE(cold.converged);
    REQUIRE(warm.converged);
    CHECK(warm.warm_started);
    CHECK(warm.iterations() < cold.iterations());

    // drift on B_0.5 between radii shrinks as r -> 1; both grids share the lattice
    auto drift = [](const MaskedGridField& a, const MaskedGridField& b) {
        double d = 0;
        for (long i : a.masked_nodes()) {
            const Vec x = a.position(i);
            if (x.norm() < 0.5) d = std::max(d, std::abs(a.values[i] - b.values[b.nearest_node(x)]));
        }
        return d;
    };
    CHECK(drift(res[2].field, warm.field) < drift(res[1].field, res[2].field));

    cfg.r_schedule = {0.9, 0.7};
    CHECK_THROWS_AS(continuation_solve(phi, cfg), ConfigError);
}

TEST_CASE("special_subsolution") {
    CHECK(special_subsolution(Vec::Zero(3), Vec::Zero(3), 0.0) == doctest::Approx(-std::sqrt(3.0)));
    CHECK(special_subsolution(Vec::Zero(2), Vec::Zero(2), 0.0) == doctest::Approx(-2.0));
    Vec a(2), xi(2);
    a << 0.4, -0.1;
    xi << 0.6, 0.8;
    CHECK(special_subsolution(xi, a, 0.2) == doctest::Approx(a.dot(xi) + 0.2).epsilon(1e-12));
}
