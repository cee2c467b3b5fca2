#include "doctest.h"
#include "mink/errors.hpp"
#include "mink/geometry.hpp"
#include "mink/grid.hpp"
#include "mink/legendre.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

using namespace mink;

namespace {

PrimalJet hyperboloid_jet(const Vec& x, double R) {
    PrimalJet j;
    j.x = x;
    j.u = std::sqrt(R * R + x.squaredNorm());
    j.Du = x / j.u;
    j.D2u = (Mat::Identity(x.size(), x.size()) - j.Du * j.Du.transpose()) / j.u;
    return j;
}

DualJet dual_hyperboloid_jet(const Vec& xi, double R, const Vec& b, double c) {
    const double w = std::sqrt(1 - xi.squaredNorm());
    DualJet j;
    j.xi = xi;
    j.ustar = -R * w + b.dot(xi) + c;
    j.Dustar = R * xi / w + b;
    j.D2ustar = R * (Mat::Identity(xi.size(), xi.size()) / w + xi * xi.transpose() / (w * w * w));
    return j;
}

Vec random_ball(std::mt19937_64& rng, int n, double rmax) {
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> U(0, 1);
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = g(rng);
    return v.normalized() * rmax * std::pow(U(rng), 1.0 / n);
}

DualJet random_dual_jet(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> g;
    DualJet j;
    j.xi = random_ball(rng, n, 0.9);
    j.ustar = g(rng);
    j.Dustar = Vec::NullaryExpr(n, [&] { return g(rng); });
    Mat Q = Mat::NullaryExpr(n, n, [&] { return g(rng); });
    j.D2ustar = Q * Q.transpose() + 0.2 * Mat::Identity(n, n);
    return j;
}

}  // namespace

TEST_CASE("lorentz_dot") {
    Vec E = Vec::Zero(4);
    E[3] = 1;
    CHECK(lorentz_dot(E, E) == -1.0);
    Vec X = Vec::Unit(4, 0);
    CHECK(lorentz_dot(X, X) == 1.0);
    CHECK(lorentz_dot(X + E, X + E) == 0.0);
    CHECK_THROWS_AS(lorentz_dot(X, Vec::Zero(3)), DomainError);
}

TEST_CASE("primal curvatures") {
    std::mt19937_64 rng(11);
    for (double R : {0.5, 1.0, 3.0})
        for (int t = 0; t < 20; ++t) {
            const int n = 2 + t % 4;
            Vec x = random_ball(rng, n, 5.0);
            Vec k = primal_curvatures(hyperboloid_jet(x, R));
            for (int i = 0; i < n; ++i) CHECK(std::abs(k[i] - 1 / R) < 1e-12);
            Vec nu = unit_normal(hyperboloid_jet(x, R));
            CHECK(std::abs(lorentz_dot(nu, nu) + 1) < 1e-12);
        }
    PrimalJet q{Vec::Zero(3), 0.0, Vec::Zero(3), Mat::Identity(3, 3)};
    CHECK((primal_curvatures(q) - Vec::Ones(3)).norm() < 1e-15);

    std::normal_distribution<double> g;
    for (int t = 0; t < 200; ++t) {
        const int n = 2 + t % 5;
        PrimalJet j;
        j.x = Vec::NullaryExpr(n, [&] { return g(rng); });
        j.Du = random_ball(rng, n, 0.95);
        Mat A = Mat::NullaryExpr(n, n, [&] { return g(rng); });
        j.D2u = A + A.transpose();
        const Mat gm = Mat::Identity(n, n) - j.Du * j.Du.transpose();
        const Mat W = gm.inverse() * j.D2u / std::sqrt(1 - j.Du.squaredNorm());
        Eigen::EigenSolver<Mat> es(W);
        std::vector<double> ev;
        for (int i = 0; i < n; ++i) ev.push_back(es.eigenvalues()[i].real());
        std::sort(ev.begin(), ev.end());
        Vec k = primal_curvatures(j);
        const double scale = std::max(1.0, k.cwiseAbs().maxCoeff());
        for (int i = 0; i < n; ++i) CHECK(std::abs(k[i] - ev[i]) < 1e-10 * scale);
    }
    PrimalJet bad{Vec::Zero(2), 0.0, Vec::Unit(2, 0), Mat::Identity(2, 2)};
    CHECK_THROWS_AS(primal_curvatures(bad), DomainError);
}

TEST_CASE("dual curvature radii") {
    std::mt19937_64 rng(12);
    for (int t = 0; t < 50; ++t) {
        const int n = 2 + t % 3;
        const double R = 0.5 + t * 0.1;
        DualJet j = dual_hyperboloid_jet(random_ball(rng, n, 0.99), R, Vec::Zero(n), 0.0);
        Mat M = dual_matrix(j.xi, j.D2ustar);
        CHECK((M - R * Mat::Identity(n, n)).norm() < 1e-11 * R / std::sqrt(1 - j.xi.squaredNorm()));
    }
    DualJet q{Vec::Zero(3), 0.0, Vec::Zero(3), Mat::Identity(3, 3)};
    CHECK((dual_curvature_radii(q) - Vec::Ones(3)).norm() < 1e-15);
    DualJet neg{Vec::Zero(2), 0.0, Vec::Zero(2), Mat(Vec::Constant(2, -1.0).asDiagonal())};
    CHECK(dual_curvature_radii(neg).maxCoeff() < 0);

    for (int t = 0; t < 500; ++t) {
        const int n = 2 + t % 4;
        DualJet dj = random_dual_jet(rng, n);
        PrimalJet pj = legendre_pointwise(dj);
        Vec lam = dual_curvature_radii(dj);
        Vec inv = lam.cwiseInverse();
        std::sort(inv.data(), inv.data() + n);
        Vec k = primal_curvatures(pj);
        CHECK((k - inv).cwiseAbs().maxCoeff() < 1e-8 * k.cwiseAbs().maxCoeff());
        // sigma_{n-1}(kappa) = 1 <=> f(lambda*) = 1, on the rescaled jet
        const double s = std::pow(sigma(k, n - 1), 1.0 / (n - 1));
        CHECK(std::abs(f_quotient(lam) * s - 1.0) < 1e-10);
    }
}

TEST_CASE("gauss map and support function") {
    std::mt19937_64 rng(13);
    PrimalJet z{Vec::Zero(2), 0.3, Vec::Zero(2), Mat::Identity(2, 2)};
    CHECK(gauss_map(z).norm() == 0.0);
    Vec x(2);
    x << 1.5, -0.5;
    PrimalJet h = hyperboloid_jet(x, 2.0);
    CHECK((gauss_map(h) - x / std::sqrt(4 + x.squaredNorm())).norm() < 1e-15);
    CHECK(support_function(hyperboloid_jet(Vec::Zero(3), 1.0)) == doctest::Approx(-1.0));
    Vec a(2);
    a << 0.3, 0.4;
    PrimalJet aff{x, a.dot(x), a, Mat::Zero(2, 2)};
    CHECK(std::abs(support_function(aff)) < 1e-15);
    for (int t = 0; t < 100; ++t) {
        DualJet dj = random_dual_jet(rng, 2 + t % 3);
        PrimalJet pj = legendre_pointwise(dj);
        const double w = std::sqrt(1 - dj.xi.squaredNorm());
        CHECK(std::abs(support_function(pj) * w - dj.ustar) < 1e-12 * (1 + std::abs(dj.ustar) + pj.x.norm()));
    }
}

TEST_CASE("legendre pointwise") {
    DualJet self{Vec::Constant(2, 0.3), 0.09, Vec::Constant(2, 0.3), Mat::Identity(2, 2)};
    PrimalJet p = legendre_pointwise(self);
    CHECK(p.u == doctest::Approx(0.09));
    CHECK((p.D2u - Mat::Identity(2, 2)).norm() < 1e-15);

    std::mt19937_64 rng(14);
    for (int t = 0; t < 50; ++t) {
        const int n = 2 + t % 3;
        Vec xi = random_ball(rng, n, 0.95);
        Vec b = Vec::Zero(n);
        if (t % 2) b = random_ball(rng, n, 1.0);
        const double R = t % 2 ? 1.7 : 1.0, c = t % 2 ? 0.4 : 0.0;
        PrimalJet q = legendre_pointwise(dual_hyperboloid_jet(xi, R, b, c));
        CHECK(q.u == doctest::Approx(std::sqrt(R * R + (q.x - b).squaredNorm()) - c).epsilon(1e-12));
        CHECK((q.Du - xi).norm() == 0.0);
    }
    for (int t = 0; t < 200; ++t) {
        DualJet dj = random_dual_jet(rng, 2 + t % 4);
        DualJet back = legendre_pointwise(legendre_pointwise(dj));
        CHECK((back.xi - dj.xi).norm() == 0.0);
        CHECK((back.Dustar - dj.Dustar).norm() == 0.0);
        CHECK(std::abs(back.ustar - dj.ustar) < 1e-12 * (1 + std::abs(dj.ustar) + dj.Dustar.norm()));
        CHECK((back.D2ustar - dj.D2ustar).norm() < 1e-10 * dj.D2ustar.norm());
    }
    DualJet sing{Vec::Zero(2), 0.0, Vec::Zero(2), Mat::Zero(2, 2)};
    CHECK_THROWS_AS(legendre_pointwise(sing), DegenerateTransformError);
}

TEST_CASE("ball stencil") {
    for (int n : {2, 3}) {
        const double h = n == 2 ? 1.0 / 16 : 1.0 / 8;
        MaskedGridField f = MaskedGridField::ball(n, h, 0.8);
        CHECK(f.inside(f.node({0, 0, 0})));
        BallStencil st(f);
        CHECK(st.directions() == n * n);
        for (const Vec& p : st.boundary_points()) CHECK(std::abs(p.norm() - 0.8) < 1e-14);
        // quadratics are reproduced exactly by every stencil
        Mat Q(n, n);
        Q.setIdentity();
        Q(0, 1) = Q(1, 0) = 0.3;
        Vec b = Vec::LinSpaced(n, 0.2, -0.4);
        auto fq = [&](const Vec& x) { return 0.5 * x.dot(Q * x) + b.dot(x) + 1.0; };
        for (long u = 0; u < st.unknowns(); ++u) f.values[st.nodes()[u]] = fq(f.position(st.nodes()[u]));
        const Vec x = st.gather(f), bv = st.boundary_values(fq);
        long full = 0;
        for (long u = 0; u < st.unknowns(); ++u) {
            full += st.full(u);
            CHECK((st.hessian(u, x, bv) - Q).norm() < 1e-9);
            const Vec p = f.position(st.nodes()[u]);
            CHECK((st.gradient(u, x, bv) - (Q * p + b)).norm() < 1e-11);
        }
        CHECK(full > 0);
        CHECK(full < st.unknowns());
    }
}

TEST_CASE("dual field to primal cloud") {
    const double R = 2.0, h = 1.0 / 32;
    double err_prev = 0;
    for (int level = 0; level < 2; ++level) {
        const double hh = h / (1 << level);
        MaskedGridField f = MaskedGridField::ball(2, hh, 0.8);
        f.boundary = [&](const Vec& xi) { return -R * std::sqrt(1 - xi.squaredNorm()); };
        for (long i = 0; i < f.size(); ++i)
            if (f.mask[i]) f.values[i] = f.boundary(f.position(i));
        PrimalCloud c = dual_field_to_primal_cloud(f);
        CHECK(c.flagged == 0);
        double err = 0;
        for (const auto& p : c.points) {
            err = std::max(err, std::abs(p.u - std::sqrt(R * R + p.x.squaredNorm())));
            CHECK(p.Du.norm() < 1.0);
            CHECK(std::abs(p.residual) < 0.05);
        }
        CHECK(err < 40 * hh * hh);
        if (level) CHECK(err < 0.4 * err_prev);
        err_prev = err;
        std::ostringstream os;
        write_cloud_csv(c, 2, os);
        CHECK(os.str().rfind("x1,x2,u,kappa_1,kappa_2,residual\n", 0) == 0);
    }
    MaskedGridField aff = MaskedGridField::ball(2, 1.0 / 8, 0.5);
    aff.boundary = [](const Vec& xi) { return 0.2 * xi[0] - xi[1]; };
    for (long i = 0; i < aff.size(); ++i) aff.values[i] = aff.boundary(aff.position(i));
    PrimalCloud c = dual_field_to_primal_cloud(aff);
    CHECK(c.points.empty());
    CHECK(c.flagged == static_cast<long>(aff.masked_nodes().size()));
}

TEST_CASE("conjugate bruteforce") {
    MaskedGridField f = MaskedGridField::ball(2, 0.125, 2.0);
    for (long i = 0; i < f.size(); ++i) f.values[i] = 0.5 * f.position(i).squaredNorm();
    Vec xi(2);
    xi << 0.25, -0.5;
    CHECK(conjugate_bruteforce(f, xi) == doctest::Approx(0.5 * xi.squaredNorm()));
    for (long i = 0; i < f.size(); ++i) f.values[i] = std::sqrt(1 + f.position(i).squaredNorm());
    CHECK(conjugate_bruteforce(f, Vec::Zero(2)) == -1.0);
    MaskedGridField g = MaskedGridField::ball(2, 0.125, 3.0);
    for (long i = 0; i < g.size(); ++i) g.values[i] = std::sqrt(1 + g.position(i).squaredNorm());
    Vec q(2);
    q << 0.6, 0.3;
    CHECK(conjugate_bruteforce(g, q) >= conjugate_bruteforce(f, q));
    // oracle vs pointwise transform of the analytic field
    const double exact = -std::sqrt(1 - q.squaredNorm());
    CHECK(std::abs(conjugate_bruteforce(g, q) - exact) <= 2 * 0.125 * 2);
}
