#include "mink/legendre.hpp"

#include "mink/errors.hpp"
#include "mink/parallel.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace mink {

namespace {

Mat inverse_pd(const Mat& H) {
    if (!H.allFinite()) throw DegenerateTransformError("legendre: non-finite Hessian");
    Eigen::SelfAdjointEigenSolver<Mat> es(H);
    if (es.info() != Eigen::Success) throw DegenerateTransformError("legendre: eigensolve failed");
    const Vec& ev = es.eigenvalues();
    if (!(ev.minCoeff() > 1e-12 * std::max(1.0, ev.cwiseAbs().maxCoeff())))
        throw DegenerateTransformError("legendre: Hessian not positive definite");
    const Mat& V = es.eigenvectors();
    Mat inv = V * ev.cwiseInverse().asDiagonal() * V.transpose();
    return 0.5 * (inv + inv.transpose());
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

PrimalJet legendre_pointwise(const DualJet& j) {
    const long n = j.xi.size();
    if (j.Dustar.size() != n || j.D2ustar.rows() != n || j.D2ustar.cols() != n)
        throw DomainError("legendre: inconsistent dimensions");
    PrimalJet p;
    p.x = j.Dustar;
    p.u = j.xi.dot(j.Dustar) - j.ustar;
    p.Du = j.xi;
    p.D2u = inverse_pd(j.D2ustar);
    return p;
}

DualJet legendre_pointwise(const PrimalJet& j) {
    const long n = j.x.size();
    if (j.Du.size() != n || j.D2u.rows() != n || j.D2u.cols() != n)
        throw DomainError("legendre: inconsistent dimensions");
    DualJet d;
    d.xi = j.Du;
    d.ustar = j.x.dot(j.Du) - j.u;
    d.Dustar = j.x;
    d.D2ustar = inverse_pd(j.D2u);
    return d;
}

PrimalCloud dual_field_to_primal_cloud(const MaskedGridField& f) {
    BallStencil st(f);
    const Vec x = st.gather(f);
    const bool has_bdry = static_cast<bool>(f.boundary);
    const Vec bv = has_bdry ? st.boundary_values(f.boundary) : Vec::Zero(st.boundary_points().size());
    const long m = st.unknowns();
    std::vector<CloudPoint> pts(m);
    std::vector<char> ok(m, 0);
    parallel_for(m, [&](long u) {
        if (!has_bdry && !st.full(u)) return;
        DualJet dj;
        dj.xi = f.position(st.nodes()[u]);
        dj.ustar = x[u];
        dj.Dustar = st.gradient(u, x, bv);
        dj.D2ustar = st.hessian(u, x, bv);
        PrimalJet pj;
        try {
            pj = legendre_pointwise(dj);
        } catch (const DegenerateTransformError&) {
            return;
        }
        CloudPoint& c = pts[u];
        c.node = st.nodes()[u];
        c.interior = st.full(u);
        c.xi = dj.xi;
        c.x = pj.x;
        c.u = pj.u;
        c.Du = pj.Du;
        c.D2u = pj.D2u;
        c.kappa = primal_curvatures(pj);
        c.residual = sigma(c.kappa, f.n - 1) - 1.0;
        ok[u] = 1;
    });
    PrimalCloud out;
    for (long u = 0; u < m; ++u) {
        if (ok[u])
            out.points.push_back(std::move(pts[u]));
        else if (has_bdry || st.full(u))
            ++out.flagged;
    }
    return out;
}

void write_cloud_csv(const PrimalCloud& c, int n, std::ostream& os) {
    for (int i = 1; i <= n; ++i) os << 'x' << i << ',';
    os << 'u';
    for (int i = 1; i <= n; ++i) os << ",kappa_" << i;
    os << ",residual\n";
    for (const auto& p : c.points) {
        for (int i = 0; i < n; ++i) os << fmt17(p.x[i]) << ',';
        os << fmt17(p.u);
        for (int i = 0; i < n; ++i) os << ',' << fmt17(p.kappa[i]);
        os << ',' << fmt17(p.residual) << '\n';
    }
}

double conjugate_bruteforce(const MaskedGridField& f, const Vec& xi) {
    double best = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (long i = 0; i < f.size(); ++i) {
        if (!f.mask[i]) continue;
        any = true;
        best = std::max(best, f.position(i).dot(xi) - f.values[i]);
    }
    if (!any) throw DomainError("conjugate_bruteforce: empty mask");
    return best;
}

}  // namespace mink
