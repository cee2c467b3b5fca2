#include "mink/geometry.hpp"

#include "mink/errors.hpp"

#include <cmath>

namespace mink {

namespace {

void check_primal(const PrimalJet& j) {
    const long n = j.x.size();
    if (n < 1 || j.Du.size() != n || j.D2u.rows() != n || j.D2u.cols() != n)
        throw DomainError("primal jet: inconsistent dimensions");
    if (!(j.Du.norm() < 1.0 - 1e-12)) throw DomainError("primal jet: not spacelike (|Du| >= 1)");
}

void check_dual(const DualJet& j) {
    const long n = j.xi.size();
    if (n < 1 || j.D2ustar.rows() != n || j.D2ustar.cols() != n) throw DomainError("dual jet: inconsistent dimensions");
    if (!(j.xi.norm() < 1.0)) throw DomainError("dual jet: xi outside the unit ball");
}

}  // namespace

double lorentz_dot(const Vec& X, const Vec& Y) {
    if (X.size() != Y.size() || X.size() < 2) throw DomainError("lorentz_dot: length mismatch");
    const long n = X.size() - 1;
    return X.head(n).dot(Y.head(n)) - X[n] * Y[n];
}

double w_hat(const Vec& xi) {
    const double s = 1.0 - xi.squaredNorm();
    if (!(s > 0.0)) throw DomainError("w_hat: |xi| >= 1");
    return std::sqrt(s);
}

Mat gamma_star(const Vec& xi) {
    const double w = w_hat(xi);
    return Mat::Identity(xi.size(), xi.size()) - xi * xi.transpose() / (1.0 + w);
}

Mat dual_matrix(const Vec& xi, const Mat& D2ustar) {
    const Mat g = gamma_star(xi);
    Mat M = w_hat(xi) * g * D2ustar * g;
    return 0.5 * (M + M.transpose());
}

Vec unit_normal(const PrimalJet& j) {
    check_primal(j);
    const long n = j.x.size();
    const double w = std::sqrt(1.0 - j.Du.squaredNorm());
    Vec nu(n + 1);
    nu.head(n) = j.Du / w;
    nu[n] = 1.0 / w;
    return nu;
}

Vec primal_curvatures(const PrimalJet& j) {
    check_primal(j);
    const long n = j.x.size();
    const double wp = std::sqrt(1.0 - j.Du.squaredNorm());
    // g = I - Du Du^T, g^{-1/2} = I + Du Du^T / (wp (1 + wp))
    const Mat gi = Mat::Identity(n, n) + j.Du * j.Du.transpose() / (wp * (1.0 + wp));
    const Mat h = j.D2u / wp;
    Mat W = gi * h * gi;
    W = 0.5 * (W + W.transpose()).eval();
    return sym_eigenvalues(W);
}

Vec dual_curvature_radii(const DualJet& j) {
    check_dual(j);
    return sym_eigenvalues(dual_matrix(j.xi, j.D2ustar));
}

Vec gauss_map(const PrimalJet& j) {
    check_primal(j);
    return j.Du;
}

double support_function(const PrimalJet& j) {
    check_primal(j);
    return (j.x.dot(j.Du) - j.u) / std::sqrt(1.0 - j.Du.squaredNorm());
}

}  // namespace mink
