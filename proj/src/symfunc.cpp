#include "mink/symfunc.hpp"

#include "mink/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mink {

namespace {

void check_excl(const Vec& lam, std::span<const int> excl) {
    for (int i : excl) {
        if (i < 0 || i >= lam.size())
            throw DomainError("sigma: excluded index " + std::to_string(i) + " out of range");
    }
}

bool excluded(std::span<const int> excl, int i) {
    return std::find(excl.begin(), excl.end(), i) != excl.end();
}

}  // namespace

std::vector<double> sigma_all(const Vec& lam, std::span<const int> excl) {
    check_excl(lam, excl);
    // coefficients of prod (1 + lam_i t) over retained entries
    std::vector<double> e{1.0};
    for (int i = 0; i < lam.size(); ++i) {
        if (excluded(excl, i)) continue;
        e.push_back(0.0);
        for (size_t j = e.size() - 1; j > 0; --j) e[j] += lam[i] * e[j - 1];
    }
    return e;
}

double sigma(const Vec& lam, int k, std::span<const int> excl) {
    if (k < 0) throw DomainError("sigma: negative order");
    check_excl(lam, excl);
    std::vector<double> e(static_cast<size_t>(k) + 1, 0.0);
    e[0] = 1.0;
    for (int i = 0; i < lam.size(); ++i) {
        if (excluded(excl, i)) continue;
        for (int j = k; j > 0; --j) e[j] += lam[i] * e[j - 1];
    }
    return e[k];
}

double sigma(const Vec& lam, int k, std::initializer_list<int> excl) {
    return sigma(lam, k, std::span<const int>(excl.begin(), excl.size()));
}

Vec sigma_grad(const Vec& lam, int k) {
    const int n = static_cast<int>(lam.size());
    if (k < 1 || k > n) throw DomainError("sigma_grad: k out of range");
    Vec g(n);
    for (int p = 0; p < n; ++p) g[p] = sigma(lam, k - 1, {p});
    return g;
}

Mat sigma_hess(const Vec& lam, int k) {
    const int n = static_cast<int>(lam.size());
    if (k < 2 || k > n) throw DomainError("sigma_hess: k out of range");
    Mat H = Mat::Zero(n, n);
    for (int p = 0; p < n; ++p)
        for (int q = p + 1; q < n; ++q) H(p, q) = H(q, p) = sigma(lam, k - 2, {p, q});
    return H;
}

bool gaarding_test(const Vec& lam, int k) {
    const int n = static_cast<int>(lam.size());
    if (k < 1 || k > n) throw DomainError("gaarding_test: k out of range");
    auto e = sigma_all(lam);
    for (int m = 1; m <= k; ++m)
        if (!(e[m] > 0.0)) return false;
    return true;
}

double f_quotient(const Vec& lamstar) {
    const int n = static_cast<int>(lamstar.size());
    if (n < 2) throw DomainError("f_quotient: n < 2");
    auto e = sigma_all(lamstar);
    if (e[1] == 0.0) throw DomainError("f_quotient: sigma_1 = 0");
    const double q = e[n] / e[1];
    if (!(q > 0.0)) throw DomainError("f_quotient: nonpositive radicand");
    return std::pow(q, 1.0 / (n - 1));
}

Vec f_quotient_grad(const Vec& lamstar) {
    const int n = static_cast<int>(lamstar.size());
    const double f = f_quotient(lamstar);
    auto e = sigma_all(lamstar);
    Vec g(n);
    for (int i = 0; i < n; ++i)
        g[i] = f / (n - 1) * (sigma(lamstar, n - 1, {i}) / e[n] - 1.0 / e[1]);
    return g;
}

Vec sym_eigenvalues(const Mat& M) {
    if (!M.allFinite()) throw DomainError("eigenvalues: non-finite matrix");
    Eigen::SelfAdjointEigenSolver<Mat> es(M, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw DomainError("eigenvalues: decomposition failed");
    return es.eigenvalues();
}

Mat f_matrix_derivative(const Mat& M) {
    if (M.rows() != M.cols()) throw DomainError("f_matrix_derivative: not square");
    if (!M.allFinite()) throw DomainError("f_matrix_derivative: non-finite matrix");
    Eigen::SelfAdjointEigenSolver<Mat> es(M);
    if (es.info() != Eigen::Success) throw DomainError("f_matrix_derivative: decomposition failed");
    const Vec& ev = es.eigenvalues();
    if (!(ev.minCoeff() > 0.0)) throw DomainError("f_matrix_derivative: eigenvalue outside elliptic domain");
    const Vec f = f_quotient_grad(ev);
    const Mat& V = es.eigenvectors();
    return V * f.asDiagonal() * V.transpose();
}

}  // namespace mink
