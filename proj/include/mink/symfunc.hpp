#pragma once

#include <Eigen/Dense>

#include <initializer_list>
#include <span>
#include <vector>

namespace mink {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// A curvature vector is a plain Eigen vector; cone membership is a property
// checked with gaarding_test rather than a stored tag.
using CurvatureVector = Vec;
using SymMatrix = Mat;

// Indices are 0-based throughout the C++ API.
double sigma(const Vec& lam, int k, std::span<const int> excl);
double sigma(const Vec& lam, int k, std::initializer_list<int> excl = {});

// sigma_0 .. sigma_m of the entries outside excl (m = number of retained entries).
std::vector<double> sigma_all(const Vec& lam, std::span<const int> excl = {});

Vec sigma_grad(const Vec& lam, int k);
Mat sigma_hess(const Vec& lam, int k);

bool gaarding_test(const Vec& lam, int k);

// (sigma_n / sigma_1)^(1/(n-1)) of the curvature radii.
double f_quotient(const Vec& lamstar);
Vec f_quotient_grad(const Vec& lamstar);

// F^{pq} = sum_i f_i v_i v_i^T at the eigen-decomposition of M.
Mat f_matrix_derivative(const Mat& M);

// Eigenvalues ascending; throws DomainError when M is not finite.
Vec sym_eigenvalues(const Mat& M);

}  // namespace mink
