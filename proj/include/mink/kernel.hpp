#pragma once

#include "mink/symfunc.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace mink {

// Matrices of the convexity argument, indexed by the entries other than the
// pivot. others[a] is the position in lam of row/column a.
struct KernelMatrices {
    int n = 0;
    int pivot = 0;
    Vec lam;
    std::vector<int> others;
    Mat T, S, A, B, C, R;
};

// sigma_{n-1}(lam) = 1 up to 1e-10 or its own rounding level, whichever is larger.
bool is_normalized(const Vec& lam);

// Position of the smallest entry; ties resolved towards the lower index.
int default_pivot(const Vec& lam);

// pivot < 0 selects default_pivot(lam).
KernelMatrices build_kernel(const Vec& lam, int pivot = -1);

// xi^T S xi from the coefficient formulas, without assembling S.
double quadratic_form_QS(const Vec& lam, const Vec& xi, int pivot = -1);

// (sigma_{n-2}(lam|pivot) * L1 from the derivative definition, h^T R h).
// h holds the third derivatives h_{jj1} for j != pivot, in the order of others.
std::pair<double, double> reduced_inequality_lhs(const Vec& lam, const Vec& h, int pivot = -1);

enum class MinorVariant { CMatrix, CCofactor, BMatrix, MixedRow, MixedTwoRows, SMatrix };

// indices: strictly increasing positions in lam, pivot excluded.
// CCofactor: (a, b) = deleted row and column, as positions within indices.
// MixedRow: a = row taken from A, or -1 for the sum over all rows.
// MixedTwoRows: a < b rows taken from A.
struct MinorIndex {
    std::vector<int> indices;
    MinorVariant variant = MinorVariant::CMatrix;
    int a = -1;
    int b = -1;
};

double minor_closed_form(const Vec& lam, const MinorIndex& idx, int pivot = -1);
double minor_bruteforce(const Vec& lam, const MinorIndex& idx, int pivot = -1);
// Hadamard bound of the matrices behind minor_bruteforce; the natural scale
// for comparing determinants that may vanish.
double minor_scale(const Vec& lam, const MinorIndex& idx, int pivot = -1);

// Sums over I_k (k-1 indices) and J_s subset of I_k (s-1 indices) of the
// B minors, the single mixed-row minors and the two-row mixed minors.
enum class SummedVariant { B, MixedRow, MixedTwoRows };
double summed_minor_closed_form(const Vec& lam, int k, int s, SummedVariant v, int pivot = -1);
double summed_minor_bruteforce(const Vec& lam, int k, int s, SummedVariant v, int pivot = -1);
double summed_minor_scale(const Vec& lam, int k, int s, SummedVariant v, int pivot = -1);

enum class MinorSumMethod { Bruteforce, Expansion };
// Sum of all m-th order principal minors of S.
double principal_minor_sum(const Vec& lam, int m, MinorSumMethod method, int pivot = -1);
double principal_minor_sum_scale(const Vec& lam, int m, int pivot = -1);

// Integer coefficients of the polynomial expansion in 2*lam_pivot.
std::int64_t coeff_P(int n, int k, int s);
std::int64_t coeff_Q(int n, int k, int s);
std::int64_t binomial(int a, int b);

struct MuResiduals {
    double lambda_pivot = 0;  // reconstruction of the pivot entry
    double sigma_drop = 0;    // sigma_{n-3}(lam|1j) expansion
    double diagonal = 0;      // S diagonal in mu form
    double off_diagonal = 0;  // S off-diagonal in mu form
    double max() const;
};

// Requires sigma_{n-1}(lam) = 1 and lam[pivot] <= 0.
MuResiduals mu_case_identities(const Vec& lam, int pivot = -1);

// sum sigma_{n-3}(lam|1j) xi_j^2 - sum_{p != q} sigma_{n-3}(lam|1pq) xi_p xi_q
double c_quadratic_form(const Vec& lam, const Vec& xi, int pivot = -1);

struct SamplerConfig {
    int n = 3;
    long samples = 1000;
    std::uint64_t seed = 0xC0FFEE;
    double boundary_fraction = 0.2;
    int threads = 0;
};

// One draw from Gamma_{n-1} normalised to sigma_{n-1} = 1. `boundary` pushes
// the draw towards the cone boundary.
Vec sample_cone_seeded(int n, std::uint64_t seed, std::uint64_t index, bool boundary);
// lam[0] <= 0, others positive, sigma_{n-1} = 1.
Vec sample_cone_nonpositive(int n, std::uint64_t seed, std::uint64_t index);
Vec normalize_sigma(const Vec& lam, int k);

struct PsdReport {
    int n = 0;
    long samples = 0;
    long boundary_samples = 0;
    std::uint64_t seed = 0;
    double min_eig_S = 0;
    double min_eig_R = 0;
    Vec argmin_S;
    Vec argmin_R;
    int argmin_pivot_S = 0;
    int argmin_pivot_R = 0;
};

// Smallest eigenvalue of S and R over all samples and all pivots, each
// divided by the spectral norm of its matrix.
PsdReport psd_certify(const SamplerConfig& cfg);

}  // namespace mink
