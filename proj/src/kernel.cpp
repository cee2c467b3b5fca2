#include "mink/kernel.hpp"

#include "mink/errors.hpp"
#include "mink/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <string>

namespace mink {

namespace {

// sigma with the convention sigma_k = 0 for k < 0
double sg(const Vec& lam, int k, const std::vector<int>& excl) {
    if (k < 0) return 0.0;
    return sigma(lam, k, std::span<const int>(excl));
}

std::vector<int> with(std::vector<int> base, std::initializer_list<int> extra) {
    base.insert(base.end(), extra.begin(), extra.end());
    return base;
}

int resolve_pivot(const Vec& lam, int pivot) {
    const int n = static_cast<int>(lam.size());
    if (n < 3) throw DomainError("kernel: unsupported dimension n < 3");
    if (!lam.allFinite()) throw DomainError("kernel: non-finite curvature vector");
    if (pivot < 0) return default_pivot(lam);
    if (pivot >= n) throw DomainError("kernel: pivot out of range");
    return pivot;
}

std::vector<int> others_of(int n, int pivot) {
    std::vector<int> o;
    for (int i = 0; i < n; ++i)
        if (i != pivot) o.push_back(i);
    return o;
}

double det(const Mat& M) {
    if (M.rows() == 0) return 1.0;
    return Eigen::PartialPivLU<Mat>(M).determinant();
}

double hadamard(const Mat& M) {
    double h = 1.0;
    for (int i = 0; i < M.rows(); ++i) h *= M.row(i).norm();
    return h;
}

// rows/cols of a kernel matrix selected by lam positions
Mat sub(const KernelMatrices& K, const Mat& M, const std::vector<int>& idx) {
    std::vector<int> rows;
    for (int i : idx) {
        auto it = std::find(K.others.begin(), K.others.end(), i);
        rows.push_back(static_cast<int>(it - K.others.begin()));
    }
    Mat out(rows.size(), rows.size());
    for (size_t a = 0; a < rows.size(); ++a)
        for (size_t b = 0; b < rows.size(); ++b) out(a, b) = M(rows[a], rows[b]);
    return out;
}

void validate(const Vec& lam, const MinorIndex& idx, int pivot) {
    const int n = static_cast<int>(lam.size());
    const int m = static_cast<int>(idx.indices.size());
    if (m < 1) throw DomainError("minor: empty index set");
    for (int i = 0; i < m; ++i) {
        const int v = idx.indices[i];
        if (v < 0 || v >= n || v == pivot) throw DomainError("minor: index out of range or equal to pivot");
        if (i > 0 && v <= idx.indices[i - 1]) throw DomainError("minor: indices not strictly increasing");
    }
    auto in_range = [m](int r) { return r >= 0 && r < m; };
    switch (idx.variant) {
        case MinorVariant::CCofactor:
            if (m < 2 || !in_range(idx.a) || !in_range(idx.b) || idx.a == idx.b)
                throw DomainError("minor: cofactor selectors invalid");
            break;
        case MinorVariant::MixedRow:
            if (idx.a != -1 && !in_range(idx.a)) throw DomainError("minor: mixed row selector invalid");
            break;
        case MinorVariant::MixedTwoRows:
            if (!in_range(idx.a) || !in_range(idx.b) || idx.a >= idx.b)
                throw DomainError("minor: mixed two-row selectors invalid");
            break;
        default:
            break;
    }
}

struct ClosedForms {
    const Vec& lam;
    int n;
    int pivot;
    double s;   // sigma_{n-2}(lam|1)
    double l2;  // 2 lam_1

    ClosedForms(const Vec& l, int p)
        : lam(l), n(static_cast<int>(l.size())), pivot(p), s(sg(l, n - 2, {p})), l2(2.0 * l[p]) {}

    std::vector<int> excl(const std::vector<int>& I) const { return with(I, {pivot}); }

    double c_det(const std::vector<int>& I) const {
        const int m = static_cast<int>(I.size());
        return std::pow(s, m - 1) * sg(lam, n - (m + 2), excl(I));
    }
    double b_det(const std::vector<int>& I) const {
        const int k = static_cast<int>(I.size()) + 1;
        return std::pow(l2, k - 1) * std::pow(s, k - 2) * sg(lam, n - k - 1, excl(I));
    }
    double mixed_row_sum(const std::vector<int>& I) const {
        const int k = static_cast<int>(I.size()) + 1;
        double acc = k * (k - 1) * sg(lam, n - k, excl(I));
        for (size_t r = 0; r < I.size(); ++r) {
            std::vector<int> J = I;
            J.erase(J.begin() + static_cast<long>(r));
            acc += sg(lam, n - k, excl(J));
        }
        return std::pow(l2, k - 2) * std::pow(s, k - 2) * acc;
    }
    double mixed_two_rows(const std::vector<int>& I, int a, int b) const {
        const int k = static_cast<int>(I.size()) + 1;
        const int ip = I[a], iq = I[b];
        const double d = lam[ip] - lam[iq];
        return -std::pow(l2, k - 3) * std::pow(s, k - 3) * d * d * sg(lam, n - 3, {pivot, ip, iq}) *
               sg(lam, n - k, excl(I));
    }
    double a_plus_b(const std::vector<int>& J) const {
        if (J.empty()) return 1.0;
        double v = b_det(J) + mixed_row_sum(J);
        for (size_t a = 0; a < J.size(); ++a)
            for (size_t b = a + 1; b < J.size(); ++b) v += mixed_two_rows(J, static_cast<int>(a), static_cast<int>(b));
        return v;
    }
    double s_det(const std::vector<int>& I) const {
        // expand det(A + B + s Id) over principal subsets
        const int m = static_cast<int>(I.size());
        double total = 0.0;
        for (unsigned mask = 0; mask < (1u << m); ++mask) {
            std::vector<int> J;
            for (int r = 0; r < m; ++r)
                if (mask & (1u << r)) J.push_back(I[r]);
            total += std::pow(s, m - static_cast<int>(J.size())) * a_plus_b(J);
        }
        return total;
    }
};

void for_each_subset(const std::vector<int>& pool, int size, const std::function<void(const std::vector<int>&)>& fn) {
    const int m = static_cast<int>(pool.size());
    if (size < 0 || size > m) return;
    std::vector<int> cur;
    std::function<void(int, int)> rec = [&](int start, int depth) {
        if (depth == size) {
            fn(cur);
            return;
        }
        for (int i = start; i <= m - (size - depth); ++i) {
            cur.push_back(pool[i]);
            rec(i + 1, depth + 1);
            cur.pop_back();
        }
    };
    rec(0, 0);
}

Mat replace_rows(Mat M, const Mat& from, std::initializer_list<int> rows) {
    for (int r : rows) M.row(r) = from.row(r);
    return M;
}

double factorial_ratio(int num, int den_a, int den_b) {
    // num! / (den_a! den_b!) as a double; used only in closed forms
    if (den_a < 0 || den_b < 0) return 0.0;
    return std::exp(std::lgamma(num + 1.0) - std::lgamma(den_a + 1.0) - std::lgamma(den_b + 1.0));
}

}  // namespace

bool is_normalized(const Vec& lam) {
    const int n = static_cast<int>(lam.size());
    // 1e-10, or the rounding level of sigma_{n-1} when cancellation is worse
    const double noise = 64.0 * std::numeric_limits<double>::epsilon() * sigma(Vec(lam.cwiseAbs()), n - 1);
    return std::abs(sigma(lam, n - 1) - 1.0) <= std::max(1e-10, noise);
}

int default_pivot(const Vec& lam) {
    int p = 0;
    for (int i = 1; i < lam.size(); ++i)
        if (lam[i] < lam[p]) p = i;
    return p;
}

KernelMatrices build_kernel(const Vec& lam, int pivot) {
    pivot = resolve_pivot(lam, pivot);
    const int n = static_cast<int>(lam.size());
    KernelMatrices K;
    K.n = n;
    K.pivot = pivot;
    K.lam = lam;
    K.others = others_of(n, pivot);
    const int m = n - 1;
    K.T = K.S = K.A = K.B = K.C = K.R = Mat::Zero(m, m);
    const double s1 = sg(lam, n - 2, {pivot});
    const double sn1 = sg(lam, n - 1, {pivot});
    const double l1 = lam[pivot];
    for (int a = 0; a < m; ++a) {
        const int p = K.others[a];
        const double c = sg(lam, n - 3, {pivot, p});
        K.C(a, a) = c;
        K.A(a, a) = 2.0 * sg(lam, n - 2, {pivot, p}) + s1;
        K.S(a, a) = 2.0 * s1 + 2.0 * sg(lam, n - 2, {p});
        const double v = sg(lam, n - 2, {pivot, p});
        K.T(a, a) = v * v;
        for (int b = a + 1; b < m; ++b) {
            const int q = K.others[b];
            const double c3 = sg(lam, n - 3, {pivot, p, q});
            K.C(a, b) = K.C(b, a) = -c3;
            K.A(a, b) = K.A(b, a) = (lam[p] + lam[q]) * c3 + s1;
            K.S(a, b) = K.S(b, a) = s1 + (lam[p] + lam[q] - 2.0 * l1) * c3;
            K.T(a, b) = K.T(b, a) = sn1 * c3;
        }
    }
    K.B = 2.0 * l1 * K.C;
    K.R = K.T.cwiseProduct(K.S);
    return K;
}

double quadratic_form_QS(const Vec& lam, const Vec& xi, int pivot) {
    pivot = resolve_pivot(lam, pivot);
    const int n = static_cast<int>(lam.size());
    if (xi.size() != n - 1) throw DomainError("quadratic_form_QS: length mismatch");
    const auto others = others_of(n, pivot);
    const double s1 = sg(lam, n - 2, {pivot});
    double q = 0.0;
    for (int a = 0; a < n - 1; ++a) {
        const int p = others[a];
        q += (2.0 * s1 + 2.0 * sg(lam, n - 2, {p})) * xi[a] * xi[a];
        for (int b = 0; b < n - 1; ++b) {
            if (b == a) continue;
            const int r = others[b];
            q += (s1 + (lam[p] + lam[r] - 2.0 * lam[pivot]) * sg(lam, n - 3, {pivot, p, r})) * xi[a] * xi[b];
        }
    }
    return q;
}

std::pair<double, double> reduced_inequality_lhs(const Vec& lam, const Vec& h, int pivot) {
    pivot = resolve_pivot(lam, pivot);
    const int n = static_cast<int>(lam.size());
    if (h.size() != n - 1) throw DomainError("reduced_inequality_lhs: length mismatch");
    if (!gaarding_test(lam, n - 1)) throw DomainError("reduced_inequality_lhs: lam outside Gamma_{n-1}");
    if (!is_normalized(lam)) throw NormalizationError("reduced_inequality_lhs: sigma_{n-1} != 1");

    const auto others = others_of(n, pivot);
    const int i = pivot;
    // first and second derivatives of sigma_k in the eigenvalue variables
    auto d1 = [&](int k, int p) { return sg(lam, k - 1, {p}); };
    auto d2 = [&](int k, int p, int q) { return p == q ? 0.0 : sg(lam, k - 2, {p, q}); };

    // full vector of h_{jj1}, with h_{111} from the differentiated equation
    Vec hf = Vec::Zero(n);
    double h11 = 0.0;
    for (int a = 0; a < n - 1; ++a) {
        hf[others[a]] = h[a];
        h11 -= d1(n - 1, others[a]) / d1(n - 1, i) * h[a];
    }
    hf[i] = h11;

    double L = 0.0;
    for (int j : others) L += 2.0 * (d1(n - 1, j) * d2(n, i, j) - d1(n, j) * d2(n - 1, i, j)) * hf[j] * hf[j];
    for (int p = 0; p < n; ++p)
        for (int q = 0; q < n; ++q) {
            if (p == q) continue;
            L -= (d1(n - 1, i) * d2(n, p, q) - d1(n, i) * d2(n - 1, p, q)) * hf[p] * hf[q];
        }
    const double direct = d1(n - 1, i) * L;
    const KernelMatrices K = build_kernel(lam, pivot);
    return {direct, h.dot(K.R * h)};
}

double minor_closed_form(const Vec& lam, const MinorIndex& idx, int pivot) {
    pivot = resolve_pivot(lam, pivot);
    validate(lam, idx, pivot);
    const ClosedForms cf(lam, pivot);
    const auto& I = idx.indices;
    const int m = static_cast<int>(I.size());
    switch (idx.variant) {
        case MinorVariant::CMatrix:
            return cf.c_det(I);
        case MinorVariant::CCofactor: {
            const double sign = ((idx.a + idx.b) % 2 == 0) ? 1.0 : -1.0;
            return sign * std::pow(cf.s, m - 2) * sg(lam, cf.n - m - 1, cf.excl(I));
        }
        case MinorVariant::BMatrix:
            return cf.b_det(I);
        case MinorVariant::MixedRow:
            if (idx.a != -1) throw DomainError("minor_closed_form: only the sum over rows has a closed form");
            return cf.mixed_row_sum(I);
        case MinorVariant::MixedTwoRows:
            return cf.mixed_two_rows(I, idx.a, idx.b);
        case MinorVariant::SMatrix:
            return cf.s_det(I);
    }
    throw DomainError("minor_closed_form: unknown variant");
}

namespace {

template <class Fn>
double brute_apply(const Vec& lam, const MinorIndex& idx, int pivot, Fn&& reduce) {
    const KernelMatrices K = build_kernel(lam, pivot);
    const auto& I = idx.indices;
    const int m = static_cast<int>(I.size());
    const Mat B = sub(K, K.B, I);
    switch (idx.variant) {
        case MinorVariant::CMatrix:
            return reduce(sub(K, K.C, I));
        case MinorVariant::CCofactor: {
            Mat C = sub(K, K.C, I);
            Mat D(m - 1, m - 1);
            for (int r = 0, rr = 0; r < m; ++r) {
                if (r == idx.a) continue;
                for (int c = 0, cc = 0; c < m; ++c) {
                    if (c == idx.b) continue;
                    D(rr, cc++) = C(r, c);
                }
                ++rr;
            }
            return reduce(D);
        }
        case MinorVariant::BMatrix:
            return reduce(B);
        case MinorVariant::MixedRow: {
            const Mat A = sub(K, K.A, I);
            if (idx.a >= 0) return reduce(replace_rows(B, A, {idx.a}));
            double acc = 0.0;
            for (int r = 0; r < m; ++r) acc += reduce(replace_rows(B, A, {r}));
            return acc;
        }
        case MinorVariant::MixedTwoRows:
            return reduce(replace_rows(B, sub(K, K.A, I), {idx.a, idx.b}));
        case MinorVariant::SMatrix:
            return reduce(sub(K, K.S, I));
    }
    throw DomainError("minor_bruteforce: unknown variant");
}

}  // namespace

double minor_bruteforce(const Vec& lam, const MinorIndex& idx, int pivot) {
    pivot = resolve_pivot(lam, pivot);
    validate(lam, idx, pivot);
    return brute_apply(lam, idx, pivot, [](const Mat& M) { return det(M); });
}

double minor_scale(const Vec& lam, const MinorIndex& idx, int pivot) {
    pivot = resolve_pivot(lam, pivot);
    validate(lam, idx, pivot);
    return brute_apply(lam, idx, pivot, [](const Mat& M) { return hadamard(M); });
}

double summed_minor_closed_form(const Vec& lam, int k, int s, SummedVariant v, int pivot) {
    pivot = resolve_pivot(lam, pivot);
    const int n = static_cast<int>(lam.size());
    if (k < 2 || k > n || s < 2 || s > k) throw DomainError("summed_minor_closed_form: (k, s) out of range");
    const double s1 = sg(lam, n - 2, {pivot});
    const double l2 = 2.0 * lam[pivot];
    const double count = factorial_ratio(n - s, k - s, n - k);
    switch (v) {
        case SummedVariant::B:
            return s * count * std::pow(l2, s - 1) * std::pow(s1, s - 2) * sg(lam, n - s - 1, {pivot});
        case SummedVariant::MixedRow:
            return (n + 1) * (s - 1) * count * std::pow(l2, s - 2) * std::pow(s1, s - 2) * sg(lam, n - s, {pivot});
        case SummedVariant::MixedTwoRows: {
            if (s < 3) return 0.0;
            const double sn1 = sg(lam, n - 1, {pivot});
            return (n - 1) * (s - 1) * count * std::pow(l2, s - 3) * std::pow(s1, s - 3) * sn1 *
                       sg(lam, n - s, {pivot}) -
                   factorial_ratio(n - s + 1, k - s, n - k) * std::pow(l2, s - 3) * std::pow(s1, s - 2) *
                       sg(lam, n - s + 1, {pivot});
        }
    }
    throw DomainError("summed_minor_closed_form: unknown variant");
}

namespace {

template <class Reduce>
double summed_apply(const Vec& lam, int k, int s, SummedVariant v, int pivot, Reduce&& reduce) {
    const int n = static_cast<int>(lam.size());
    if (k < 2 || k > n || s < 2 || s > k) throw DomainError("summed_minor: (k, s) out of range");
    const KernelMatrices K = build_kernel(lam, pivot);
    std::map<std::vector<int>, double> memo;
    auto value = [&](const std::vector<int>& J) {
        auto it = memo.find(J);
        if (it != memo.end()) return it->second;
        const Mat B = sub(K, K.B, J);
        const Mat A = sub(K, K.A, J);
        const int m = static_cast<int>(J.size());
        double acc = 0.0;
        if (v == SummedVariant::B) {
            acc = reduce(B);
        } else if (v == SummedVariant::MixedRow) {
            for (int r = 0; r < m; ++r) acc += reduce(replace_rows(B, A, {r}));
        } else {
            for (int a = 0; a < m; ++a)
                for (int b = a + 1; b < m; ++b) acc += reduce(replace_rows(B, A, {a, b}));
        }
        memo.emplace(J, acc);
        return acc;
    };
    double total = 0.0;
    for_each_subset(K.others, k - 1, [&](const std::vector<int>& I) {
        for_each_subset(I, s - 1, [&](const std::vector<int>& J) { total += value(J); });
    });
    return total;
}

}  // namespace

double summed_minor_bruteforce(const Vec& lam, int k, int s, SummedVariant v, int pivot) {
    pivot = resolve_pivot(lam, pivot);
    return summed_apply(lam, k, s, v, pivot, [](const Mat& M) { return det(M); });
}

double summed_minor_scale(const Vec& lam, int k, int s, SummedVariant v, int pivot) {
    pivot = resolve_pivot(lam, pivot);
    return summed_apply(lam, k, s, v, pivot, [](const Mat& M) { return hadamard(M); });
}

std::int64_t binomial(int a, int b) {
    if (b < 0 || a < 0 || b > a) return 0;
    std::int64_t r = 1;
    for (int i = 1; i <= b; ++i) r = r * (a - b + i) / i;
    return r;
}

namespace {
std::int64_t fact_ratio(int x, int y, int z) {
    // x! / (y! z!) with x >= y + z, evaluated exactly
    if (y < 0 || z < 0 || x < y + z) return 0;
    std::int64_t r = 1;
    for (int i = y + 1; i <= x; ++i) r *= i;
    for (int i = 2; i <= z; ++i) r /= i;
    return r;
}
}  // namespace

std::int64_t coeff_P(int n, int k, int s) {
    const int t = s + 3;
    std::int64_t v = (t - 2) * fact_ratio(n - t + 2, k - t + 2, n - k) +
                     std::int64_t(n + 1) * (t - 2) * fact_ratio(n - t + 1, k - t + 1, n - k);
    v -= fact_ratio(n - t + 1, k - t, n - k);
    return v;
}

std::int64_t coeff_Q(int n, int k, int s) {
    const int t = s + 3;
    return std::int64_t(n - 1) * (t - 1) * fact_ratio(n - t, k - t, n - k);
}

double principal_minor_sum(const Vec& lam, int m, MinorSumMethod method, int pivot) {
    pivot = resolve_pivot(lam, pivot);
    const int n = static_cast<int>(lam.size());
    if (m < 1 || m > n - 1) throw DomainError("principal_minor_sum: order out of range");
    if (method == MinorSumMethod::Bruteforce) {
        const KernelMatrices K = build_kernel(lam, pivot);
        double total = 0.0;
        for_each_subset(K.others, m, [&](const std::vector<int>& I) { total += det(sub(K, K.S, I)); });
        return total;
    }
    if (!(lam[pivot] > 0.0)) throw BranchError("principal_minor_sum: expansion needs lam_pivot > 0");
    const int k = m + 1;
    const double s1 = sg(lam, n - 2, {pivot});
    const double sn1 = sg(lam, n - 1, {pivot});
    const double l2 = 2.0 * lam[pivot];
    double total = 0.0;
    for (int s = 0; s <= k - 3; ++s) {
        total += std::pow(l2, s) * std::pow(s1, k - 3) *
                 (static_cast<double>(coeff_P(n, k, s)) * s1 * sg(lam, n - s - 2, {pivot}) +
                  static_cast<double>(coeff_Q(n, k, s)) * sn1 * sg(lam, n - s - 3, {pivot}));
    }
    total += (k - 1) * (2 * n + 2 - k) * std::pow(l2, k - 2) * std::pow(s1, k - 2) * sg(lam, n - k, {pivot});
    total += k * std::pow(l2, k - 1) * std::pow(s1, k - 2) * sg(lam, n - k - 1, {pivot});
    return total;
}

double principal_minor_sum_scale(const Vec& lam, int m, int pivot) {
    pivot = resolve_pivot(lam, pivot);
    const KernelMatrices K = build_kernel(lam, pivot);
    double total = 0.0;
    for_each_subset(K.others, m, [&](const std::vector<int>& I) { total += hadamard(sub(K, K.S, I)); });
    return total;
}

double MuResiduals::max() const {
    return std::max({lambda_pivot, sigma_drop, diagonal, off_diagonal});
}

namespace {
double rel(double a, double b, double scale) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), scale, std::numeric_limits<double>::min()});
}
}  // namespace

MuResiduals mu_case_identities(const Vec& lam, int pivot) {
    pivot = resolve_pivot(lam, pivot);
    const int n = static_cast<int>(lam.size());
    if (lam[pivot] > 0.0) throw BranchError("mu_case_identities: lam_pivot > 0");
    if (!is_normalized(lam)) throw NormalizationError("mu_case_identities: sigma_{n-1} != 1");
    const auto others = others_of(n, pivot);
    Vec mu(n - 1);
    for (int a = 0; a < n - 1; ++a) {
        if (lam[others[a]] == 0.0) throw DomainError("mu_case_identities: zero entry");
        mu[a] = 1.0 / lam[others[a]];
    }
    const double s1 = sg(lam, n - 2, {pivot});
    const double sn1 = sg(lam, n - 1, {pivot});
    const double m1 = sigma(mu, 1);
    const double mn = sigma(mu, n - 1);

    MuResiduals r;
    r.lambda_pivot = rel(lam[pivot], (1.0 - sn1) / s1, std::abs(sn1 / s1) + 1.0 / std::abs(s1));
    for (int a = 0; a < n - 1; ++a) {
        const int j = others[a];
        const double lj = lam[j];
        const double c = sg(lam, n - 3, {pivot, j});
        r.sigma_drop = std::max(r.sigma_drop, rel(c, s1 / lj - sn1 / (lj * lj), std::abs(s1 / lj) + std::abs(sn1 / (lj * lj))));
        const double lhs = 2.0 * s1 + 2.0 * sg(lam, n - 2, {j});
        const double rhs = (2.0 * m1 * m1 + 2.0 * mu[a] * mu[a]) / (m1 * mn) + 2.0 * c / s1;
        r.diagonal = std::max(r.diagonal, rel(lhs, rhs, 0.0));
        for (int b = 0; b < n - 1; ++b) {
            if (b == a) continue;
            const int q = others[b];
            const double c3 = sg(lam, n - 3, {pivot, j, q});
            const double lo = s1 + (lj + lam[q] - 2.0 * lam[pivot]) * c3;
            const double ro = (m1 * m1 + (mu[a] + mu[b]) * m1 + 2.0 * mu[a] * mu[b]) / (m1 * mn) - 2.0 * c3 / s1;
            r.off_diagonal = std::max(r.off_diagonal, rel(lo, ro, std::abs(s1) + std::abs(2.0 * c3 / s1)));
        }
    }
    return r;
}

double c_quadratic_form(const Vec& lam, const Vec& xi, int pivot) {
    pivot = resolve_pivot(lam, pivot);
    const int n = static_cast<int>(lam.size());
    if (xi.size() != n - 1) throw DomainError("c_quadratic_form: length mismatch");
    const auto others = others_of(n, pivot);
    double q = 0.0;
    for (int a = 0; a < n - 1; ++a) {
        q += sg(lam, n - 3, {pivot, others[a]}) * xi[a] * xi[a];
        for (int b = 0; b < n - 1; ++b)
            if (b != a) q -= sg(lam, n - 3, {pivot, others[a], others[b]}) * xi[a] * xi[b];
    }
    return q;
}

Vec normalize_sigma(const Vec& lam, int k) {
    const double v = sigma(lam, k);
    if (!(v > 0.0)) throw DomainError("normalize_sigma: sigma_k not positive");
    return lam * std::pow(v, -1.0 / k);
}

namespace {

constexpr long kMaxDraws = 1000000;

template <class Rng>
Vec sphere_draw(int n, Rng& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = g(rng);
    const double norm = v.norm();
    return norm > 0 ? Vec(v / norm) : sphere_draw(n, rng);
}

}  // namespace

Vec sample_cone_seeded(int n, std::uint64_t seed, std::uint64_t index, bool boundary) {
    if (n < 2) throw SamplingError("sample_cone: n < 2");
    auto rng = stream_rng(seed, static_cast<std::uint64_t>(n), index);
    Vec inside, outside;
    for (long draw = 0; draw < kMaxDraws; ++draw) {
        Vec v = sphere_draw(n, rng);
        if (gaarding_test(v, n - 1)) {
            if (inside.size() == 0) inside = v;
        } else if (outside.size() == 0) {
            outside = v;
        }
        if (inside.size() && (!boundary || outside.size())) break;
    }
    if (inside.size() == 0 || (boundary && outside.size() == 0))
        throw SamplingError("sample_cone: no cone member after bounded retries");
    Vec lam = inside;
    if (boundary) {
        // bisect towards the boundary on the segment inside -> outside
        Vec lo = inside, hi = outside;
        for (int it = 0; it < 60; ++it) {
            Vec mid = 0.5 * (lo + hi);
            if (gaarding_test(mid, n - 1)) lo = mid;
            else hi = mid;
        }
        std::uniform_real_distribution<double> u(-3.0, 0.0);
        const double eps = std::pow(10.0, u(rng));
        lam = lo + eps * (inside - lo);
        if (!gaarding_test(lam, n - 1)) lam = lo;
    }
    return normalize_sigma(lam, n - 1);
}

Vec sample_cone_nonpositive(int n, std::uint64_t seed, std::uint64_t index) {
    if (n < 3) throw SamplingError("sample_cone_nonpositive: n < 3");
    auto rng = stream_rng(seed ^ 0x5eed, static_cast<std::uint64_t>(n), index);
    std::normal_distribution<double> g(0.0, 0.7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (long draw = 0; draw < kMaxDraws; ++draw) {
        Vec lam(n);
        for (int i = 1; i < n; ++i) lam[i] = std::exp(g(rng));
        const double ratio = sigma(lam.tail(n - 1), n - 1) / sigma(lam.tail(n - 1), n - 2);
        // any lam_0 above -ratio stays in Gamma_{n-1}
        const double t = u(rng);
        lam[0] = (draw == 0 && index % 16 == 0) ? 0.0 : -t * ratio;
        if (gaarding_test(lam, n - 1)) return normalize_sigma(lam, n - 1);
    }
    throw SamplingError("sample_cone_nonpositive: no cone member after bounded retries");
}

PsdReport psd_certify(const SamplerConfig& cfg) {
    if (cfg.n < 3) throw DomainError("psd_certify: n < 3");
    struct Result {
        double s = 0, r = 0;
        int ps = 0, pr = 0;
        bool boundary = false;
    };
    std::vector<Result> results(static_cast<size_t>(std::max<long>(cfg.samples, 0)));
    std::vector<Vec> lams(results.size());
    const double frac = cfg.boundary_fraction;
    parallel_for(
        static_cast<long>(results.size()),
        [&](long i) {
            const bool boundary = std::floor((i + 1) * frac) > std::floor(i * frac);
            Vec lam = sample_cone_seeded(cfg.n, cfg.seed, static_cast<std::uint64_t>(i), boundary);
            Result res;
            res.s = res.r = std::numeric_limits<double>::infinity();
            res.boundary = boundary;
            for (int p = 0; p < cfg.n; ++p) {
                const KernelMatrices K = build_kernel(lam, p);
                const Vec es = sym_eigenvalues(K.S);
                const Vec er = sym_eigenvalues(K.R);
                const double ns = es.cwiseAbs().maxCoeff(), nr = er.cwiseAbs().maxCoeff();
                const double vs = ns > 0 ? es[0] / ns : 0.0, vr = nr > 0 ? er[0] / nr : 0.0;
                if (vs < res.s) res.s = vs, res.ps = p;
                if (vr < res.r) res.r = vr, res.pr = p;
            }
            results[i] = res;
            lams[i] = std::move(lam);
        },
        cfg.threads);

    PsdReport rep;
    rep.n = cfg.n;
    rep.samples = static_cast<long>(results.size());
    rep.seed = cfg.seed;
    rep.min_eig_S = rep.min_eig_R = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < results.size(); ++i) {
        const auto& r = results[i];
        rep.boundary_samples += r.boundary;
        if (r.s < rep.min_eig_S) rep.min_eig_S = r.s, rep.argmin_S = lams[i], rep.argmin_pivot_S = r.ps;
        if (r.r < rep.min_eig_R) rep.min_eig_R = r.r, rep.argmin_R = lams[i], rep.argmin_pivot_R = r.pr;
    }
    return rep;
}

}  // namespace mink
