#include "mink/verify.hpp"

#include "mink/errors.hpp"
#include "mink/geometry.hpp"
#include "mink/kernel.hpp"
#include "mink/legendre.hpp"
#include "mink/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <random>
#include <functional>
#include <limits>

namespace mink {

namespace {

// Residual |a - b| relative to the larger of |a|, |b| and the magnitude at
// which the two evaluations round (the same expressions with |lambda|).
double rel(double a, double b, double scale) {
    const double d = std::max({std::abs(a), std::abs(b), std::abs(scale)});
    return d == 0.0 ? 0.0 : std::abs(a - b) / d;
}

double sa(const Vec& lam, int k, std::initializer_list<int> excl = {}) {
    return sigma(lam.cwiseAbs(), k, excl);
}

double sg(const Vec& lam, int k, std::initializer_list<int> excl = {}) {
    return k < 0 ? 0.0 : sigma(lam, k, excl);
}

Vec normal_vec(std::mt19937_64& rng, int n) {
    std::normal_distribution<double> g;
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = g(rng);
    return v;
}

// Draw from Gamma_k: rejection from Gaussian vectors, falling back to a
// log-normal point of the positive cone.
Vec cone_vec(std::mt19937_64& rng, int n, int k) {
    for (int tries = 0; tries < 2000; ++tries) {
        Vec v = normal_vec(rng, n);
        if (gaarding_test(v, k)) return v;
    }
    return normal_vec(rng, n).array().exp();
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

// Two distinct indices p != q in [0, n).
std::pair<int, int> two_indices(std::mt19937_64& rng, int n) {
    const int p = uniform_int(rng, 0, n - 1);
    int q = uniform_int(rng, 0, n - 2);
    if (q >= p) ++q;
    return {p, q};
}

using Trial = std::function<double(int n, std::mt19937_64& rng, Vec& lam, bool corrupt)>;

struct Identity {
    const char* name;
    Trial run;
};

std::vector<Identity> identities() {
    std::vector<Identity> out;

    out.push_back({"derivative", [](int n, std::mt19937_64& rng, Vec& lam, bool) {
        lam = normal_vec(rng, n);
        const int k = uniform_int(rng, 1, n);
        const Vec g = sigma_grad(lam, k);
        double worst = 0;
        for (int p = 0; p < n; ++p) {
            // sigma_k is affine in each entry, so the unit central difference is exact
            const Vec e = Vec::Unit(n, p);
            const double fd = 0.5 * (sigma(lam + e, k) - sigma(lam - e, k));
            worst = std::max(worst, rel(g[p], fd, sigma(lam.cwiseAbs() + e, k)));
        }
        return worst;
    }});

    out.push_back({"second_derivative", [](int n, std::mt19937_64& rng, Vec& lam, bool) {
        lam = normal_vec(rng, n);
        const int k = uniform_int(rng, 2, n);
        const Mat H = sigma_hess(lam, k);
        double worst = 0;
        for (int p = 0; p < n; ++p) {
            if (H(p, p) != 0.0) return 1.0;
            for (int q = p + 1; q < n; ++q) {
                const Vec ep = Vec::Unit(n, p), eq = Vec::Unit(n, q);
                const double fd = 0.25 * (sigma(lam + ep + eq, k) - sigma(lam + ep - eq, k) -
                                          sigma(lam - ep + eq, k) + sigma(lam - ep - eq, k));
                worst = std::max(worst, rel(H(p, q), fd, sigma(lam.cwiseAbs() + ep + eq, k)));
            }
        }
        return worst;
    }});

    out.push_back({"expansion", [](int n, std::mt19937_64& rng, Vec& lam, bool corrupt) {
        lam = normal_vec(rng, n);
        const int k = uniform_int(rng, 1, n);
        const double sign = corrupt ? -1.0 : 1.0;
        double worst = 0;
        for (int i = 0; i < n; ++i) {
            const double rhs = sign * lam[i] * sigma(lam, k - 1, {i}) + sigma(lam, k, {i});
            const double sc = std::abs(lam[i]) * sa(lam, k - 1, {i}) + sa(lam, k, {i});
            worst = std::max(worst, rel(sigma(lam, k), rhs, sc));
        }
        return worst;
    }});

    out.push_back({"euler", [](int n, std::mt19937_64& rng, Vec& lam, bool) {
        lam = normal_vec(rng, n);
        const int k = uniform_int(rng, 1, n);
        double s = 0, sc = 0;
        for (int i = 0; i < n; ++i) {
            s += lam[i] * sigma(lam, k - 1, {i});
            sc += std::abs(lam[i]) * sa(lam, k - 1, {i});
        }
        return rel(s, k * sigma(lam, k), sc);
    }});

    // Second derivative of sigma_k along a symmetric direction X at diagonal W,
    // against eigenvalue perturbation theory.
    out.push_back({"codazzi", [](int n, std::mt19937_64& rng, Vec& lam, bool) {
        lam = normal_vec(rng, n);
        const int k = uniform_int(rng, 2, n);
        Mat X = Mat::NullaryExpr(n, n, [&] { return std::normal_distribution<double>()(rng); });
        X = (X + X.transpose()).eval();
        double rhs = 0, rhs_sc = 0;
        for (int p = 0; p < n; ++p)
            for (int q = 0; q < n; ++q) {
                if (p == q) continue;
                const double s = sigma(lam, k - 2, {p, q});
                rhs += s * (X(p, q) * X(p, q) - X(p, p) * X(q, q));
                rhs_sc += sa(lam, k - 2, {p, q}) * (X(p, q) * X(p, q) + std::abs(X(p, p) * X(q, q)));
            }
        // d2 sigma_k = sum_p sigma_{k-1}(|p) lam_p'' + sum_{p != q} sigma_{k-2}(|pq) X_pp X_qq
        double d2 = 0, d2_sc = 0;
        for (int p = 0; p < n; ++p) {
            double lpp = 0, lpp_sc = 0;
            for (int q = 0; q < n; ++q) {
                if (q == p) continue;
                lpp += 2 * X(p, q) * X(p, q) / (lam[p] - lam[q]);
                lpp_sc += 2 * X(p, q) * X(p, q) / std::abs(lam[p] - lam[q]);
                d2 += sigma(lam, k - 2, {p, q}) * X(p, p) * X(q, q);
                d2_sc += sa(lam, k - 2, {p, q}) * std::abs(X(p, p) * X(q, q));
            }
            d2 += sigma(lam, k - 1, {p}) * lpp;
            d2_sc += sa(lam, k - 1, {p}) * lpp_sc;
        }
        return rel(-d2, rhs, std::max(d2_sc, rhs_sc));
    }});

    // largest violation, relative to the compared magnitudes
    out.push_back({"monotone", [](int n, std::mt19937_64& rng, Vec& lam, bool) {
        const int k = uniform_int(rng, 1, n);
        lam = cone_vec(rng, n, k);
        std::sort(lam.data(), lam.data() + n, std::greater<double>());
        double worst = 0;
        if (!(sigma(lam, k - 1, {0}) > 0)) return 1.0;
        for (int i = 0; i + 1 < n; ++i) {
            const double a = sigma(lam, k - 1, {i}), b = sigma(lam, k - 1, {i + 1});
            if (a > b) worst = std::max(worst, (a - b) / std::max({sa(lam, k - 1, {i}), sa(lam, k - 1, {i + 1})}));
        }
        return worst;
    }});

    out.push_back({"lower_bound", [](int n, std::mt19937_64& rng, Vec& lam, bool) {
        const int k = uniform_int(rng, 1, n);
        lam = cone_vec(rng, n, k);
        std::sort(lam.data(), lam.data() + n, std::greater<double>());
        const double lhs = lam[0] * sigma(lam, k - 1, {0});
        const double rhs = static_cast<double>(k) / n * sigma(lam, k);
        return lhs >= rhs ? 0.0 : (rhs - lhs) / std::max(sa(lam, k), 1e-300);
    }});

    out.push_back({"cross_difference", [](int n, std::mt19937_64& rng, Vec& lam, bool) {
        lam = normal_vec(rng, n);
        const int i = uniform_int(rng, 0, n - 1);
        int p, q;
        do {
            std::tie(p, q) = two_indices(rng, n);
        } while (p == i || q == i);
        const double lhs = sg(lam, n - 2, {i}) * sg(lam, n - 2, {p, q}) - sg(lam, n - 1, {i}) * sg(lam, n - 3, {p, q});
        const double c = sg(lam, n - 3, {i, p, q});
        const double rhs = c * c * (lam[i] * lam[p] + lam[i] * lam[q] - lam[p] * lam[q]);
        const Vec a = lam.cwiseAbs();
        const double sc = std::max(sg(a, n - 2, {i}) * sg(a, n - 2, {p, q}) + sg(a, n - 1, {i}) * sg(a, n - 3, {p, q}),
                                   sg(a, n - 3, {i, p, q}) * sg(a, n - 3, {i, p, q}) *
                                       (a[i] * a[p] + a[i] * a[q] + a[p] * a[q]));
        return rel(lhs, rhs, sc);
    }});

    out.push_back({"telescoping", [](int n, std::mt19937_64& rng, Vec& lam, bool) {
        lam = normal_vec(rng, n);
        const int pivot = uniform_int(rng, 0, n - 1);
        const int k = uniform_int(rng, 2, n - 1);
        std::vector<int> others;
        for (int j = 0; j < n; ++j)
            if (j != pivot) others.push_back(j);
        std::shuffle(others.begin(), others.end(), rng);
        std::vector<int> I(others.begin(), others.begin() + (k - 1));
        std::vector<int> ex = I;
        ex.push_back(pivot);
        auto s = [&](const Vec& v, int m, const std::vector<int>& e) { return m < 0 ? 0.0 : sigma(v, m, e); };
        double sum = 0, sum_a = 0;
        const Vec a = lam.cwiseAbs();
        for (int il : I) {
            sum += sigma(lam, n - 2, {pivot, il});
            sum_a += sigma(a, n - 2, {pivot, il});
        }
        const double lhs = sigma(lam, n - 1, {pivot}) * s(lam, n - k - 1, ex) + s(lam, n - k, ex) * sum;
        const double rhs = sigma(lam, n - 2, {pivot}) * s(lam, n - k, ex);
        const double sc = std::max(sigma(a, n - 1, {pivot}) * s(a, n - k - 1, ex) + s(a, n - k, ex) * sum_a,
                                   sigma(a, n - 2, {pivot}) * s(a, n - k, ex));
        return rel(lhs, rhs, sc);
    }});

    out.push_back({"mu_substitution", [](int n, std::mt19937_64& rng, Vec& lam, bool) {
        lam = sample_cone_nonpositive(n, rng(), rng() % 16);
        return mu_case_identities(lam, 0).max();
    }});

    out.push_back({"kernel_rank_one", [](int n, std::mt19937_64& rng, Vec& lam, bool) {
        lam = sample_cone_seeded(n, rng(), 0, false);
        const int pivot = uniform_int(rng, 0, n - 1);
        const KernelMatrices K = build_kernel(lam, pivot);
        const Vec a = lam.cwiseAbs();
        double worst = 0;
        for (int x = 0; x < n - 1; ++x)
            for (int y = 0; y < n - 1; ++y) {
                const int p = K.others[x], q = K.others[y];
                const double vv = sigma(lam, n - 2, {pivot, p}) * sigma(lam, n - 2, {pivot, q});
                const double sc = sigma(a, n - 2, {pivot, p}) * sigma(a, n - 2, {pivot, q});
                worst = std::max(worst, rel(K.T(x, y), vv, sc));
            }
        return worst;
    }});

    out.push_back({"kernel_split", [](int n, std::mt19937_64& rng, Vec& lam, bool) {
        lam = sample_cone_seeded(n, rng(), 0, false);
        const int pivot = uniform_int(rng, 0, n - 1);
        const KernelMatrices K = build_kernel(lam, pivot);
        const double s1 = sigma(lam, n - 2, {pivot});
        const Mat sum = K.A + K.B + s1 * Mat::Identity(n - 1, n - 1);
        const Mat mag = K.A.cwiseAbs() + K.B.cwiseAbs() + std::abs(s1) * Mat::Identity(n - 1, n - 1);
        double worst = 0;
        for (int x = 0; x < n - 1; ++x)
            for (int y = 0; y < n - 1; ++y) worst = std::max(worst, rel(K.S(x, y), sum(x, y), mag(x, y)));
        return worst;
    }});

    return out;
}

}  // namespace

std::vector<IdentityResult> identity_suite(const IdentityConfig& cfg) {
    if (cfg.n_min < 3 || cfg.n_max > 12 || cfg.n_min > cfg.n_max) throw ConfigError("identities: need 3 <= n_min <= n_max <= 12");
    if (cfg.trials < 0) throw ConfigError("identities: negative trial count");
    const auto ids = identities();
    std::vector<IdentityResult> out;
    for (size_t id = 0; id < ids.size(); ++id) {
        IdentityResult res;
        res.name = ids[id].name;
        for (int n = cfg.n_min; n <= cfg.n_max; ++n) {
            std::vector<double> r(cfg.trials);
            std::vector<Vec> lams(cfg.trials);
            const bool corrupt = cfg.self_test;
            parallel_for(cfg.trials, [&](long t) {
                auto rng = stream_rng(cfg.seed, id * 64 + n, t);
                double v = ids[id].run(n, rng, lams[t], corrupt);
                r[t] = std::isfinite(v) ? v : 1.0;
            }, cfg.threads);
            for (long t = 0; t < cfg.trials; ++t) {
                ++res.trials;
                if (res.witness.size() == 0 || r[t] > res.max_residual) {
                    res.max_residual = std::max(res.max_residual, r[t]);
                    res.witness = lams[t];
                    res.witness_n = n;
                }
            }
        }
        res.pass = res.max_residual <= cfg.tol;
        out.push_back(std::move(res));
    }
    return out;
}

InequalityReport inequality_certify(int n, long trials, std::uint64_t seed, int threads) {
    if (n < 3) throw ConfigError("inequality_certify: n must be at least 3");
    if (trials < 0) throw ConfigError("inequality_certify: negative trial count");
    InequalityReport rep;
    rep.n = n;
    rep.trials = trials;
    rep.seed = seed;
    rep.worst_value = std::numeric_limits<double>::infinity();
    std::vector<double> val(trials), gap(trials);
    std::vector<Vec> lams(trials), hs(trials);
    parallel_for(trials, [&](long t) {
        const bool boundary = std::floor((t + 1) * 0.2) > std::floor(t * 0.2);
        const Vec lam = sample_cone_seeded(n, seed, t, boundary);
        auto rng = stream_rng(seed, 0x1E0 + n, t);
        const int pivot = static_cast<int>(t % n);
        Vec h = normal_vec(rng, n - 1).normalized();
        const auto [direct, form] = reduced_inequality_lhs(lam, h, pivot);
        const KernelMatrices K = build_kernel(lam, pivot);
        const double scale = h.cwiseAbs().dot(K.R.cwiseAbs() * h.cwiseAbs());
        val[t] = scale > 0 ? form / scale : 0.0;
        gap[t] = rel(direct, form, scale);
        lams[t] = lam;
        hs[t] = h;
    }, threads);
    long worst = -1;
    for (long t = 0; t < trials; ++t) {
        rep.worst_identity = std::max(rep.worst_identity, gap[t]);
        if (val[t] < -1e-10 || gap[t] > 1e-10) ++rep.violations;
        if (worst < 0 || val[t] < rep.worst_value) {
            rep.worst_value = val[t];
            worst = t;
        }
    }
    if (worst >= 0) {
        rep.witness_lambda = lams[worst];
        rep.witness_h = hs[worst];
    } else {
        rep.worst_value = 0;
    }
    return rep;
}

namespace {

struct FieldView {
    const MaskedGridField& f;
    BallStencil st;
    Vec x, bv;
    explicit FieldView(const MaskedGridField& field) : f(field), st(field) {
        if (!f.boundary) throw ConfigError("verify: field has no boundary function");
        x = st.gather(f);
        bv = st.boundary_values(f.boundary);
    }
};

}  // namespace

CurvatureReport curvature_report(const SolveResult& sol) {
    CurvatureReport rep;
    const MaskedGridField& f = sol.field;
    rep.n = f.n;
    rep.r = sol.r;
    rep.h = f.h;
    if (!sol.converged) {
        rep.note = "solution did not converge";
        return rep;
    }
    FieldView v(f);
    const long m = v.st.unknowns();
    rep.points.resize(m);
    parallel_for(m, [&](long u) {
        PointRecord& p = rep.points[u];
        p.node = v.st.nodes()[u];
        p.interior = v.st.full(u);
        p.xi = f.position(p.node);
        DualJet dj{p.xi, v.x[u], v.st.gradient(u, v.x, v.bv), v.st.hessian(u, v.x, v.bv)};
        p.kappa = dual_curvature_radii(dj).cwiseInverse();
        std::sort(p.kappa.data(), p.kappa.data() + p.kappa.size());
        p.sigma = sigma(p.kappa, f.n - 1);
        p.residual = p.sigma - 1.0;
    });
    rep.min_kappa = std::numeric_limits<double>::infinity();
    rep.max_kappa = -std::numeric_limits<double>::infinity();
    for (const auto& p : rep.points) {
        const bool bad = !(p.kappa.minCoeff() > 0) || !p.kappa.allFinite();
        rep.nonconvex_nodes += bad;
        if (!p.interior) continue;
        ++rep.interior_points;
        rep.min_kappa = std::min(rep.min_kappa, p.kappa.minCoeff());
        rep.max_kappa = std::max(rep.max_kappa, p.kappa.maxCoeff());
        rep.max_residual = std::max(rep.max_residual, std::isfinite(p.residual) ? std::abs(p.residual) : HUGE_VAL);
    }
    rep.convex = rep.interior_points > 0 && rep.nonconvex_nodes == 0 && rep.min_kappa > 0;
    rep.valid = rep.interior_points > 0;
    if (!rep.valid) rep.note = "no interior nodes";
    return rep;
}

SupportBound support_bound_check(const SolveResult& sol) {
    SupportBound sb;
    const PrimalCloud cloud = dual_field_to_primal_cloud(sol.field);
    double umin = std::numeric_limits<double>::infinity();
    for (const auto& p : cloud.points)
        if (p.interior) umin = std::min(umin, p.u);
    if (!std::isfinite(umin)) return sb;
    sb.shift = std::max(0.0, 1.0 - umin);
    sb.d1 = std::numeric_limits<double>::infinity();
    sb.d2 = -std::numeric_limits<double>::infinity();
    for (const auto& p : cloud.points) {
        if (!p.interior) continue;
        const double d = (p.u + sb.shift) * std::sqrt(1 - p.Du.squaredNorm());
        sb.d1 = std::min(sb.d1, d);
        sb.d2 = std::max(sb.d2, d);
        ++sb.points;
    }
    sb.ok = sb.points > 0 && sb.d1 > 0 && std::isfinite(sb.d2);
    return sb;
}

AngularCheck angular_derivative_check(const SolveResult& sol, const BoundaryData& phi) {
    AngularCheck ac;
    FieldView v(sol.field);
    const int n = sol.field.n;
    for (long u = 0; u < v.st.unknowns(); ++u) {
        if (!v.st.full(u)) continue;
        const Vec xi = sol.field.position(v.st.nodes()[u]);
        const Vec g = v.st.gradient(u, v.x, v.bv);
        for (int k = 0; k < n; ++k)
            for (int l = k + 1; l < n; ++l) ac.max = std::max(ac.max, std::abs(xi[k] * g[l] - xi[l] * g[k]));
    }
    ac.reference = phi.c1 + std::pow(static_cast<double>(n), 1.0 / (n - 1));
    return ac;
}

BarrierCheck barrier_check(const SolveResult& sol, const BoundaryData& phi) {
    BarrierCheck bc;
    FieldView v(sol.field);
    const int n = sol.field.n;
    const double r = sol.field.domain_radius;
    // lowest boundary value, over the stencil's boundary points and the quadrature set at radius r
    double phimin = v.bv.size() ? v.bv.minCoeff() : std::numeric_limits<double>::infinity();
    for (const Vec& d : phi.directions) phimin = std::min(phimin, phi.eval(r * d));
    bc.c = phimin + std::pow(static_cast<double>(n), 1.0 / (n - 1)) * std::sqrt(1 - r * r);
    bc.tol = 10 * sol.field.h * sol.field.h;
    bc.worst = -std::numeric_limits<double>::infinity();
    const Vec a = Vec::Zero(n);
    for (long u = 0; u < v.st.unknowns(); ++u) {
        const Vec xi = sol.field.position(v.st.nodes()[u]);
        bc.worst = std::max(bc.worst, special_subsolution(xi, a, bc.c) - v.x[u]);
    }
    bc.ok = bc.worst <= bc.tol;
    return bc;
}

MaxPrinciple max_principle_check(const SolveResult& sol) {
    MaxPrinciple mp;
    FieldView v(sol.field);
    mp.max_ustar = v.x.maxCoeff();
    mp.max_phi = v.bv.size() ? v.bv.maxCoeff() : -std::numeric_limits<double>::infinity();
    mp.ok = mp.max_ustar <= mp.max_phi;
    return mp;
}

Consistency dual_primal_consistency(const SolveResult& sol) {
    Consistency c;
    const MaskedGridField& f = sol.field;
    FieldView v(f);
    c.tol = 5 * std::pow(f.h, 1.5);
    const PrimalCloud cloud = dual_field_to_primal_cloud(f);
    for (const auto& p : cloud.points) {
        if (!p.interior) continue;
        // push the primal point to the dual grid through its Gauss map
        PrimalJet pj{p.x, p.u, p.Du, p.D2u};
        const Vec xi = gauss_map(pj);
        const long node = f.nearest_node(xi);
        if (node < 0 || !f.mask[node] || (f.position(node) - xi).norm() > 2 * f.h) continue;
        const long u = v.st.unknown_of(node);
        const Vec lam = dual_curvature_radii({f.position(node), v.x[u], v.st.gradient(u, v.x, v.bv), v.st.hessian(u, v.x, v.bv)});
        Vec kd = lam.cwiseInverse();
        std::sort(kd.data(), kd.data() + kd.size());
        c.max_diff = std::max(c.max_diff, (primal_curvatures(pj) - kd).cwiseAbs().maxCoeff());
        ++c.matched;
    }
    c.ok = c.matched > 0 && c.max_diff <= c.tol;
    return c;
}

CurvatureReport verify_solution(const SolveResult& sol, const BoundaryData& phi) {
    CurvatureReport rep = curvature_report(sol);
    rep.phi_tag = phi_tag(phi);
    if (!sol.converged) return rep;
    rep.support = support_bound_check(sol);
    rep.angular = angular_derivative_check(sol, phi);
    rep.barrier = barrier_check(sol, phi);
    rep.max_principle = max_principle_check(sol);
    rep.consistency = dual_primal_consistency(sol);
    return rep;
}

Stability boundedness_track(const std::vector<CurvatureReport>& reports, double threshold) {
    if (reports.size() < 2) throw ConfigError("boundedness_track: need at least two reports");
    Stability s;
    for (size_t i = 0; i < reports.size(); ++i) {
        if (reports[i].phi_tag != reports[0].phi_tag) throw ConfigError("boundedness_track: reports use different boundary data");
        if (i && !(reports[i].r > reports[i - 1].r)) throw ConfigError("boundedness_track: radii must increase");
        s.r.push_back(reports[i].r);
        s.max_kappa.push_back(reports[i].max_kappa);
    }
    const double a = s.max_kappa[s.max_kappa.size() - 2], b = s.max_kappa.back();
    s.rel_change = std::abs(b - a) / std::max(std::abs(a), 1e-300);
    s.stable = reports.back().valid && reports[reports.size() - 2].valid && s.rel_change <= threshold;
    return s;
}

std::string phi_tag(const BoundaryData& phi) {
    std::uint64_t hsh = 0xcbf29ce484222325ull;
    for (double v : phi.samples) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        hsh = splitmix64(hsh ^ bits);
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s/%d/%016llx", phi.kind.c_str(), phi.n, static_cast<unsigned long long>(hsh));
    return buf;
}

}  // namespace mink
