#include "mink/solver.hpp"

#include "mink/errors.hpp"
#include "mink/geometry.hpp"
#include "mink/parallel.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

namespace mink {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

// Per-node data of the discrete dual operator on one grid.
class DualOperator {
public:
    explicit DualOperator(const MaskedGridField& f, int threads = 0)
        : st_(f), threads_(threads) {
        if (!f.boundary) throw ConfigError("solver: field has no boundary function");
        bvals_ = st_.boundary_values(f.boundary);
        const long m = st_.unknowns();
        w_.resize(m);
        gamma_.resize(m);
        for (long u = 0; u < m; ++u) {
            const Vec xi = f.position(st_.nodes()[u]);
            w_[u] = w_hat(xi);
            gamma_[u] = gamma_star(xi);
        }
    }

    const BallStencil& stencil() const { return st_; }
    const Vec& bvals() const { return bvals_; }

    struct Eval {
        Vec G;
        double min_eig = 0;
        long bad = -1;  // first node below the convexity floor
    };

    Mat M(long u, const Vec& x) const {
        Mat m = w_[u] * gamma_[u] * st_.hessian(u, x, bvals_) * gamma_[u];
        return 0.5 * (m + m.transpose());
    }

    Eval evaluate(const Vec& x, double eps_rel) const {
        const long m = st_.unknowns();
        const int n = st_.n();
        Eval e;
        e.G.resize(m);
        std::vector<double> mins(m);
        std::vector<char> bad(m, 0);
        parallel_for(m, [&](long u) {
            const Vec ev = sym_eigenvalues(M(u, x));
            mins[u] = ev[0];
            const double tr = ev.sum();
            if (!(ev[0] > eps_rel * tr / n) || !(tr > 0)) {
                bad[u] = 1;
                e.G[u] = std::numeric_limits<double>::quiet_NaN();
                return;
            }
            e.G[u] = (ev.array().log().sum() - std::log(tr)) / (n - 1);
        }, threads_);
        e.min_eig = std::numeric_limits<double>::infinity();
        for (long u = 0; u < m; ++u) {
            e.min_eig = std::min(e.min_eig, mins[u]);
            if (bad[u] && e.bad < 0) e.bad = u;
        }
        return e;
    }

    SpMat jacobian(const Vec& x) const {
        const long m = st_.unknowns();
        const int n = st_.n(), nd = st_.directions();
        std::vector<Triplet> trip(static_cast<size_t>(m) * nd * 3);
        parallel_for(m, [&](long u) {
            Eigen::SelfAdjointEigenSolver<Mat> es(M(u, x));
            const Vec& ev = es.eigenvalues();
            if (!(ev[0] > 0)) throw EllipticityError("linearize: M not positive definite", st_.nodes()[u]);
            const double tr = ev.sum();
            // dG/dM = V diag(1/lambda_i - 1/sigma_1) V^T / (n-1)
            const Vec f = (ev.cwiseInverse().array() - 1.0 / tr) / (n - 1);
            const Mat& V = es.eigenvectors();
            const Mat c = w_[u] * gamma_[u] * (V * f.asDiagonal() * V.transpose()) * gamma_[u];
            size_t slot = static_cast<size_t>(u) * nd * 3;
            for (int d = 0; d < nd; ++d) {
                double coef;
                if (d < n) {
                    coef = c(d, d);
                } else {
                    const auto [k, l] = pair_of(d);
                    coef = ((d - n) % 2 == 0 ? 1.0 : -1.0) * c(k, l);
                }
                const auto w = st_.second(u, d);
                const auto& fa = st_.forward(u, d);
                const auto& ba = st_.backward(u, d);
                trip[slot++] = Triplet(u, u, coef * w.w0);
                trip[slot++] = Triplet(u, fa.unknown >= 0 ? fa.unknown : u, fa.unknown >= 0 ? coef * w.wf : 0.0);
                trip[slot++] = Triplet(u, ba.unknown >= 0 ? ba.unknown : u, ba.unknown >= 0 ? coef * w.wb : 0.0);
            }
        }, threads_);
        SpMat J(m, m);
        J.setFromTriplets(trip.begin(), trip.end());
        J.makeCompressed();
        return J;
    }

private:
    std::pair<int, int> pair_of(int d) const {
        int idx = st_.n();
        for (int k = 0; k < st_.n(); ++k)
            for (int l = k + 1; l < st_.n(); ++l, idx += 2)
                if (d == idx || d == idx + 1) return {k, l};
        throw DomainError("stencil: bad direction");
    }

    BallStencil st_;
    int threads_;
    Vec bvals_;
    std::vector<double> w_;
    std::vector<Mat> gamma_;
};

// Direct LU in 2D. In 3D the LU fill-in is too slow, so BiCGSTAB with an
// ILUT preconditioner is used to relative residual 1e-10, with LU as fallback.
class SparseSolver {
public:
    explicit SparseSolver(int n) : iterative_(n >= 3) {}
    bool solve(const SpMat& A, const Vec& b, Vec& x) {
        if (iterative_) {
            Eigen::BiCGSTAB<SpMat, Eigen::IncompleteLUT<double>> it;
            it.preconditioner().setDroptol(1e-4);
            it.preconditioner().setFillfactor(10);
            it.setTolerance(1e-10);
            it.setMaxIterations(2000);
            it.compute(A);
            if (it.info() == Eigen::Success) {
                x = it.solve(b);
                if (it.info() == Eigen::Success && x.allFinite() && (A * x - b).norm() <= 1e-9 * b.norm()) return true;
            }
        }
        if (!analyzed_) {
            lu_.analyzePattern(A);
            analyzed_ = true;
        }
        lu_.factorize(A);
        if (lu_.info() != Eigen::Success) return false;
        x = lu_.solve(b);
        return lu_.info() == Eigen::Success && x.allFinite();
    }

private:
    bool iterative_;
    bool analyzed_ = false;
    Eigen::SparseLU<SpMat> lu_;
};

double sup_norm(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

bool hessian_pd(const MaskedGridField& f) {
    BallStencil st(f);
    const Vec x = st.gather(f), bv = st.boundary_values(f.boundary);
    for (long u = 0; u < st.unknowns(); ++u) {
        Eigen::LLT<Mat> llt(st.hessian(u, x, bv));
        if (llt.info() != Eigen::Success) return false;
    }
    return true;
}

// Value of the old solution near q from a quadratic Taylor model at the closest masked node.
class TaylorSampler {
public:
    explicit TaylorSampler(const MaskedGridField& f) : f_(f), st_(f) {
        x_ = st_.gather(f);
        bv_ = st_.boundary_values(f.boundary);
    }
    double operator()(const Vec& q) const {
        long node = f_.nearest_node(q);
        if (node < 0 || !f_.mask[node]) node = nearest_masked(q);
        const long u = st_.unknown_of(node);
        const Vec d = q - f_.position(node);
        return x_[u] + st_.gradient(u, x_, bv_).dot(d) + 0.5 * d.dot(st_.hessian(u, x_, bv_) * d);
    }

private:
    long nearest_masked(const Vec& q) const {
        long best = -1;
        double bd = std::numeric_limits<double>::infinity();
        for (long node : st_.nodes()) {
            const double dd = (f_.position(node) - q).squaredNorm();
            if (dd < bd) {
                bd = dd;
                best = node;
            }
        }
        return best;
    }
    const MaskedGridField& f_;
    BallStencil st_;
    Vec x_, bv_;
};

std::string fmt_r(double r) {
    std::ostringstream os;
    os << r;
    return os.str();
}

MaskedGridField harmonic_extension(const MaskedGridField& grid, const std::function<double(const Vec&)>& g) {
    MaskedGridField f = grid;
    f.boundary = g;
    BallStencil st(f);
    const Vec bv = st.boundary_values(f.boundary);
    const long m = st.unknowns();
    std::vector<Triplet> trip;
    Vec rhs = Vec::Zero(m);
    for (long u = 0; u < m; ++u)
        for (int k = 0; k < f.n; ++k) {
            const auto w = st.second(u, k);
            trip.emplace_back(u, u, w.w0);
            for (const auto& [arm, wt] : {std::pair{st.forward(u, k), w.wf}, std::pair{st.backward(u, k), w.wb}}) {
                if (arm.unknown >= 0)
                    trip.emplace_back(u, arm.unknown, wt);
                else
                    rhs[u] -= wt * bv[arm.bpoint];
            }
        }
    SpMat L(m, m);
    L.setFromTriplets(trip.begin(), trip.end());
    L.makeCompressed();
    SparseSolver solver(f.n);
    Vec x;
    if (!solver.solve(L, rhs, x)) throw ConfigError("extend_boundary: Laplace solve failed");
    st.scatter(x, f);
    return f;
}

}  // namespace

double default_A(const BoundaryData& phi) {
    const int n = phi.n;
    return std::pow(static_cast<double>(n), 1.0 / (n - 1)) + 2 * phi.c1 + 1;
}

MaskedGridField extend_boundary(const BoundaryData& phi, const MaskedGridField& grid) {
    if (phi.n != grid.n) throw ConfigError("extend_boundary: dimension mismatch");
    return harmonic_extension(grid, phi.eval);
}

MaskedGridField initial_guess(const MaskedGridField& phi_ext, double A, double* A_used) {
    if (!(A > 0)) throw ConfigError("initial_guess: A must be positive");
    if (!phi_ext.boundary) throw ConfigError("initial_guess: field has no boundary function");
    const double cap = A * 1024;
    for (double a = A; a <= cap; a *= 2) {
        MaskedGridField g = phi_ext;
        auto ext_b = phi_ext.boundary;
        g.boundary = [ext_b, a](const Vec& xi) { return -a * std::sqrt(std::max(0.0, 1 - xi.squaredNorm())) + ext_b(xi); };
        for (long i = 0; i < g.size(); ++i)
            if (g.mask[i]) g.values[i] = -a * w_hat(g.position(i)) + phi_ext.values[i];
        if (hessian_pd(g)) {
            if (A_used) *A_used = a;
            return g;
        }
    }
    throw InitializationError("initial_guess: discrete Hessian not PD for A up to " + fmt_r(cap));
}

MaskedGridField residual(const MaskedGridField& f) {
    DualOperator op(f);
    const auto e = op.evaluate(op.stencil().gather(f), 0.0);
    if (e.bad >= 0) throw EllipticityError("residual: M not positive definite", op.stencil().nodes()[e.bad]);
    MaskedGridField out = f;
    std::fill(out.values.begin(), out.values.end(), 0.0);
    op.stencil().scatter(e.G, out);
    return out;
}

SpMat linearize(const MaskedGridField& f) {
    DualOperator op(f);
    return op.jacobian(op.stencil().gather(f));
}

double special_subsolution(const Vec& xi, const Vec& a, double c) {
    const int n = static_cast<int>(xi.size());
    const double w = std::sqrt(std::max(0.0, 1 - xi.squaredNorm()));
    return -std::pow(static_cast<double>(n), 1.0 / (n - 1)) * w + a.dot(xi) + c;
}

namespace {

MaskedGridField cold_start(const BoundaryData& phi, const MaskedGridField& grid, double A, double& A_used) {
    MaskedGridField ext = extend_boundary(phi, grid);
    MaskedGridField g = initial_guess(ext, A, &A_used);
    // shift so the trace on the sphere |xi| = r is phi itself
    const double s = A_used * std::sqrt(1 - grid.domain_radius * grid.domain_radius);
    for (long i = 0; i < g.size(); ++i)
        if (g.mask[i]) g.values[i] += s;
    g.boundary = phi.eval;
    return g;
}

// The old solution is rescaled radially after removing the -R w_hat part that
// dominates near the sphere; a harmonic correction restores the new trace.
bool warm_from(const BoundaryData& phi, const MaskedGridField& old, const MaskedGridField& grid, double A_cap,
               MaskedGridField& out) {
    if (old.n != grid.n || std::abs(old.h - grid.h) > 1e-15 * grid.h || !old.boundary) return false;
    if (!(old.domain_radius < grid.domain_radius)) return false;
    const int n = grid.n;
    const double R = std::pow(static_cast<double>(n), 1.0 / (n - 1));
    const double r = grid.domain_radius, wr = std::sqrt(1 - r * r);
    const double scale = old.domain_radius / r;
    TaylorSampler sample(old);
    auto regular = [&](const Vec& q) { return sample(q) + R * std::sqrt(std::max(0.0, 1 - q.squaredNorm())); };
    MaskedGridField g = harmonic_extension(
        grid, [&](const Vec& p) { return phi.eval(p) - (regular(p * scale) - R * wr); });
    g.boundary = phi.eval;
    std::vector<double> base(g.size(), 0.0);
    for (long i = 0; i < g.size(); ++i)
        if (g.mask[i]) {
            const Vec xi = g.position(i);
            base[i] = g.values[i] + regular(xi * scale) - R * w_hat(xi);
        }
    for (double alpha = 0; alpha <= A_cap; alpha = alpha == 0 ? 1.0 / 64 : 2 * alpha) {
        for (long i = 0; i < g.size(); ++i)
            if (g.mask[i]) g.values[i] = base[i] - alpha * (w_hat(g.position(i)) - wr);
        if (hessian_pd(g)) {
            out = std::move(g);
            return true;
        }
    }
    return false;
}

}  // namespace

SolveResult newton_solve(const BoundaryData& phi, double r, const SolverConfig& cfg, const MaskedGridField* warm) {
    if (!(r > 0 && r < 1)) throw ConfigError("newton_solve: r must lie in (0, 1)");
    if (!(cfg.h > 0) || cfg.max_iters < 0 || !(cfg.eps_rel >= 0) || !(cfg.shrink > 0 && cfg.shrink < 1))
        throw ConfigError("newton_solve: invalid solver configuration");
    if (cfg.A && !(*cfg.A > 0)) throw ConfigError("newton_solve: A must be positive");
    const MaskedGridField grid = MaskedGridField::ball(phi.n, cfg.h, r);
    const double A = cfg.A ? *cfg.A : default_A(phi);

    SolveResult res;
    res.r = r;
    res.A_used = A;
    if (!(warm && warm_from(phi, *warm, grid, A, res.field))) {
        res.field = cold_start(phi, grid, A, res.A_used);
    } else {
        res.warm_started = true;
    }

    DualOperator op(res.field, cfg.threads);
    const BallStencil& st = op.stencil();
    Vec x = st.gather(res.field);
    auto e = op.evaluate(x, cfg.eps_rel);
    if (e.bad >= 0) throw EllipticityError("newton_solve: start is not convex at r = " + fmt_r(r), st.nodes()[e.bad]);

    SparseSolver solver(phi.n);
    for (int it = 0;; ++it) {
        IterationLog entry{it, sup_norm(e.G), 0.0, e.min_eig};
        if (entry.residual <= cfg.newton_tol) {
            res.log.push_back(entry);
            res.converged = true;
            break;
        }
        if (it >= cfg.max_iters) {
            res.log.push_back(entry);
            res.message = "maximum Newton iterations reached";
            break;
        }
        const SpMat J = op.jacobian(x);
        Vec dx;
        if (!solver.solve(J, -e.G, dx)) {
            res.log.push_back(entry);
            res.message = "Jacobian solve failed";
            break;
        }
        const double merit = e.G.norm();
        double t = 1.0;
        bool accepted = false;
        decltype(e) trial;
        long last_bad = -1;
        while (t >= cfg.min_step) {
            trial = op.evaluate(x + t * dx, cfg.eps_rel);
            if (trial.bad < 0) {
                if (trial.G.norm() <= (1 - 1e-4 * t) * merit) {
                    accepted = true;
                    break;
                }
            } else {
                last_bad = trial.bad;
            }
            t *= cfg.shrink;
        }
        if (!accepted) {
            // take the shortest admissible step even without decrease
            t = cfg.min_step;
            trial = op.evaluate(x + t * dx, cfg.eps_rel);
            if (trial.bad >= 0)
                throw EllipticityError("newton_solve: convexity lost at r = " + fmt_r(r),
                                       st.nodes()[last_bad >= 0 ? last_bad : trial.bad]);
        }
        entry.step = t;
        res.log.push_back(entry);
        x += t * dx;
        e = std::move(trial);
    }
    st.scatter(x, res.field);
    return res;
}

std::vector<SolveResult> continuation_solve(const BoundaryData& phi, const SolverConfig& cfg) {
    if (cfg.r_schedule.empty()) throw ConfigError("continuation_solve: empty r schedule");
    for (size_t i = 0; i < cfg.r_schedule.size(); ++i) {
        const double r = cfg.r_schedule[i];
        if (!(r > 0 && r < 1) || (i && !(r > cfg.r_schedule[i - 1])))
            throw ConfigError("continuation_solve: r schedule must increase inside (0, 1)");
    }
    std::vector<SolveResult> out;
    for (double r : cfg.r_schedule) {
        const MaskedGridField* warm = out.empty() ? nullptr : &out.back().field;
        out.push_back(newton_solve(phi, r, cfg, warm));
        if (!out.back().converged) break;
    }
    return out;
}

}  // namespace mink
