#include "mink/grid.hpp"

#include "mink/errors.hpp"

#include <cmath>

namespace mink {

MaskedGridField MaskedGridField::ball(int n, double h, double radius) {
    if (n != 2 && n != 3) throw ConfigError("grid: n must be 2 or 3");
    if (!(h > 0)) throw ConfigError("grid: spacing must be positive");
    if (!(radius > 0)) throw ConfigError("grid: radius must be positive");
    MaskedGridField f;
    f.n = n;
    f.h = h;
    f.domain_radius = radius;
    f.N = static_cast<int>(std::floor(radius / h)) + 1;
    f.origin = Vec::Constant(n, -f.N * h);
    f.extents.assign(n, 2 * f.N + 1);
    long total = 1;
    for (int e : f.extents) total *= e;
    f.mask.assign(total, 0);
    f.values.assign(total, 0.0);
    // nodes within 1e-6 h of the sphere count as boundary points
    const double lim = radius - 1e-6 * h;
    for (long i = 0; i < total; ++i) f.mask[i] = f.position(i).norm() < lim;
    return f;
}

std::array<int, 3> MaskedGridField::index(long node) const {
    std::array<int, 3> idx{0, 0, 0};
    const int e = 2 * N + 1;
    for (int d = n - 1; d >= 0; --d) {
        idx[d] = static_cast<int>(node % e) - N;
        node /= e;
    }
    return idx;
}

long MaskedGridField::node(const std::array<int, 3>& idx) const {
    const int e = 2 * N + 1;
    long k = 0;
    for (int d = 0; d < n; ++d) {
        if (idx[d] < -N || idx[d] > N) return -1;
        k = k * e + (idx[d] + N);
    }
    return k;
}

Vec MaskedGridField::position(long node) const {
    auto idx = index(node);
    Vec p(n);
    for (int d = 0; d < n; ++d) p[d] = idx[d] * h;
    return p;
}

std::vector<long> MaskedGridField::masked_nodes() const {
    std::vector<long> out;
    for (long i = 0; i < size(); ++i)
        if (mask[i]) out.push_back(i);
    return out;
}

long MaskedGridField::nearest_node(const Vec& xi) const {
    std::array<int, 3> idx{0, 0, 0};
    for (int d = 0; d < n; ++d) idx[d] = static_cast<int>(std::lround(xi[d] / h));
    return node(idx);
}

BallStencil::BallStencil(const MaskedGridField& g) : n_(g.n) {
    for (int k = 0; k < n_; ++k) dirs_.push_back(Vec::Unit(n_, k));
    for (int k = 0; k < n_; ++k)
        for (int l = k + 1; l < n_; ++l) {
            dirs_.push_back(Vec::Unit(n_, k) + Vec::Unit(n_, l));
            dirs_.push_back(Vec::Unit(n_, k) - Vec::Unit(n_, l));
        }
    unknown_of_.assign(g.size(), -1);
    for (long i = 0; i < g.size(); ++i)
        if (g.mask[i]) {
            unknown_of_[i] = static_cast<long>(nodes_.size());
            nodes_.push_back(i);
        }
    if (nodes_.empty()) throw ConfigError("grid: empty mask");
    const double r = g.domain_radius;
    arms_.resize(nodes_.size() * dirs_.size() * 2);
    full_.assign(nodes_.size(), 1);
    for (size_t u = 0; u < nodes_.size(); ++u) {
        const auto idx = g.index(nodes_[u]);
        const Vec p = g.position(nodes_[u]);
        for (size_t d = 0; d < dirs_.size(); ++d) {
            for (int s = 0; s < 2; ++s) {
                const double sign = s == 0 ? 1.0 : -1.0;
                std::array<int, 3> nb = idx;
                for (int k = 0; k < n_; ++k) nb[k] += static_cast<int>(sign * dirs_[d][k]);
                const long node = g.node(nb);
                Arm& arm = arms_[(u * dirs_.size() + d) * 2 + s];
                const double step = g.h * dirs_[d].norm();
                if (node >= 0 && g.mask[node]) {
                    arm.unknown = unknown_of_[node];
                    arm.dist = step;
                    continue;
                }
                const Vec e = sign * dirs_[d].normalized();
                const double pe = p.dot(e);
                const double t = -pe + std::sqrt(pe * pe + (r * r - p.squaredNorm()));
                arm.dist = t;
                arm.bpoint = static_cast<int>(bpoints_.size());
                Vec q = p + t * e;
                bpoints_.push_back(q * (r / q.norm()));
                full_[u] = 0;
            }
        }
    }
}

int BallStencil::diagonal(int k, int l) const {
    int d = n_;
    for (int a = 0; a < n_; ++a)
        for (int b = a + 1; b < n_; ++b) {
            if (a == k && b == l) return d;
            d += 2;
        }
    throw DomainError("stencil: bad diagonal pair");
}

BallStencil::Weights BallStencil::second(long u, int d) const {
    const double a = forward(u, d).dist, b = backward(u, d).dist;
    const double wf = 2.0 / (a * (a + b)), wb = 2.0 / (b * (a + b));
    return {-(wf + wb), wf, wb};
}

BallStencil::Weights BallStencil::first(long u, int d) const {
    const double a = forward(u, d).dist, b = backward(u, d).dist;
    const double wf = b / (a * (a + b)), wb = -a / (b * (a + b));
    return {-(wf + wb), wf, wb};
}

Vec BallStencil::boundary_values(const std::function<double(const Vec&)>& phi) const {
    Vec v(bpoints_.size());
    if (!phi && !bpoints_.empty()) throw ConfigError("grid: boundary function missing");
    for (size_t i = 0; i < bpoints_.size(); ++i) v[i] = phi(bpoints_[i]);
    return v;
}

Vec BallStencil::gather(const MaskedGridField& f) const {
    Vec x(nodes_.size());
    for (size_t u = 0; u < nodes_.size(); ++u) x[u] = f.values[nodes_[u]];
    return x;
}

void BallStencil::scatter(const Vec& x, MaskedGridField& f) const {
    for (size_t u = 0; u < nodes_.size(); ++u) f.values[nodes_[u]] = x[u];
}

Mat BallStencil::hessian(long u, const Vec& x, const Vec& bvals) const {
    auto d2 = [&](int d) {
        const Weights w = second(u, d);
        return w.w0 * x[u] + w.wf * arm_value(forward(u, d), x, bvals) + w.wb * arm_value(backward(u, d), x, bvals);
    };
    Mat H(n_, n_);
    for (int k = 0; k < n_; ++k) H(k, k) = d2(k);
    int d = n_;
    for (int k = 0; k < n_; ++k)
        for (int l = k + 1; l < n_; ++l, d += 2) H(k, l) = H(l, k) = 0.5 * (d2(d) - d2(d + 1));
    return H;
}

Vec BallStencil::gradient(long u, const Vec& x, const Vec& bvals) const {
    Vec g(n_);
    for (int k = 0; k < n_; ++k) {
        const Weights w = first(u, k);
        g[k] = w.w0 * x[u] + w.wf * arm_value(forward(u, k), x, bvals) + w.wb * arm_value(backward(u, k), x, bvals);
    }
    return g;
}

}  // namespace mink
