#include "mink/boundary.hpp"

#include "mink/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace mink {

namespace {

constexpr int kCircleSamples = 360;
constexpr int kSphereSamples = 2000;
constexpr double kFdStep = 1e-3;

std::vector<Vec> quadrature_set(int n) {
    std::vector<Vec> out;
    if (n == 2) {
        for (int i = 0; i < kCircleSamples; ++i) {
            const double t = 2 * std::numbers::pi * i / kCircleSamples;
            out.push_back((Vec(2) << std::cos(t), std::sin(t)).finished());
        }
    } else {
        // Fibonacci lattice
        const double ga = std::numbers::pi * (3.0 - std::sqrt(5.0));
        for (int i = 0; i < kSphereSamples; ++i) {
            const double z = 1.0 - (2.0 * i + 1.0) / kSphereSamples;
            const double s = std::sqrt(1 - z * z);
            out.push_back((Vec(3) << s * std::cos(ga * i), s * std::sin(ga * i), z).finished());
        }
    }
    return out;
}

std::vector<Vec> tangent_basis(const Vec& d) {
    const int n = static_cast<int>(d.size());
    std::vector<Vec> t;
    if (n == 2) {
        t.push_back((Vec(2) << -d[1], d[0]).finished());
        return t;
    }
    int a = 0;
    for (int i = 1; i < 3; ++i)
        if (std::abs(d[i]) < std::abs(d[a])) a = i;
    Vec e = Vec::Unit(3, a);
    Vec t1 = (e - e.dot(d) * d).normalized();
    Eigen::Vector3d d3 = d, t13 = t1;
    t.push_back(t1);
    t.push_back(Vec(d3.cross(t13)));
    return t;
}

double circle_angle(const Vec& p) { return std::atan2(p[1], p[0]); }

void require_dim(const Vec& p, int n) {
    if (p.size() != n) throw DomainError("boundary: point has wrong dimension");
}

}  // namespace

double BoundaryData::max_value() const { return *std::max_element(samples.begin(), samples.end()); }
double BoundaryData::min_value() const { return *std::min_element(samples.begin(), samples.end()); }

void finalize_boundary(BoundaryData& b) {
    b.directions = quadrature_set(b.n);
    b.samples.clear();
    double c0 = 0, g1 = 0, g2 = 0;
    const double d = kFdStep;
    for (const Vec& th : b.directions) {
        const double f0 = b.eval(th);
        if (!std::isfinite(f0)) throw ConfigError("boundary data: non-finite value");
        b.samples.push_back(f0);
        c0 = std::max(c0, std::abs(f0));
        auto along = [&](const Vec& t, double s) { return b.eval(std::cos(s) * th + std::sin(s) * t); };
        const auto T = tangent_basis(th);
        const int m = static_cast<int>(T.size());
        Vec grad(m);
        Mat hess(m, m);
        for (int a = 0; a < m; ++a) {
            const double fp = along(T[a], d), fm = along(T[a], -d);
            grad[a] = (fp - fm) / (2 * d);
            hess(a, a) = (fp - 2 * f0 + fm) / (d * d);
        }
        if (m == 2) {
            const Vec p = (T[0] + T[1]) / std::sqrt(2.0), q = (T[0] - T[1]) / std::sqrt(2.0);
            const double dpp = (along(p, d) - 2 * f0 + along(p, -d)) / (d * d);
            const double dqq = (along(q, d) - 2 * f0 + along(q, -d)) / (d * d);
            hess(0, 1) = hess(1, 0) = 0.5 * (dpp - dqq);
        }
        g1 = std::max(g1, grad.norm());
        g2 = std::max(g2, hess.norm());
    }
    b.c1 = c0 + g1;
    b.c2 = c0 + g1 + g2;
    if (!std::isfinite(b.c2)) throw ConfigError("boundary data: C2 estimate not finite");
}

BoundaryData boundary_fourier(const std::vector<std::array<double, 3>>& coeffs, double constant) {
    BoundaryData b;
    b.n = 2;
    b.kind = "fourier";
    b.eval = [coeffs, constant](const Vec& p) {
        require_dim(p, 2);
        const double t = circle_angle(p);
        double s = constant;
        for (const auto& c : coeffs) s += c[1] * std::sin(c[0] * t) + c[2] * std::cos(c[0] * t);
        return s;
    };
    finalize_boundary(b);
    return b;
}

double real_sph_harm(int l, int m, const Vec& dir) {
    if (l < 0 || std::abs(m) > l) throw ConfigError("sphharm: need 0 <= |m| <= l");
    const Vec u = dir.normalized();
    const double z = std::clamp(u[2], -1.0, 1.0);
    const double az = std::atan2(u[1], u[0]);
    const int am = std::abs(m);
    double ratio = 1;  // (l - |m|)! / (l + |m|)!
    for (int i = l - am + 1; i <= l + am; ++i) ratio /= i;
    const double N = std::sqrt((2 * l + 1) / (4 * std::numbers::pi) * ratio);
    const double P = std::assoc_legendre(l, am, z);
    if (m == 0) return N * P;
    const double ang = m > 0 ? std::cos(am * az) : std::sin(am * az);
    return std::sqrt(2.0) * N * P * ang;
}

BoundaryData boundary_sphharm(const std::vector<std::array<double, 3>>& terms, double constant) {
    for (const auto& t : terms) real_sph_harm(static_cast<int>(t[0]), static_cast<int>(t[1]), Vec::Unit(3, 2));
    BoundaryData b;
    b.n = 3;
    b.kind = "sphharm";
    b.eval = [terms, constant](const Vec& p) {
        require_dim(p, 3);
        double s = constant;
        for (const auto& t : terms) s += t[2] * real_sph_harm(static_cast<int>(t[0]), static_cast<int>(t[1]), p);
        return s;
    };
    finalize_boundary(b);
    return b;
}

BoundaryData boundary_const(int n, double c) {
    if (n != 2 && n != 3) throw ConfigError("boundary: n must be 2 or 3");
    BoundaryData b;
    b.n = n;
    b.kind = "const";
    b.eval = [c, n](const Vec& p) {
        require_dim(p, n);
        return c;
    };
    finalize_boundary(b);
    return b;
}

BoundaryData boundary_hyperboloid(double R, const Vec& bvec, double c) {
    const int n = static_cast<int>(bvec.size());
    if (n != 2 && n != 3) throw ConfigError("boundary: n must be 2 or 3");
    if (!(R > 0)) throw ConfigError("hyperboloid: R must be positive");
    BoundaryData b;
    b.n = n;
    b.kind = "hyperboloid";
    b.exact = [R, bvec, c](const Vec& xi) {
        return -R * std::sqrt(std::max(0.0, 1 - xi.squaredNorm())) + bvec.dot(xi) + c;
    };
    b.eval = b.exact;
    finalize_boundary(b);
    return b;
}

BoundaryData boundary_tabulated(int n, const std::string& path) {
    if (n != 2 && n != 3) throw ConfigError("boundary: n must be 2 or 3");
    std::ifstream in(path);
    if (!in) throw ConfigError("tabulated boundary: cannot open " + path);
    std::vector<Vec> dirs;
    std::vector<double> vals;
    std::string line;
    const int cols = n == 2 ? 2 : 4;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::vector<double> row;
        std::string cell;
        bool numeric = true;
        while (std::getline(ss, cell, ',')) {
            try {
                size_t pos = 0;
                row.push_back(std::stod(cell, &pos));
            } catch (const std::exception&) {
                numeric = false;
                break;
            }
        }
        if (!numeric && dirs.empty() && vals.empty()) continue;  // header
        if (!numeric || static_cast<int>(row.size()) != cols)
            throw ConfigError("tabulated boundary: bad row '" + line + "'");
        if (n == 2) {
            dirs.push_back((Vec(2) << std::cos(row[0]), std::sin(row[0])).finished());
            vals.push_back(row[1]);
        } else {
            Vec d(3);
            d << row[0], row[1], row[2];
            if (!(d.norm() > 0)) throw ConfigError("tabulated boundary: zero direction");
            dirs.push_back(d.normalized());
            vals.push_back(row[3]);
        }
    }
    if (dirs.size() < 4) throw ConfigError("tabulated boundary: need at least 4 samples");
    BoundaryData b;
    b.n = n;
    b.kind = "tabulated";
    if (n == 2) {
        std::vector<std::pair<double, double>> tv;
        for (size_t i = 0; i < dirs.size(); ++i) {
            double t = circle_angle(dirs[i]);
            if (t < 0) t += 2 * std::numbers::pi;
            tv.emplace_back(t, vals[i]);
        }
        std::sort(tv.begin(), tv.end());
        // periodic Catmull-Rom spline in the angle
        b.eval = [tv](const Vec& p) {
            require_dim(p, 2);
            const double tau = 2 * std::numbers::pi;
            double t = circle_angle(p);
            if (t < 0) t += tau;
            const long m = static_cast<long>(tv.size());
            long i = std::upper_bound(tv.begin(), tv.end(), std::make_pair(t, -HUGE_VAL)) - tv.begin() - 1;
            auto at = [&](long k) {
                const long w = ((k % m) + m) % m;
                const double shift = std::floor(static_cast<double>(k) / m) * tau;
                return std::make_pair(tv[w].first + shift, tv[w].second);
            };
            auto [t1, y1] = at(i);
            auto [t2, y2] = at(i + 1);
            auto [t0, y0] = at(i - 1);
            auto [t3, y3] = at(i + 2);
            const double s = (t - t1) / (t2 - t1);
            const double m1 = (y2 - y0) / (t2 - t0) * (t2 - t1), m2 = (y3 - y1) / (t3 - t1) * (t2 - t1);
            const double s2 = s * s, s3 = s2 * s;
            return (2 * s3 - 3 * s2 + 1) * y1 + (s3 - 2 * s2 + s) * m1 + (-2 * s3 + 3 * s2) * y2 + (s3 - s2) * m2;
        };
    } else {
        // inverse-distance weighting over the 6 nearest samples
        b.eval = [dirs, vals](const Vec& p) {
            require_dim(p, 3);
            const Vec u = p.normalized();
            std::vector<std::pair<double, size_t>> d;
            for (size_t i = 0; i < dirs.size(); ++i) d.emplace_back((dirs[i] - u).squaredNorm(), i);
            const size_t k = std::min<size_t>(6, d.size());
            std::partial_sort(d.begin(), d.begin() + k, d.end());
            if (d[0].first < 1e-24) return vals[d[0].second];
            double sw = 0, s = 0;
            for (size_t i = 0; i < k; ++i) {
                const double w = 1.0 / d[i].first;
                sw += w;
                s += w * vals[d[i].second];
            }
            return s / sw;
        };
    }
    finalize_boundary(b);
    return b;
}

}  // namespace mink
