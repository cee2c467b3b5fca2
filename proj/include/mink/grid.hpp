#pragma once

#include "mink/symfunc.hpp"

#include <array>
#include <functional>
#include <vector>

namespace mink {

// Scalar field on a Cartesian lattice clipped to the open ball |xi| < radius.
// Lattice index i in [-N, N]^n sits at xi = origin + (i + N) h with origin = -N h.
struct MaskedGridField {
    int n = 2;
    double h = 0;
    double domain_radius = 0;
    int N = 0;
    Vec origin;
    std::vector<int> extents;
    std::vector<char> mask;
    std::vector<double> values;
    // Dirichlet trace on the sphere |xi| = domain_radius, used by boundary stencils.
    std::function<double(const Vec&)> boundary;

    static MaskedGridField ball(int n, double h, double radius);

    long size() const { return static_cast<long>(values.size()); }
    bool inside(long node) const { return mask[node] != 0; }
    std::array<int, 3> index(long node) const;  // signed lattice index, unused slots 0
    long node(const std::array<int, 3>& idx) const;  // -1 when off the lattice
    Vec position(long node) const;
    std::vector<long> masked_nodes() const;
    long nearest_node(const Vec& xi) const;  // lattice node closest to xi, -1 off lattice
};

// Shortley-Weller stencils for the masked ball. Directions are the n axes
// followed by the diagonals e_k + e_l and e_k - e_l for k < l.
class BallStencil {
public:
    struct Arm {
        long unknown = -1;  // -1 means a boundary intersection point
        int bpoint = -1;
        double dist = 0;
    };
    struct Weights {
        double w0, wf, wb;
    };

    explicit BallStencil(const MaskedGridField& grid);

    int n() const { return n_; }
    long unknowns() const { return static_cast<long>(nodes_.size()); }
    int directions() const { return static_cast<int>(dirs_.size()); }
    const std::vector<long>& nodes() const { return nodes_; }
    long unknown_of(long node) const { return unknown_of_[node]; }
    const std::vector<Vec>& boundary_points() const { return bpoints_; }
    bool full(long u) const { return full_[u] != 0; }
    const Arm& forward(long u, int d) const { return arms_[(u * dirs_.size() + d) * 2]; }
    const Arm& backward(long u, int d) const { return arms_[(u * dirs_.size() + d) * 2 + 1]; }
    const Vec& direction(int d) const { return dirs_[d]; }
    // index of the diagonal pair (k, l), k < l: plus direction; minus is +1
    int diagonal(int k, int l) const;

    // second difference along direction d (unit step in the direction's metric)
    Weights second(long u, int d) const;
    // first difference along axis d
    Weights first(long u, int d) const;

    Vec boundary_values(const std::function<double(const Vec&)>& phi) const;
    Vec gather(const MaskedGridField& f) const;
    void scatter(const Vec& x, MaskedGridField& f) const;

    double arm_value(const Arm& a, const Vec& x, const Vec& bvals) const {
        return a.unknown >= 0 ? x[a.unknown] : bvals[a.bpoint];
    }
    Mat hessian(long u, const Vec& x, const Vec& bvals) const;
    Vec gradient(long u, const Vec& x, const Vec& bvals) const;

private:
    int n_;
    std::vector<Vec> dirs_;
    std::vector<long> nodes_;
    std::vector<long> unknown_of_;
    std::vector<Vec> bpoints_;
    std::vector<char> full_;
    std::vector<Arm> arms_;
};

}  // namespace mink
