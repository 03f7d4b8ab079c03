#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

// Uniform periodic grids on the unit torus in dimension 1 or 2, scalar
// fields living on them, and the norms used throughout the project.
//
// Conventions:
//  - axis coordinates live in [0,1), spacing h = 1/n per axis
//  - d = 2 flattening is row-major: idx = i0 * n + i1
//  - all fields share the grid of their GridSpec; binary operations
//    require identical specs

namespace hjlab {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Index = std::int64_t;

struct GridSpec {
    int d = 1;           // 1 or 2
    int n_per_axis = 8;  // at least 8

    GridSpec() = default;
    GridSpec(int dim, int n);

    double spacing() const { return 1.0 / n_per_axis; }
    std::int64_t total() const;
    double cell_volume() const;  // spacing^d, quadrature weight

    // wrap a (possibly negative) axis index into [0, n)
    int wrap(int i) const;

    std::int64_t index(int i0, int i1 = 0) const;
    void unravel(std::int64_t idx, int& i0, int& i1) const;

    // coordinates of a grid node, each component in [0,1)
    VectorXd coords(std::int64_t idx) const;

    // node nearest to an arbitrary point (coordinates taken mod 1)
    std::int64_t nearest_index(const VectorXd& x) const;

    bool operator==(const GridSpec& o) const {
        return d == o.d && n_per_axis == o.n_per_axis;
    }
};

struct TorusField {
    GridSpec spec;
    VectorXd values;

    TorusField() = default;
    explicit TorusField(const GridSpec& s, double fill = 0.0)
        : spec(s), values(VectorXd::Constant(s.total(), fill)) {}
    TorusField(const GridSpec& s, VectorXd v) : spec(s), values(std::move(v)) {}

    double& operator[](std::int64_t i) { return values[i]; }
    double operator[](std::int64_t i) const { return values[i]; }
};

// distance on the flat torus: per-axis difference reduced to [-1/2, 1/2)
double torus_distance(const VectorXd& a, const VectorXd& b);

// representative of a-b with every component in [-1/2, 1/2)
VectorXd torus_delta(const VectorXd& a, const VectorXd& b);

// reduce every component into [0, 1)
VectorXd torus_canonical(const VectorXd& x);

// linear (bilinear for d = 2) interpolation of a grid field at x
double interpolate(const TorusField& f, const VectorXd& x);

// sup norm modulo additive constants: (max f - min f) / 2.
// The optimal constant shift is -(max+min)/2.
double sup_norm_mod_const(const TorusField& f);

// sup of |f| / (1 + beta V).  V must be nonnegative, beta >= 0.
double weighted_norm(const TorusField& f, const TorusField& V, double beta);

// min over constants c of weighted_norm(f + c).  The objective is convex
// in c and the minimizer lies in [-max f, -min f]; located by ternary
// search to absolute tolerance 1e-12 on c.
double weighted_norm_mod_const(const TorusField& f, const TorusField& V,
                               double beta);

// centered second-order finite-difference gradient, one field per axis
std::vector<TorusField> gradient_fd(const TorusField& f);

// discrete Laplacian-style probe: largest eigenvalue of the centered
// second-difference Hessian, per node (d=1: the second difference itself)
TorusField second_difference_probe(const TorusField& f);

}  // namespace hjlab
