#include "hjlab/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace hjlab {

GridSpec::GridSpec(int dim, int n) : d(dim), n_per_axis(n) {
    if (d != 1 && d != 2)
        throw std::invalid_argument("GridSpec: dimension must be 1 or 2");
    if (n_per_axis < 8)
        throw std::invalid_argument("GridSpec: need at least 8 nodes per axis");
}

std::int64_t GridSpec::total() const {
    std::int64_t t = 1;
    for (int k = 0; k < d; ++k) t *= n_per_axis;
    return t;
}

double GridSpec::cell_volume() const {
    double v = 1.0;
    for (int k = 0; k < d; ++k) v *= spacing();
    return v;
}

int GridSpec::wrap(int i) const {
    int m = i % n_per_axis;
    return m < 0 ? m + n_per_axis : m;
}

std::int64_t GridSpec::index(int i0, int i1) const {
    if (d == 1) return wrap(i0);
    return static_cast<std::int64_t>(wrap(i0)) * n_per_axis + wrap(i1);
}

void GridSpec::unravel(std::int64_t idx, int& i0, int& i1) const {
    if (d == 1) {
        i0 = static_cast<int>(idx);
        i1 = 0;
    } else {
        i0 = static_cast<int>(idx / n_per_axis);
        i1 = static_cast<int>(idx % n_per_axis);
    }
}

VectorXd GridSpec::coords(std::int64_t idx) const {
    int i0, i1;
    unravel(idx, i0, i1);
    VectorXd x(d);
    x[0] = i0 * spacing();
    if (d == 2) x[1] = i1 * spacing();
    return x;
}

std::int64_t GridSpec::nearest_index(const VectorXd& x) const {
    int idx[2] = {0, 0};
    for (int k = 0; k < d; ++k) {
        double c = x[k] - std::floor(x[k]);
        idx[k] = wrap(static_cast<int>(std::lround(c * n_per_axis)));
    }
    return index(idx[0], idx[1]);
}

static double axis_delta(double a, double b) {
    double t = a - b;
    t -= std::round(t);  // now in [-1/2, 1/2]
    return t;
}

VectorXd torus_delta(const VectorXd& a, const VectorXd& b) {
    VectorXd t(a.size());
    for (int k = 0; k < a.size(); ++k) t[k] = axis_delta(a[k], b[k]);
    return t;
}

double torus_distance(const VectorXd& a, const VectorXd& b) {
    return torus_delta(a, b).norm();
}

VectorXd torus_canonical(const VectorXd& x) {
    VectorXd c(x.size());
    for (int k = 0; k < x.size(); ++k) {
        c[k] = x[k] - std::floor(x[k]);
        if (c[k] >= 1.0) c[k] = 0.0;  // guard against floor rounding
    }
    return c;
}

double interpolate(const TorusField& f, const VectorXd& x) {
    const GridSpec& g = f.spec;
    const int n = g.n_per_axis;
    double u[2] = {0.0, 0.0};
    int base[2] = {0, 0};
    double frac[2] = {0.0, 0.0};
    for (int k = 0; k < g.d; ++k) {
        u[k] = (x[k] - std::floor(x[k])) * n;
        base[k] = static_cast<int>(std::floor(u[k]));
        frac[k] = u[k] - base[k];
    }
    if (g.d == 1) {
        double f0 = f[g.index(base[0])];
        double f1 = f[g.index(base[0] + 1)];
        return f0 + frac[0] * (f1 - f0);
    }
    double f00 = f[g.index(base[0], base[1])];
    double f01 = f[g.index(base[0], base[1] + 1)];
    double f10 = f[g.index(base[0] + 1, base[1])];
    double f11 = f[g.index(base[0] + 1, base[1] + 1)];
    double a = f00 + frac[1] * (f01 - f00);
    double b = f10 + frac[1] * (f11 - f10);
    return a + frac[0] * (b - a);
}

double sup_norm_mod_const(const TorusField& f) {
    return 0.5 * (f.values.maxCoeff() - f.values.minCoeff());
}

static void check_weight(const TorusField& f, const TorusField& V,
                         double beta) {
    if (!(f.spec == V.spec))
        throw std::invalid_argument("weighted_norm: field and weight grids differ");
    if (beta < 0.0)
        throw std::invalid_argument("weighted_norm: beta must be nonnegative");
    if ((V.values.array() < 0.0).any())
        throw std::invalid_argument("weighted_norm: weight V has negative entries");
}

double weighted_norm(const TorusField& f, const TorusField& V, double beta) {
    check_weight(f, V, beta);
    return (f.values.array().abs() / (1.0 + beta * V.values.array())).maxCoeff();
}

double weighted_norm_mod_const(const TorusField& f, const TorusField& V,
                               double beta) {
    check_weight(f, V, beta);
    const auto w = (1.0 + beta * V.values.array()).inverse().eval();
    auto objective = [&](double c) {
        return ((f.values.array() + c).abs() * w).maxCoeff();
    };
    // objective is a max of |affine| functions of c, hence convex
    double lo = -f.values.maxCoeff();
    double hi = -f.values.minCoeff();
    while (hi - lo > 1e-12) {
        double m1 = lo + (hi - lo) / 3.0;
        double m2 = hi - (hi - lo) / 3.0;
        if (objective(m1) <= objective(m2))
            hi = m2;
        else
            lo = m1;
    }
    return objective(0.5 * (lo + hi));
}

std::vector<TorusField> gradient_fd(const TorusField& f) {
    const GridSpec& g = f.spec;
    const double inv2h = 0.5 / g.spacing();
    std::vector<TorusField> grad(g.d, TorusField(g));
    for (std::int64_t idx = 0; idx < g.total(); ++idx) {
        int i0, i1;
        g.unravel(idx, i0, i1);
        grad[0][idx] = (f[g.index(i0 + 1, i1)] - f[g.index(i0 - 1, i1)]) * inv2h;
        if (g.d == 2)
            grad[1][idx] =
                (f[g.index(i0, i1 + 1)] - f[g.index(i0, i1 - 1)]) * inv2h;
    }
    return grad;
}

TorusField second_difference_probe(const TorusField& f) {
    const GridSpec& g = f.spec;
    const double invh2 = 1.0 / (g.spacing() * g.spacing());
    TorusField probe(g);
    for (std::int64_t idx = 0; idx < g.total(); ++idx) {
        int i0, i1;
        g.unravel(idx, i0, i1);
        double dxx = (f[g.index(i0 + 1, i1)] - 2.0 * f[idx] +
                      f[g.index(i0 - 1, i1)]) * invh2;
        if (g.d == 1) {
            probe[idx] = dxx;
            continue;
        }
        double dyy = (f[g.index(i0, i1 + 1)] - 2.0 * f[idx] +
                      f[g.index(i0, i1 - 1)]) * invh2;
        double dxy = (f[g.index(i0 + 1, i1 + 1)] - f[g.index(i0 + 1, i1 - 1)] -
                      f[g.index(i0 - 1, i1 + 1)] + f[g.index(i0 - 1, i1 - 1)]) *
                     invh2 * 0.25;
        // largest eigenvalue of [[dxx, dxy], [dxy, dyy]]
        double tr = 0.5 * (dxx + dyy);
        double disc = std::sqrt(0.25 * (dxx - dyy) * (dxx - dyy) + dxy * dxy);
        probe[idx] = tr + disc;
    }
    return probe;
}

}  // namespace hjlab
