#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "hjlab/grid.hpp"
#include "hjlab/potential.hpp"
#include "hjlab/twist.hpp"

// One-step variational (min-plus) operator for the kicked system and the
// fixed point it contracts to.
//
//   step cost      h(y, x) = |x - y|^2 / 2 + F(y)   on lifts in R^d
//   periodic cost  A(y, x) = min over integer shifts k of h(y + k, x)
//   operator       (T phi)(x) = min over y of  phi(y) + A(y, x)
//
// The solver iterates phi <- T phi - (T phi)(0) until the residual
// sup-norm-mod-constants of (T phi - phi) drops below tolerance.  The
// minimizer map x -> ybar(x) is recorded with one quadratic polish around
// the grid argmin, so ybar is not restricted to grid nodes.

namespace hjlab {

double generating_function(const VectorXd& y, const VectorXd& x,
                           const Potential& F);

// exact min over integer shifts; reduces to per-axis nearest representative
double periodic_action(const VectorXd& y, const VectorXd& x, const Potential& F);

struct MinimizerInfo {
    VectorXd ybar;          // polished argmin, lifted next to x
    std::int64_t grid_idx;  // grid argmin (smallest index on ties)
    double value;           // polished minimum of phi + A
    int ties;               // extra grid nodes attaining the grid minimum
};

// one backward minimization at an arbitrary point x (lifted internally)
MinimizerInfo backward_minimizer(const VectorXd& x, const TorusField& phi,
                                 const Potential& F);

struct LaxOleinikResult {
    TorusField values;                    // T phi on the grid
    MatrixXd ybar;                        // total x d, lifts next to each node
    std::vector<std::int64_t> argmin_idx;
    std::int64_t tie_count = 0;
};

LaxOleinikResult lax_oleinik_apply(const TorusField& phi, const Potential& F);

struct WeakKamOptions {
    double tol = 1e-9;    // on sup-norm-mod-constants of T phi - phi
    int max_iter = 5000;
};

struct WeakKamSolution {
    TorusField psi;                  // fixed point, psi(0) = 0, clamped >= 0
    std::vector<TorusField> grad_psi;  // centered differences, per axis
    MatrixXd ybar;                   // backward minimizer map at grid nodes
    std::vector<std::int64_t> argmin_idx;
    std::vector<char> cut_mask;      // 1 where the second-difference probe spikes
    std::vector<double> residuals;   // per-iteration residual history
    double residual = 0.0;
    int iterations = 0;
    std::int64_t tie_count = 0;
    double lip = 0.0;                // max grid slope of psi
};

// throws std::runtime_error (with the final residual) on non-convergence
WeakKamSolution solve_weak_kam(const GridSpec& spec, const Potential& F,
                               const WeakKamOptions& opt = {});

// variant starting from a caller-supplied initial field
WeakKamSolution solve_weak_kam_from(const TorusField& phi0, const Potential& F,
                                    const WeakKamOptions& opt = {});

// signed max over the grid of the largest second-difference eigenvalue;
// an upper estimate for the semi-concavity constant
double semiconcavity_probe(const TorusField& f);

struct ContractionReport {
    double kappa_sq_emp = 0.0;    // max of psi(ybar(x)) / psi(x) off the floor
    double kappa0_pred = 0.0;     // from the linearization at the origin
    double kappa0_sq_pred = 0.0;
    double quadratic_lower_c = 0.0;  // largest c with psi >= c |x|_T^2
    double eps_floor = 0.0;          // 10 spacing^2, denominator cut-off
    std::vector<double> near_zero_ratios;  // at the 10 nodes nearest 0
    double delta_far = 0.0;       // min step cost over |x|_T >= 1/4
    double far_ratio_max = 0.0;   // max ratio over the same region
};

// throws std::runtime_error if the contraction estimate reaches 1
ContractionReport contraction_report(const WeakKamSolution& wk,
                                     const Potential& F,
                                     const HyperbolicData& hyp);

// backward orbit seeded with the variational momentum x - ybar(x);
// see twist.hpp for the iteration itself
BackwardOrbit backward_orbit_from(const WeakKamSolution& wk, std::int64_t idx,
                                  int n, const Potential& F);

}  // namespace hjlab
