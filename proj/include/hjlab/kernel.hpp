#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "hjlab/grid.hpp"
#include "hjlab/lax_oleinik.hpp"
#include "hjlab/potential.hpp"

// One-kick smoothing operator at viscosity nu.  The kernel against a
// source density u is
//   (L u)(x) = integral of K(y, x) u(y) dy,
//   K(y, x)  = (4 pi nu)^{-d/2} * sum over integer shifts k of
//              exp(-h(y + k, x) / (2 nu)),
// discretized by the trapezoid rule on the shared grid (weight h^d).  The
// conjugated variant multiplies by exp((psi(x) - psi(y)) / (2 nu)), which
// normalizes the column minimum of the effective cost to zero.
//
// Everything is stored and applied in log space; per-column maxima are
// subtracted before exponentiating.

namespace hjlab {

// worker threads used by kernel assembly and application (default 1);
// results do not depend on the count
void set_threads(int n);
int threads();

struct KernelOperator {
    GridSpec spec;
    double nu = 0.0;
    bool conjugated = false;
    MatrixXd log_kernel;  // entry (y, x); columns are destination points

    double weight() const { return spec.cell_volume(); }
};

// psi == nullptr builds the plain kernel, otherwise the conjugated one.
// Throws std::invalid_argument for nu <= 0.  The shift window is the
// smallest K with (K - sqrt(d)/2)^2 / (4 nu) > 45.
KernelOperator build_kernel(const GridSpec& spec, const Potential& F, double nu,
                            const TorusField* psi = nullptr);

// log(L u) from log u; throws std::invalid_argument on non-finite input
TorusField apply_log(const KernelOperator& op, const TorusField& log_u);

// plain application for cross-checks at moderate viscosity
TorusField apply_linear(const KernelOperator& op, const TorusField& u);

struct DomainPartition {
    GridSpec spec;
    double r_U = 0.1;
    std::vector<char> in_U;  // nodes within r_U of the minimizer image
    TorusField chi;          // 1 on U, nu^{-d/2} outside
    TorusField log_chi;
    bool whole_torus = false;
};

// U inflates the closure of the backward-minimizer image by r_U
DomainPartition build_domain_partition(const WeakKamSolution& wk, double nu,
                                       double r_U = 0.1);

// r_floor widened to cover the one-kick kernel width sqrt(4 nu)
double core_radius_for(double nu, double r_floor);

struct PartitionTrace {
    std::vector<TorusField> log_iter;  // log L^n 1, n = 0 .. n_max
    std::vector<double> log_q;         // grid minima (lower envelope)
    std::vector<double> growth;        // log_q[n+1] - log_q[n]
    std::vector<double> ratio_hi;      // max of L^n 1 / (Q_n chi)
};

PartitionTrace partition_trace(const KernelOperator& op,
                               const DomainPartition& part, int n_max);

struct StationaryLogSolution {
    TorusField log_u;   // normalized to min = 0
    TorusField psi_nu;  // -2 nu log u
    double residual = 0.0;
    int iterations = 0;
};

// power iteration in log space on the plain kernel; throws
// std::runtime_error on non-convergence
StationaryLogSolution stationary_log_solution(const KernelOperator& op,
                                              double tol = 1e-10,
                                              int max_iter = 2000);

struct LaplaceCheck {
    double log_quadrature = 0.0;  // log L^n 1 (x) by iterated quadrature
    double log_laplace = 0.0;     // -(1/2) log det of the action Hessian
    double log_ratio = 0.0;
};

// n * d is capped at 12; log_det_hessian comes from the Hessian module
LaplaceCheck laplace_hessian_crosscheck(const KernelOperator& op,
                                        std::int64_t x_idx, int n,
                                        double log_det_hessian);

}  // namespace hjlab
