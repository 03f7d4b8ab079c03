#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "hjlab/grid.hpp"
#include "hjlab/lax_oleinik.hpp"
#include "hjlab/potential.hpp"
#include "hjlab/twist.hpp"

// Discrete action over n-step backward paths ending at a grid point x,
//   H(X) = sum of h(x_i, x_{i+1}) + psi(x_{-n}) - psi(x),
// its minimizing path, and the block-tridiagonal Hessian at the minimum:
// diagonal blocks 2I + hess F, except the deep block I + hess(F + psi),
// off-diagonal blocks -I.
//
// Backward iteration of the twist map is exponentially unstable in the
// contracting direction, so paths are built by composing the variational
// backward minimizer and then polished by Newton on the discrete
// Euler-Lagrange system (the Hessian above is the Newton matrix).
//
// Determinants are kept as (log magnitude, sign) pairs.  Three routes:
//   dense     - pivoted LU of the assembled matrix
//   transfer  - top-left block of the product of 2d x 2d companion blocks
//   product   - per-step factors I + hess F + S_i, where S_i follows the
//               curvature recursion S_{i+1} = I - (I + hess F + S_i)^{-1}
//               seeded with the deep-end curvature of psi
// The recursion is the derivative of the one-step graph transform; its
// iterates track hess psi along the orbit (cross-checked in tests).

namespace hjlab {

struct ActionPath {
    std::vector<VectorXd> points;  // lifts, points[0] = deep end, points[n] = x
    std::int64_t x_idx = 0;
    int n = 0;
    double H_value = 0.0;
    double el_residual = 0.0;  // max interior Euler-Lagrange defect
    int newton_iterations = 0;
};

// psi and its derivatives at an arbitrary smooth-region point: the deep
// quadratic model near the origin, a local polynomial fit elsewhere.
// Throws std::runtime_error if the fit window touches the cut mask.
double psi_value_at(const WeakKamSolution& wk, const HyperbolicData& hyp,
                    const VectorXd& z);
VectorXd psi_gradient_at(const WeakKamSolution& wk, const HyperbolicData& hyp,
                         const VectorXd& z);
MatrixXd psi_hessian_at(const WeakKamSolution& wk, const HyperbolicData& hyp,
                        const VectorXd& z);

// action of an explicit path (same end conventions as ActionPath)
double path_action(const std::vector<VectorXd>& pts, const Potential& F,
                   const WeakKamSolution& wk, const HyperbolicData& hyp);

ActionPath build_action_path(const WeakKamSolution& wk, const HyperbolicData& hyp,
                             const Potential& F, std::int64_t x_idx, int n);

struct HessianAssembly {
    MatrixXd A;        // (n d) x (n d), symmetric
    MatrixXd deep_curvature;  // hess psi used in the deep diagonal block
    int n = 0;
    int d = 0;
};

HessianAssembly assemble_hessian(const ActionPath& path, const Potential& F,
                                 const WeakKamSolution& wk,
                                 const HyperbolicData& hyp);

struct LogDet {
    double log_abs = 0.0;
    double sign = 1.0;
};

// pivoted LU; dimension capped at 400
LogDet det_dense(const MatrixXd& A);

LogDet det_transfer(const HessianAssembly& asm_);

// per-step factors I + hess F + S_i along the path (deep end first)
std::vector<MatrixXd> orbit_factors(const ActionPath& path, const Potential& F,
                                    const WeakKamSolution& wk,
                                    const HyperbolicData& hyp);

LogDet det_orbit_product(const ActionPath& path, const Potential& F,
                         const WeakKamSolution& wk, const HyperbolicData& hyp);

// dense solver up to dimension 400, shifted inverse power iteration above
double min_eigenvalue(const MatrixXd& A);

struct InterlacingCheck {
    bool interlaced = false;
    double max_violation = 0.0;  // most negative slack across the inequalities
    double log_det_ratio = 0.0;  // log det A - log det B
    double log_factor_product = 0.0;  // dropped per-step factors
};

// B keeps the deep leading (n - drop) blocks; the dropped trailing blocks
// are the shallow end, whose per-step factors reproduce det A / det B
InterlacingCheck eigenvalue_interlacing_check(const HessianAssembly& asm_,
                                              const ActionPath& path,
                                              const Potential& F,
                                              const WeakKamSolution& wk,
                                              const HyperbolicData& hyp,
                                              int drop_blocks);

struct PerturbedDetRatio {
    double log_ratio_minus = 0.0;  // log det(A - eps I) - log det A
    double log_ratio_plus = 0.0;   // log det(A + eps I) - log det A
};

// throws std::invalid_argument if eps is not below the smallest eigenvalue
PerturbedDetRatio perturbed_det_ratio(const MatrixXd& A, double eps);

}  // namespace hjlab
