#pragma once

#include <Eigen/Dense>
#include <vector>

#include "hjlab/potential.hpp"

// The exact symplectic map generated by one kick,
//   Phi(x, p) = (x + p + grad F(x), p + grad F(x)),
// its inverse, and the linearization data at the hyperbolic fixed point
// (0, 0).  With M = hess F(0), the positive solution of
//   S^2 + S M - M = 0
// gives the curvature S+ of the expanding invariant graph; the companion
// root is S- = -M - S+.  Key derived quantities:
//   mu     = det(I + M + S+)  > 1   (one-step volume expansion)
//   kappa0 = ||(I + M + S+)^{-1}||  in (0, 1)  (backward contraction factor)

namespace hjlab {

struct PhasePoint {
    VectorXd x;  // position lift in R^d
    VectorXd p;  // momentum
};

PhasePoint twist_forward(const PhasePoint& q, const Potential& F);
// exact inverse: x0 = x1 - p1, p0 = p1 - grad F(x0)
PhasePoint twist_backward(const PhasePoint& q, const Potential& F);

// 2d x 2d Jacobian [[I + hess F, I], [hess F, I]] at position x
MatrixXd twist_jacobian(const VectorXd& x, const Potential& F);

struct HyperbolicData {
    MatrixXd M;        // hess F(0), symmetric positive definite
    MatrixXd S_plus;   // positive root, commutes with M
    MatrixXd S_minus;  // = -M - S_plus
    double mu = 0.0;
    double kappa0 = 0.0;
};

// throws std::runtime_error if the constructed data fails its identities
// (quadratic relation, inverse pairing, mu > 1, kappa0 in (0,1)) at 1e-10
HyperbolicData hyperbolic_linearization(const Potential& F);

struct BackwardOrbit {
    std::vector<PhasePoint> points;  // points[k] = state k steps back
    int steps_completed = 0;
};

// iterate the inverse map n times from (x, p).  Throws std::runtime_error
// if |p| exceeds escape_bound, which signals a bad momentum seed.
BackwardOrbit backward_orbit(const VectorXd& x, const VectorXd& p, int n,
                             const Potential& F, double escape_bound);

}  // namespace hjlab
