#include "hjlab/twist.hpp"

#include <stdexcept>

namespace hjlab {

PhasePoint twist_forward(const PhasePoint& q, const Potential& F) {
    const VectorXd g = F.grad(q.x);
    return {q.x + q.p + g, q.p + g};
}

PhasePoint twist_backward(const PhasePoint& q, const Potential& F) {
    const VectorXd x0 = q.x - q.p;
    return {x0, q.p - F.grad(x0)};
}

MatrixXd twist_jacobian(const VectorXd& x, const Potential& F) {
    const int d = F.dim();
    const MatrixXd H = F.hess(x);
    MatrixXd J(2 * d, 2 * d);
    J.topLeftCorner(d, d) = MatrixXd::Identity(d, d) + H;
    J.topRightCorner(d, d) = MatrixXd::Identity(d, d);
    J.bottomLeftCorner(d, d) = H;
    J.bottomRightCorner(d, d) = MatrixXd::Identity(d, d);
    return J;
}

HyperbolicData hyperbolic_linearization(const Potential& F) {
    const int d = F.dim();
    HyperbolicData hd;
    hd.M = F.hess0();
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(hd.M);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("hyperbolic_linearization: eigensolver failed");
    const VectorXd lam = es.eigenvalues();
    if (lam.minCoeff() <= 0.0)
        throw std::runtime_error(
            "hyperbolic_linearization: hess F(0) is not positive definite");
    // S+- = (-M +- sqrt(M^2 + 4M)) / 2, taken in the eigenbasis of M
    VectorXd sp(d), sm(d);
    for (int k = 0; k < d; ++k) {
        const double root = std::sqrt(lam[k] * (lam[k] + 4.0));
        sp[k] = 0.5 * (-lam[k] + root);
        sm[k] = 0.5 * (-lam[k] - root);
    }
    const MatrixXd Q = es.eigenvectors();
    hd.S_plus = Q * sp.asDiagonal() * Q.transpose();
    hd.S_minus = Q * sm.asDiagonal() * Q.transpose();

    MatrixXd expand = MatrixXd::Identity(d, d) + hd.M + hd.S_plus;
    hd.mu = expand.determinant();
    hd.kappa0 = 1.0 / (lam.array() + sp.array() + 1.0).minCoeff();

    const double tol = 1e-10;
    const MatrixXd I = MatrixXd::Identity(d, d);
    if (((hd.S_plus * hd.S_plus + hd.S_plus * hd.M - hd.M).norm()) > tol)
        throw std::runtime_error("hyperbolic_linearization: quadratic relation fails");
    if (((expand * (I + hd.M + hd.S_minus)) - I).norm() > tol)
        throw std::runtime_error("hyperbolic_linearization: root pairing fails");
    if (!(hd.mu > 1.0))
        throw std::runtime_error("hyperbolic_linearization: expansion factor <= 1");
    if (!(hd.kappa0 > 0.0 && hd.kappa0 < 1.0))
        throw std::runtime_error("hyperbolic_linearization: contraction factor out of range");
    return hd;
}

BackwardOrbit backward_orbit(const VectorXd& x, const VectorXd& p, int n,
                             const Potential& F, double escape_bound) {
    BackwardOrbit orbit;
    orbit.points.reserve(n + 1);
    orbit.points.push_back({x, p});
    for (int k = 0; k < n; ++k) {
        PhasePoint q = twist_backward(orbit.points.back(), F);
        if (q.p.norm() > escape_bound)
            throw std::runtime_error(
                "backward_orbit: momentum escaped, seed is off the invariant graph");
        orbit.points.push_back(std::move(q));
        orbit.steps_completed = k + 1;
    }
    return orbit;
}

}  // namespace hjlab
