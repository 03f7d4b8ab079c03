#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>

// Kicking potentials on the torus.  The stock family is
//   d = 1:  F(x) = a * (1 - cos 2 pi x) / 2
//   d = 2:  sum of per-axis wells plus an optional product coupling
//           c * (1 - cos 2 pi x0) * (1 - cos 2 pi x1)
// Construction validates the standing assumptions: F >= 0, F(0) = 0, the
// origin is the unique minimum, and the Hessian at 0 is positive definite.
// Potential::free() gives F = 0 (no kick), used by heat-kernel tests; it
// deliberately skips the nondegeneracy check.

namespace hjlab {

using Eigen::MatrixXd;
using Eigen::VectorXd;

class Potential {
  public:
    static Potential cosine(int d, const VectorXd& amplitudes, double coupling = 0.0);
    static Potential cosine1(double amplitude);  // d = 1 shorthand
    static Potential free(int d);

    int dim() const { return d_; }
    const std::string& name() const { return name_; }
    bool is_free() const { return free_; }

    double value(const VectorXd& x) const;
    VectorXd grad(const VectorXd& x) const;
    MatrixXd hess(const VectorXd& x) const;
    // third derivative as d matrices: third(x)[k](i,j) = d^3 F / dx_k dx_i dx_j
    std::array<MatrixXd, 2> third(const VectorXd& x) const;

    // Hessian at the origin (cached)
    const MatrixXd& hess0() const { return hess0_; }

  private:
    Potential() = default;
    void validate() const;

    int d_ = 1;
    bool free_ = false;
    VectorXd a_;
    double c_ = 0.0;
    std::string name_;
    MatrixXd hess0_;
};

}  // namespace hjlab
