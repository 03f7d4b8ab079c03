#include "hjlab/potential.hpp"

#include <cmath>
#include <stdexcept>

namespace hjlab {

namespace {
constexpr double kTau = 2.0 * M_PI;
}

Potential Potential::cosine(int d, const VectorXd& amplitudes, double coupling) {
    if (d != 1 && d != 2)
        throw std::invalid_argument("Potential: dimension must be 1 or 2");
    if (amplitudes.size() != d)
        throw std::invalid_argument("Potential: need one amplitude per axis");
    if (d == 1 && coupling != 0.0)
        throw std::invalid_argument("Potential: coupling requires d = 2");
    Potential p;
    p.d_ = d;
    p.a_ = amplitudes;
    p.c_ = coupling;
    p.name_ = "cosine";
    p.validate();
    p.hess0_ = p.hess(VectorXd::Zero(d));
    return p;
}

Potential Potential::cosine1(double amplitude) {
    VectorXd a(1);
    a[0] = amplitude;
    return cosine(1, a);
}

Potential Potential::free(int d) {
    if (d != 1 && d != 2)
        throw std::invalid_argument("Potential: dimension must be 1 or 2");
    Potential p;
    p.d_ = d;
    p.free_ = true;
    p.a_ = VectorXd::Zero(d);
    p.name_ = "free";
    p.hess0_ = MatrixXd::Zero(d, d);
    return p;
}

void Potential::validate() const {
    for (int k = 0; k < d_; ++k)
        if (a_[k] <= 0.0)
            throw std::invalid_argument("Potential: amplitudes must be positive");
    if (c_ < 0.0)
        throw std::invalid_argument("Potential: coupling must be nonnegative");
    // Hessian at the minimum: diag(2 pi^2 a_k); the coupling term is
    // quartic near 0 and does not contribute.
    // Sample the torus to confirm 0 is the only minimum of the family.
    const int m = 64;
    VectorXd x(d_);
    for (int i0 = 0; i0 < m; ++i0)
        for (int i1 = 0; i1 < (d_ == 2 ? m : 1); ++i1) {
            x[0] = static_cast<double>(i0) / m;
            if (d_ == 2) x[1] = static_cast<double>(i1) / m;
            const double v = value(x);
            if (v < 0.0)
                throw std::invalid_argument("Potential: negative value on samples");
            if (v == 0.0 && (i0 != 0 || i1 != 0))
                throw std::invalid_argument("Potential: minimum is not unique");
        }
}

double Potential::value(const VectorXd& x) const {
    if (free_) return 0.0;
    double v = 0.0;
    double w[2] = {0.0, 0.0};
    for (int k = 0; k < d_; ++k) {
        w[k] = 1.0 - std::cos(kTau * x[k]);
        v += 0.5 * a_[k] * w[k];
    }
    if (d_ == 2) v += c_ * w[0] * w[1];
    return v;
}

VectorXd Potential::grad(const VectorXd& x) const {
    VectorXd g = VectorXd::Zero(d_);
    if (free_) return g;
    double s[2] = {0.0, 0.0}, w[2] = {0.0, 0.0};
    for (int k = 0; k < d_; ++k) {
        s[k] = std::sin(kTau * x[k]);
        w[k] = 1.0 - std::cos(kTau * x[k]);
        g[k] = 0.5 * a_[k] * kTau * s[k];
    }
    if (d_ == 2) {
        g[0] += c_ * kTau * s[0] * w[1];
        g[1] += c_ * kTau * w[0] * s[1];
    }
    return g;
}

MatrixXd Potential::hess(const VectorXd& x) const {
    MatrixXd H = MatrixXd::Zero(d_, d_);
    if (free_) return H;
    double s[2] = {0.0, 0.0}, co[2] = {0.0, 0.0}, w[2] = {0.0, 0.0};
    for (int k = 0; k < d_; ++k) {
        s[k] = std::sin(kTau * x[k]);
        co[k] = std::cos(kTau * x[k]);
        w[k] = 1.0 - co[k];
        H(k, k) = 0.5 * a_[k] * kTau * kTau * co[k];
    }
    if (d_ == 2) {
        H(0, 0) += c_ * kTau * kTau * co[0] * w[1];
        H(1, 1) += c_ * kTau * kTau * w[0] * co[1];
        const double off = c_ * kTau * kTau * s[0] * s[1];
        H(0, 1) += off;
        H(1, 0) += off;
    }
    return H;
}

std::array<MatrixXd, 2> Potential::third(const VectorXd& x) const {
    std::array<MatrixXd, 2> T = {MatrixXd::Zero(d_, d_), MatrixXd::Zero(d_, d_)};
    if (free_) return T;
    const double t3 = kTau * kTau * kTau;
    double s[2] = {0.0, 0.0}, co[2] = {0.0, 0.0}, w[2] = {0.0, 0.0};
    for (int k = 0; k < d_; ++k) {
        s[k] = std::sin(kTau * x[k]);
        co[k] = std::cos(kTau * x[k]);
        w[k] = 1.0 - co[k];
        T[k](k, k) = -0.5 * a_[k] * t3 * s[k];
    }
    if (d_ == 2) {
        // d^3/dx0^3 and mixed entries of the coupling term
        T[0](0, 0) += -c_ * t3 * s[0] * w[1];
        T[0](0, 1) += c_ * t3 * co[0] * s[1];
        T[0](1, 0) += c_ * t3 * co[0] * s[1];
        T[0](1, 1) += c_ * t3 * s[0] * co[1];
        T[1](1, 1) += -c_ * t3 * w[0] * s[1];
        T[1](0, 1) += c_ * t3 * s[0] * co[1];
        T[1](1, 0) += c_ * t3 * s[0] * co[1];
        T[1](0, 0) += c_ * t3 * co[0] * s[1];
    }
    return T;
}

}  // namespace hjlab
