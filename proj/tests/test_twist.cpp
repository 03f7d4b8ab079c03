#include <doctest.h>

#include <cmath>
#include <random>

#include "hjlab/potential.hpp"
#include "hjlab/twist.hpp"

using namespace hjlab;

namespace {
PhasePoint make_point(double x, double p) {
    PhasePoint q;
    q.x = VectorXd::Constant(1, x);
    q.p = VectorXd::Constant(1, p);
    return q;
}
}  // namespace

TEST_CASE("forward and backward maps are exact inverses") {
    Potential F = Potential::cosine1(1.0);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int t = 0; t < 100; ++t) {
        PhasePoint q = make_point(unif(rng), unif(rng));
        PhasePoint fwd = twist_forward(q, F);
        PhasePoint back = twist_backward(fwd, F);
        CHECK((back.x - q.x).cwiseAbs().maxCoeff() <= 1e-14);
        CHECK((back.p - q.p).cwiseAbs().maxCoeff() <= 1e-14);
    }
}

TEST_CASE("one forward step matches the explicit formula") {
    Potential F = Potential::cosine1(1.0);
    PhasePoint q = make_point(0.25, 0.1);
    PhasePoint r = twist_forward(q, F);
    // grad F(0.25) = pi
    CHECK(r.p(0) == doctest::Approx(0.1 + M_PI).epsilon(1e-14));
    CHECK(r.x(0) == doctest::Approx(0.25 + 0.1 + M_PI).epsilon(1e-14));
}

TEST_CASE("twist jacobian is symplectic") {
    VectorXd amp(2);
    amp << 1.0, 0.6;
    Potential F = Potential::cosine(2, amp, 0.4);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    MatrixXd J(4, 4);
    J.setZero();
    J.block(0, 2, 2, 2) = MatrixXd::Identity(2, 2);
    J.block(2, 0, 2, 2) = -MatrixXd::Identity(2, 2);
    for (int t = 0; t < 20; ++t) {
        VectorXd x(2);
        x << unif(rng), unif(rng);
        MatrixXd D = twist_jacobian(x, F);
        CHECK(std::abs(D.determinant() - 1.0) <= 1e-12);
        CHECK((D.transpose() * J * D - J).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("hyperbolic data satisfies its algebraic identities") {
    VectorXd amp(2);
    amp << 1.0, 0.5;
    Potential F = Potential::cosine(2, amp, 0.0);
    HyperbolicData hyp = hyperbolic_linearization(F);
    const MatrixXd I = MatrixXd::Identity(2, 2);
    CHECK((hyp.S_plus * hyp.S_plus + hyp.S_plus * hyp.M - hyp.M).norm() <= 1e-10);
    CHECK(((I + hyp.M + hyp.S_plus) * (I + hyp.M + hyp.S_minus) - I).norm() <=
          1e-10);
    CHECK((hyp.S_plus * hyp.M - hyp.M * hyp.S_plus).norm() <= 1e-10);
    CHECK((hyp.S_plus + hyp.S_minus + hyp.M).norm() <= 1e-12);
    CHECK(hyp.mu > 1.0);
    CHECK(hyp.kappa0 > 0.0);
    CHECK(hyp.kappa0 < 1.0);
    CHECK(hyp.mu == doctest::Approx((I + hyp.M + hyp.S_plus).determinant())
                        .epsilon(1e-12));
}

TEST_CASE("scalar hyperbolic data matches the quadratic formula at M = 3") {
    // amplitude chosen so hess F(0) = 3
    const double a = 3.0 / (2.0 * M_PI * M_PI);
    Potential F = Potential::cosine1(a);
    HyperbolicData hyp = hyperbolic_linearization(F);
    CHECK(hyp.M(0, 0) == doctest::Approx(3.0).epsilon(1e-13));
    const double sp = 0.5 * (-3.0 + std::sqrt(21.0));
    CHECK(hyp.S_plus(0, 0) == doctest::Approx(sp).epsilon(1e-12));
    CHECK(hyp.mu == doctest::Approx(0.5 * (5.0 + std::sqrt(21.0))).epsilon(1e-12));
    CHECK(hyp.kappa0 ==
          doctest::Approx(2.0 / (5.0 + std::sqrt(21.0))).epsilon(1e-12));
    CHECK(hyp.mu == doctest::Approx(4.79128784747792).epsilon(1e-10));
    CHECK(hyp.kappa0 == doctest::Approx(0.20871215252208).epsilon(1e-10));
}

TEST_CASE("expanding graph is invariant under the forward map") {
    Potential F = Potential::cosine1(1.0);
    HyperbolicData hyp = hyperbolic_linearization(F);
    const double s = hyp.S_plus(0, 0);
    // points on the linear graph p = S+ x stay on it to second order
    for (double x0 : {1e-4, -2e-4, 5e-5}) {
        PhasePoint q = make_point(x0, s * x0);
        PhasePoint r = twist_forward(q, F);
        CHECK(std::abs(r.p(0) - s * r.x(0)) <= 20.0 * x0 * x0);
    }
}

TEST_CASE("free potential has no hyperbolic linearization") {
    CHECK_THROWS_AS(hyperbolic_linearization(Potential::free(1)),
                    std::runtime_error);
}

TEST_CASE("backward orbit contracts toward the fixed point and guards escape") {
    Potential F = Potential::cosine1(1.0);
    HyperbolicData hyp = hyperbolic_linearization(F);
    const double s = hyp.S_plus(0, 0);
    const double x0 = 1e-3;
    BackwardOrbit orb = backward_orbit(VectorXd::Constant(1, x0),
                                       VectorXd::Constant(1, s * x0), 6, F, 1.0);
    REQUIRE(orb.points.size() == 7);
    // linearized backward dynamics divides x by I + M + S+ each step
    const double lam = 1.0 + hyp.M(0, 0) + s;
    for (int k = 1; k <= 4; ++k) {
        const double predicted = x0 / std::pow(lam, k);
        CHECK(orb.points[static_cast<std::size_t>(k)].x(0) ==
              doctest::Approx(predicted).epsilon(2e-3));
    }
    // a corrupted momentum seed blows up and trips the escape bound
    CHECK_THROWS_AS(backward_orbit(VectorXd::Constant(1, 0.3),
                                   VectorXd::Constant(1, -0.9), 40, F, 3.0),
                    std::runtime_error);
}
