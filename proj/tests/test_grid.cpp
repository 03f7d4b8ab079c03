#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "hjlab/grid.hpp"

using namespace hjlab;

TEST_CASE("grid indexing is a row-major bijection") {
    GridSpec g{2, 8};
    CHECK(g.total() == 64);
    CHECK(g.spacing() == doctest::Approx(0.125));
    CHECK(g.cell_volume() == doctest::Approx(0.125 * 0.125));
    CHECK(g.index(3, 5) == 3 * 8 + 5);
    for (Index idx = 0; idx < g.total(); ++idx) {
        int i0, i1;
        g.unravel(idx, i0, i1);
        CHECK(g.index(i0, i1) == idx);
    }
    CHECK(g.wrap(-1) == 7);
    CHECK(g.wrap(8) == 0);
    CHECK(g.wrap(-9) == 7);
}

TEST_CASE("grid rejects unsupported shapes") {
    CHECK_THROWS_AS(GridSpec(3, 16), std::invalid_argument);
    CHECK_THROWS_AS(GridSpec(1, 4), std::invalid_argument);
}

TEST_CASE("torus distance uses nearest representatives") {
    VectorXd a(2), b(2);
    a << 0.9, 0.1;
    b << 0.1, 0.9;
    CHECK(torus_distance(a, b) == doctest::Approx(0.28284271247461901).epsilon(1e-14));

    VectorXd d = torus_delta(a, b);  // a - b reduced
    CHECK(d(0) == doctest::Approx(-0.2).epsilon(1e-13));
    CHECK(d(1) == doctest::Approx(0.2).epsilon(1e-13));

    VectorXd x(1);
    x << -0.25;
    CHECK(torus_canonical(x)(0) == doctest::Approx(0.75));
}

TEST_CASE("torus distance satisfies the triangle inequality") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unif(-2.0, 2.0);
    for (int t = 0; t < 200; ++t) {
        VectorXd a(2), b(2), c(2);
        for (int k = 0; k < 2; ++k) {
            a(k) = unif(rng);
            b(k) = unif(rng);
            c(k) = unif(rng);
        }
        CHECK(torus_distance(a, c) <=
              torus_distance(a, b) + torus_distance(b, c) + 1e-12);
        CHECK(torus_distance(a, b) == doctest::Approx(torus_distance(b, a)));
        CHECK(torus_distance(a, a) == doctest::Approx(0.0));
    }
}

TEST_CASE("interpolation is exact at nodes and linear between them") {
    GridSpec g{1, 64};
    TorusField f(g);
    for (Index i = 0; i < g.total(); ++i)
        f[i] = std::sin(2.0 * M_PI * g.coords(i)(0));
    for (Index i = 0; i < g.total(); i += 7)
        CHECK(interpolate(f, g.coords(i)) == doctest::Approx(f[i]).epsilon(1e-14));
    VectorXd mid(1);
    mid << (3.5 / 64.0);
    CHECK(interpolate(f, mid) == doctest::Approx(0.5 * (f[3] + f[4])).epsilon(1e-14));
    // periodic wraparound between the last node and the first
    mid << (63.5 / 64.0);
    CHECK(interpolate(f, mid) == doctest::Approx(0.5 * (f[63] + f[0])).epsilon(1e-14));
}

TEST_CASE("sup norm modulo constants") {
    GridSpec g{1, 8};
    TorusField f(g);
    f.values << 0, 1, 2, 3, 3, 2, 1, 0;
    CHECK(sup_norm_mod_const(f) == doctest::Approx(1.5));
    TorusField shifted = f;
    shifted.values.array() += 17.0;
    CHECK(sup_norm_mod_const(shifted) == doctest::Approx(1.5));
    shifted.values = -2.0 * f.values;
    CHECK(sup_norm_mod_const(shifted) == doctest::Approx(3.0));
}

TEST_CASE("weighted norm basics and validation") {
    GridSpec g{1, 8};
    TorusField f(g, 1.0), V(g, 1.0);
    CHECK(weighted_norm(f, V, 1.0) == doctest::Approx(0.5));
    CHECK(weighted_norm(f, V, 0.0) == doctest::Approx(1.0));

    TorusField Vbad(g, -0.5);
    CHECK_THROWS_AS(weighted_norm(f, Vbad, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(weighted_norm(f, V, -0.1), std::invalid_argument);
    TorusField other(GridSpec{1, 16}, 1.0);
    CHECK_THROWS_AS(weighted_norm(f, other, 1.0), std::invalid_argument);
}

TEST_CASE("weighted norm modulo constants matches a brute-force shift scan") {
    GridSpec g{1, 32};
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int t = 0; t < 20; ++t) {
        TorusField f(g), V(g);
        for (Index i = 0; i < g.total(); ++i) {
            f[i] = 2.0 * unif(rng) - 1.0;
            V[i] = unif(rng);
        }
        const double beta = 0.2 + unif(rng);
        const double fast = weighted_norm_mod_const(f, V, beta);
        double brute = weighted_norm(f, V, beta);
        const double lo = -f.values.maxCoeff(), hi = -f.values.minCoeff();
        for (int j = 0; j <= 4000; ++j) {
            const double c = lo + (hi - lo) * j / 4000.0;
            TorusField s = f;
            s.values.array() += c;
            brute = std::min(brute, weighted_norm(s, V, beta));
        }
        CHECK(fast <= brute + 1e-7);
        // the scan can overshoot the infimum by a step (slope in c is <= 1)
        CHECK(fast >= brute - (hi - lo) / 4000.0 - 1e-9);
    }
}

TEST_CASE("finite-difference gradient converges at second order") {
    for (int n : {64, 128}) {
        GridSpec g{1, n};
        TorusField f(g);
        for (Index i = 0; i < g.total(); ++i)
            f[i] = std::sin(2.0 * M_PI * g.coords(i)(0));
        auto grad = gradient_fd(f);
        REQUIRE(grad.size() == 1);
        double err = 0.0;
        for (Index i = 0; i < g.total(); ++i)
            err = std::max(err, std::abs(grad[0][i] -
                                         2.0 * M_PI * std::cos(2.0 * M_PI *
                                                               g.coords(i)(0))));
        const double h = g.spacing();
        CHECK(err <= 1.5 * (2.0 * M_PI) * (2.0 * M_PI * h) * (2.0 * M_PI * h) / 6.0);
    }
}

TEST_CASE("second difference probe recovers curvature of a smooth field") {
    GridSpec g{1, 128};
    TorusField f(g);
    for (Index i = 0; i < g.total(); ++i)
        f[i] = std::cos(2.0 * M_PI * g.coords(i)(0));
    TorusField probe = second_difference_probe(f);
    const double w = 4.0 * M_PI * M_PI;
    CHECK(probe[0] == doctest::Approx(-w).epsilon(1e-3));
    CHECK(probe[64] == doctest::Approx(w).epsilon(1e-3));
}

TEST_CASE("nearest index wraps and rounds") {
    GridSpec g{1, 8};
    VectorXd x(1);
    x << 0.13;  // nodes at 0.125 spacing
    CHECK(g.nearest_index(x) == 1);
    x << 0.99;
    CHECK(g.nearest_index(x) == 0);
    x << -0.06;
    CHECK(g.nearest_index(x) == 0);
}
