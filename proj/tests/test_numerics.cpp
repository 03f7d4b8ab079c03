#include <doctest.h>

#include <cmath>

#include "hjlab/numerics.hpp"

using namespace hjlab;

TEST_CASE("affine fit recovers an exact line") {
    std::vector<double> x, y;
    for (int i = 0; i < 10; ++i) {
        x.push_back(i);
        y.push_back(3.0 - 0.25 * i);
    }
    AffineFit fit = fit_affine(x, y);
    CHECK(fit.slope == doctest::Approx(-0.25).epsilon(1e-13));
    CHECK(fit.intercept == doctest::Approx(3.0).epsilon(1e-13));
    CHECK(fit.r2 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fit.points == 10);
}

TEST_CASE("affine fit r2 drops for noisy data and rejects degenerate input") {
    std::vector<double> x = {0, 1, 2, 3, 4, 5, 6, 7};
    std::vector<double> y = {0, 1, 0, 1, 0, 1, 0, 1};
    AffineFit fit = fit_affine(x, y);
    CHECK(fit.r2 < 0.5);

    CHECK_THROWS_AS(fit_affine({1.0}, {2.0}), std::invalid_argument);
    CHECK_THROWS_AS(fit_affine({1.0, 1.0}, {2.0, 3.0}), std::invalid_argument);
    CHECK_THROWS_AS(fit_affine({1.0, 2.0}, {2.0}), std::invalid_argument);
}

TEST_CASE("log-sum-exp is stable under large offsets") {
    Eigen::ArrayXd v(3);
    v << 0.0, 0.0, 0.0;
    CHECK(log_sum_exp(v) == doctest::Approx(std::log(3.0)).epsilon(1e-14));
    v << 1000.0, 1000.0, 1000.0;
    CHECK(log_sum_exp(v) == doctest::Approx(1000.0 + std::log(3.0)).epsilon(1e-14));
    v << -1.0e308, 0.0, -1.0e308;
    CHECK(log_sum_exp(v) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("random smooth fields are deterministic in the seed") {
    GridSpec g{1, 64};
    TorusField a = random_smooth_field(g, 42, 1.0);
    TorusField b = random_smooth_field(g, 42, 1.0);
    TorusField c = random_smooth_field(g, 43, 1.0);
    CHECK((a.values - b.values).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.values - c.values).cwiseAbs().maxCoeff() > 1e-3);

    CHECK(a.values.cwiseAbs().maxCoeff() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("random smooth fields scale with the requested amplitude") {
    GridSpec g{2, 16};
    TorusField a = random_smooth_field(g, 5, 1.0);
    TorusField b = random_smooth_field(g, 5, 0.25);
    CHECK((4.0 * b.values - a.values).cwiseAbs().maxCoeff() <= 1e-12);
}
