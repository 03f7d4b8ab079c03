#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "hjlab/grid.hpp"

// Small shared numerics: least-squares line fits, stable log-sum-exp,
// and seeded smooth random fields for property tests.

namespace hjlab {

struct AffineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;  // coefficient of determination
    int points = 0;
};

// ordinary least squares of y against x (sizes must match, >= 2 points)
AffineFit fit_affine(const std::vector<double>& x, const std::vector<double>& y);

// log(sum(exp(v))) with max subtraction
double log_sum_exp(const Eigen::ArrayXd& v);

// smooth zero-mean field: a few random low-frequency Fourier modes,
// deterministic in the seed, sup amplitude about `amplitude`
TorusField random_smooth_field(const GridSpec& spec, std::uint64_t seed,
                               double amplitude = 1.0, int max_freq = 3);

}  // namespace hjlab
