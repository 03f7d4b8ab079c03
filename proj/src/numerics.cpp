#include "hjlab/numerics.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace hjlab {

AffineFit fit_affine(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("fit_affine: need >= 2 paired points");
    const int m = static_cast<int>(x.size());
    double sx = 0, sy = 0;
    for (int i = 0; i < m; ++i) { sx += x[i]; sy += y[i]; }
    const double mx = sx / m, my = sy / m;
    double sxx = 0, sxy = 0, syy = 0;
    for (int i = 0; i < m; ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    AffineFit fit;
    fit.points = m;
    if (sxx == 0.0)
        throw std::invalid_argument("fit_affine: degenerate abscissae");
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r2 = (syy == 0.0) ? 1.0 : (sxy * sxy) / (sxx * syy);
    return fit;
}

double log_sum_exp(const Eigen::ArrayXd& v) {
    const double m = v.maxCoeff();
    if (!std::isfinite(m)) return m;  // all -inf (empty mass) or a NaN
    return m + std::log((v - m).exp().sum());
}

TorusField random_smooth_field(const GridSpec& spec, std::uint64_t seed,
                               double amplitude, int max_freq) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    TorusField f(spec);
    const double tau = 2.0 * M_PI;
    if (spec.d == 1) {
        for (int k = 1; k <= max_freq; ++k) {
            const double a = unif(rng), b = unif(rng), w = 1.0 / (k * k);
            for (std::int64_t i = 0; i < spec.total(); ++i) {
                const double x = i * spec.spacing();
                f[i] += w * (a * std::cos(tau * k * x) + b * std::sin(tau * k * x));
            }
        }
    } else {
        for (int k0 = 0; k0 <= max_freq; ++k0)
            for (int k1 = (k0 == 0 ? 1 : 0); k1 <= max_freq; ++k1) {
                const double a = unif(rng), b = unif(rng);
                const double w = 1.0 / (1.0 + k0 * k0 + k1 * k1);
                for (std::int64_t i = 0; i < spec.total(); ++i) {
                    const VectorXd x = spec.coords(i);
                    const double ph = tau * (k0 * x[0] + k1 * x[1]);
                    f[i] += w * (a * std::cos(ph) + b * std::sin(ph));
                }
            }
    }
    const double amp = f.values.array().abs().maxCoeff();
    if (amp > 0.0) f.values *= amplitude / amp;
    return f;
}

}  // namespace hjlab
