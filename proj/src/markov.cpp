#include "hjlab/markov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "hjlab/numerics.hpp"

namespace hjlab {

namespace {

MarkovLayer make_layer(const KernelOperator& op, const TorusField& w_n,
                       const TorusField& w_np1, int n) {
    const Index total = op.spec.total();
    MarkovLayer layer;
    layer.spec = op.spec;
    layer.n = n;
    layer.log_pi.resize(total, total);
    const double log_w = std::log(op.weight());
    for (Index x = 0; x < total; ++x) {
        layer.log_pi.col(x) =
            op.log_kernel.col(x).array() + w_n.values.array() - w_np1.values(x);
    }
    double defect = 0.0;
    for (Index x = 0; x < total; ++x) {
        const double mass = std::exp(log_sum_exp(layer.log_pi.col(x)) + log_w);
        defect = std::max(defect, std::abs(mass - 1.0));
    }
    layer.norm_defect = defect;
    if (!(defect <= 1e-8))
        throw std::runtime_error("markov layer normalization defect " +
                                 std::to_string(defect));
    return layer;
}

}  // namespace

MarkovLayer markov_layer_from(const KernelOperator& op,
                              const PartitionTrace& trace, int n) {
    if (n < 0 || n + 1 >= static_cast<int>(trace.log_iter.size()))
        throw std::invalid_argument("markov_layer_from: layer index out of range");
    return make_layer(op, trace.log_iter[static_cast<std::size_t>(n)],
                      trace.log_iter[static_cast<std::size_t>(n) + 1], n);
}

std::vector<MarkovLayer> build_markov_layers(const KernelOperator& op,
                                             int n_max) {
    if (n_max < 1) throw std::invalid_argument("build_markov_layers: n_max < 1");
    std::vector<TorusField> w;
    w.reserve(static_cast<std::size_t>(n_max) + 1);
    w.emplace_back(op.spec, 0.0);
    for (int n = 0; n < n_max; ++n) w.push_back(apply_log(op, w.back()));
    std::vector<MarkovLayer> layers;
    layers.reserve(static_cast<std::size_t>(n_max));
    for (int n = 0; n < n_max; ++n)
        layers.push_back(make_layer(op, w[static_cast<std::size_t>(n)],
                                    w[static_cast<std::size_t>(n) + 1], n));
    return layers;
}

TorusField layer_apply_log(const MarkovLayer& layer, const TorusField& log_u) {
    if (!(log_u.spec == layer.spec))
        throw std::invalid_argument("layer_apply_log: grid mismatch");
    const Index total = layer.spec.total();
    TorusField out(layer.spec);
    const double log_w = std::log(layer.weight());
    for (Index x = 0; x < total; ++x) {
        VectorXd col = layer.log_pi.col(x) + log_u.values;
        out.values(x) = log_sum_exp(col) + log_w;
    }
    return out;
}

TorusField layer_apply_linear(const MarkovLayer& layer, const TorusField& u) {
    if (!(u.spec == layer.spec))
        throw std::invalid_argument("layer_apply_linear: grid mismatch");
    TorusField out(layer.spec);
    out.values =
        layer.weight() * (layer.log_pi.array().exp().matrix().transpose() * u.values);
    return out;
}

double telescope_check(const KernelOperator& op,
                       const std::vector<MarkovLayer>& layers,
                       const TorusField& log_u, int n) {
    if (n < 1 || n > static_cast<int>(layers.size()))
        throw std::invalid_argument("telescope_check: bad depth");
    TorusField lhs_u = log_u;
    TorusField lhs_one(op.spec, 0.0);
    for (int k = 0; k < n; ++k) {
        lhs_u = apply_log(op, lhs_u);
        lhs_one = apply_log(op, lhs_one);
    }
    TorusField rhs = log_u;
    for (int k = 0; k < n; ++k)
        rhs = layer_apply_log(layers[static_cast<std::size_t>(k)], rhs);
    return (lhs_u.values - lhs_one.values - rhs.values).cwiseAbs().maxCoeff();
}

TorusField drift_weight(const WeakKamSolution& wk, const DomainPartition& part) {
    if (!(wk.psi.spec == part.spec))
        throw std::invalid_argument("drift_weight: grid mismatch");
    TorusField V(part.spec);
    V.values = wk.psi.values.array() * part.chi.values.array().square();
    return V;
}

DriftCertificate certify_drift(const MarkovLayer& layer, const TorusField& V,
                               double nu, double gamma_lower) {
    if (!(V.spec == layer.spec))
        throw std::invalid_argument("certify_drift: grid mismatch");
    if (V.values.minCoeff() < 0.0)
        throw std::invalid_argument("certify_drift: V must be nonnegative");
    if (!(nu > 0.0)) throw std::invalid_argument("certify_drift: nu <= 0");

    TorusField PV = layer_apply_linear(layer, V);
    const double v_max = V.values.maxCoeff();

    const double lo = std::clamp(gamma_lower, 0.0, 0.999);
    constexpr int kGridPoints = 200;
    double best_obj = std::numeric_limits<double>::infinity();
    double best_gamma = 0.0, best_M = 0.0;
    for (int j = 0; j < kGridPoints; ++j) {
        const double gamma =
            lo + (j + 0.5) * (1.0 - lo) / static_cast<double>(kGridPoints);
        const double M = (PV.values - gamma * V.values).maxCoeff();
        if (!(M > 0.0)) continue;  // PV(x0) > 0 at the V = 0 node, expected
        if (M >= (1.0 - gamma) * v_max) continue;  // vacuous: bound exceeds sup V
        const double obj = M / (1.0 - gamma);
        if (obj < best_obj) {
            best_obj = obj;
            best_gamma = gamma;
            best_M = M;
        }
    }
    if (!std::isfinite(best_obj))
        throw std::runtime_error("certify_drift: no admissible gamma in scan");

    DriftCertificate cert;
    cert.gamma = best_gamma;
    cert.M_drift = best_M;
    cert.M_over_nu = best_M / nu;
    cert.PV = std::move(PV);
    return cert;
}

MinorizationCertificate certify_minorization(const MarkovLayer& layer,
                                             const TorusField& V,
                                             double R_mult, double nu) {
    if (!(V.spec == layer.spec))
        throw std::invalid_argument("certify_minorization: grid mismatch");
    if (!(R_mult > 0.0) || !(nu > 0.0))
        throw std::invalid_argument("certify_minorization: bad level parameters");

    const double level = R_mult * nu;
    const Index total = layer.spec.total();
    std::vector<Index> cols;
    for (Index x = 0; x < total; ++x)
        if (V.values(x) <= level) cols.push_back(x);
    if (cols.empty())
        throw std::runtime_error("certify_minorization: empty level set");

    VectorXd log_G =
        VectorXd::Constant(total, std::numeric_limits<double>::infinity());
    for (Index x : cols) log_G = log_G.cwiseMin(layer.log_pi.col(x));

    VectorXd G = log_G.array().exp();
    const double alpha0 = layer.weight() * G.sum();
    if (!(alpha0 > 0.0))
        throw std::runtime_error("certify_minorization: minorizing mass vanishes");

    MinorizationCertificate cert;
    cert.alpha0 = alpha0;
    cert.level_R_nu = level;
    cert.level_count = static_cast<int>(cols.size());
    cert.g_density = TorusField(layer.spec, G / alpha0);
    return cert;
}

HMParams hm_parameters(double gamma, double M_drift, double alpha0, double R) {
    if (!(gamma > 0.0) || !(gamma < 1.0))
        throw std::invalid_argument("hm_parameters: gamma outside (0, 1)");
    if (!(M_drift >= 0.0)) throw std::invalid_argument("hm_parameters: M < 0");
    if (!(alpha0 > 0.0) || !(alpha0 <= 1.0 + 1e-12))
        throw std::invalid_argument("hm_parameters: alpha0 outside (0, 1]");
    if (!(R > 0.0)) throw std::invalid_argument("hm_parameters: R <= 0");
    if (!(gamma + 2.0 * M_drift / R < 1.0))
        throw std::invalid_argument(
            "hm_parameters: level too small, gamma + 2M/R >= 1");

    HMParams p;
    p.gamma = gamma;
    p.M_drift = M_drift;
    p.alpha0 = alpha0;
    p.R = R;
    p.alpha1 = 0.5 * alpha0;
    p.gamma0 = 0.5 * (gamma + 2.0 * M_drift / R + 1.0);
    if (M_drift > 0.0) {
        p.beta = alpha0 / M_drift;
        p.alpha = std::max(1.0 - (p.alpha0 - p.alpha1),
                           (2.0 + R * p.beta * p.gamma0) / (2.0 + R * p.beta));
    } else {
        p.beta = std::numeric_limits<double>::infinity();
        p.alpha = std::max(1.0 - (p.alpha0 - p.alpha1), p.gamma0);
    }
    if (!(p.alpha > 0.0) || !(p.alpha < 1.0))
        throw std::invalid_argument("hm_parameters: alpha outside (0, 1)");
    return p;
}

ContractionVerification verify_hm_contraction(const MarkovLayer& layer,
                                              const TorusField& V,
                                              const HMParams& params,
                                              int trials, std::uint64_t seed) {
    if (trials < 1)
        throw std::invalid_argument("verify_hm_contraction: trials < 1");
    if (!std::isfinite(params.beta))
        throw std::invalid_argument("verify_hm_contraction: beta not finite");

    ContractionVerification out;
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int t = 0; t < trials; ++t) {
        TorusField u(layer.spec);
        if (t % 2 == 0) {
            u = random_smooth_field(layer.spec, seed + static_cast<std::uint64_t>(t),
                                    1.0);
        } else {
            for (Index i = 0; i < layer.spec.total(); ++i)
                u.values(i) = gauss(rng);
        }
        const double den = weighted_norm_mod_const(u, V, params.beta);
        if (den < 1e-14) continue;
        TorusField Pu = layer_apply_linear(layer, u);
        const double num = weighted_norm_mod_const(Pu, V, params.beta);
        out.worst_ratio = std::max(out.worst_ratio, num / den);
        ++out.trials_used;
    }
    if (out.worst_ratio > params.alpha + 1e-6)
        throw std::runtime_error("verify_hm_contraction: observed ratio " +
                                 std::to_string(out.worst_ratio) +
                                 " exceeds certified " +
                                 std::to_string(params.alpha));
    return out;
}

LyapunovEstimate lyapunov_exponent(const KernelOperator& op,
                                   const TorusField& log_u0,
                                   const TorusField& log_v0, int n_max,
                                   double floor) {
    if (n_max < 2) throw std::invalid_argument("lyapunov_exponent: n_max < 2");

    LyapunovEstimate est;
    TorusField wu = log_u0, wv = log_v0;
    std::vector<double> dist;
    TorusField diff(op.spec);
    diff.values = wu.values - wv.values;
    dist.push_back(sup_norm_mod_const(diff));
    for (int n = 1; n <= n_max; ++n) {
        wu = apply_log(op, wu);
        wv = apply_log(op, wv);
        diff.values = wu.values - wv.values;
        const double d = sup_norm_mod_const(diff);
        dist.push_back(d);
        if (d < floor) break;
    }

    const double d0 = dist.front();
    int burn = 0;
    while (burn < static_cast<int>(dist.size()) && dist[static_cast<std::size_t>(burn)] >= 0.5 * d0)
        ++burn;
    if (burn >= static_cast<int>(dist.size()) - 1) burn = 0;
    est.burn_in = burn;

    std::vector<double> xs, ys;
    est.log_dist.reserve(dist.size());
    for (std::size_t n = 0; n < dist.size(); ++n) {
        const double ld = dist[n] > 0.0 ? std::log(dist[n])
                                        : -std::numeric_limits<double>::infinity();
        est.log_dist.push_back(ld);
        if (static_cast<int>(n) >= burn && std::isfinite(ld) && dist[n] >= floor) {
            xs.push_back(static_cast<double>(n));
            ys.push_back(ld);
        }
    }
    est.points_used = static_cast<int>(xs.size());
    est.window_shrunk = est.points_used < 8;
    AffineFit fit = fit_affine(xs, ys);
    est.lambda_hat = -fit.slope;
    est.r2 = fit.r2;
    return est;
}

RatioStarCheck ratio_star_check(const TorusField& u, const TorusField& v) {
    if (!(u.spec == v.spec))
        throw std::invalid_argument("ratio_star_check: grid mismatch");
    RatioStarCheck out;
    if (u.values.minCoeff() < 1.0 || v.values.minCoeff() < 1.0) return out;
    out.omega = std::max(sup_norm_mod_const(u), sup_norm_mod_const(v));
    if (!(out.omega < 0.25)) return out;
    out.applicable = true;
    TorusField logr(u.spec);
    logr.values = u.values.array().log() - v.values.array().log();
    out.lhs = sup_norm_mod_const(logr);
    out.holds = out.lhs <= 4.0 * out.omega + 1e-12;
    return out;
}

}  // namespace hjlab
